"""Acceptance suite. Each criterion prints one PASS/FAIL line (also repeated in the session summary)."""

import time

import pytest

from conftest import make_testbed
from oracle import timeline
from pollsim import checks, engine, metrics
from pollsim.frames import Role, StationId
from pollsim.medium import EventKind
from pollsim.scenario import SessionSpec

RATE = 250
NTS_EXCHANGE = 554  # poll 272 + SIFS 10 + Nts 272


VERDICTS = []


def verdict(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    VERDICTS.append(line)
    print(line)
    assert ok, detail


def video_series(traces, mode):
    rep = metrics.report([t for t in traces if t.mode == mode])
    return rep, dict(rep.video_series(mode))


def test_c1_polled_protects_video(scenario_250):
    t0 = time.perf_counter()
    traces = engine.sweep(scenario_250, range(7), ["polled"])
    elapsed = time.perf_counter() - t0
    _, series = video_series(traces, "polled")
    kbps = [series[n].kbps for n in range(7)]
    std0, std6 = series[0].ipt_std, series[6].ipt_std
    ok = (all(k >= 0.95 * RATE for k in kbps) and std6 <= 1.5 * std0 + 1e-9
          and elapsed < 10)
    verdict("C1 polled QoS protection", ok,
            f"min video {min(kbps):.1f} kbps, std0 {std0:.3f} ms, std6 {std6:.3f} ms, "
            f"sweep {elapsed:.2f} s")


def onset_and_stds(traces, rate):
    _, series = video_series(traces, "contention")
    onset = next((n for n in sorted(series) if series[n].kbps < 0.9 * rate), None)
    stds = [series[n].ipt_std for n in sorted(series) if onset is not None and n >= onset]
    return onset, stds


def test_c2_contention_onset(sweep_250):
    onset, stds = onset_and_stds(sweep_250, RATE)
    rising = all(a < b for a, b in zip(stds, stds[1:]))
    verdict("C2 contention degradation onset", onset in (3, 4, 5) and rising,
            f"onset {onset}, std from onset {[round(s, 2) for s in stds]}")


def test_c3_higher_rate_earlier_onset(sweep_250, sweep_400):
    low, _ = onset_and_stds(sweep_250, RATE)
    high, _ = onset_and_stds(sweep_400, 400)
    ok = high is not None and low is not None and high <= low and high <= 3
    verdict("C3 400 kbps onset earlier", ok, f"onset 400 kbps {high}, 250 kbps {low}")


def overhead_scenario(idle_period):
    sessions = [SessionSpec(1, "video", 1, 2, rate_kbps=RATE),
                SessionSpec(2, "bulk", 2, 3, cls="nonrealtime", start_s=60),
                SessionSpec(3, "bulk", 3, 1, cls="nonrealtime", start_s=60)]
    return make_testbed(sessions=sessions, duration_s=10, idle_period=idle_period)


def goodput(tr):
    bits = sum(8 * d.bytes for d in tr.deliveries)
    busy = sum(p["dur"] for p in tr.polls)
    return bits, busy, bits / busy * 1000


def test_c4_polling_overhead():
    adaptive = engine.run(overhead_scenario(4))
    forced = engine.run(overhead_scenario(0))
    bits_a, busy_a, g_a = goodput(adaptive)
    bits_f, busy_f, g_f = goodput(forced)
    nts = [p["dur"] for tr in (adaptive, forced) for p in tr.polls if p["response"] == "nts"]
    extra = len(forced.polls) - len(adaptive.polls)
    per_poll = (busy_f - busy_a) / extra
    ok = (bits_a == bits_f and g_f < g_a
          and all(abs(d - NTS_EXCHANGE) <= 1 for d in nts)
          and abs(per_poll - NTS_EXCHANGE) <= 1)
    verdict("C4 polling overhead", ok,
            f"goodput forced {g_f:.1f} < adaptive {g_a:.1f} kbps of busy air, "
            f"{extra} extra polls at {per_poll:.2f} us each")


def floor_scenario():
    sessions = [SessionSpec(i, "video", 1 + (i - 1) % 3, 1 + i % 3, rate_kbps=RATE)
                for i in range(1, 7)]
    sessions += [SessionSpec(7, "bulk", 1, 2, cls="nonrealtime", floor_share=0.4),
                 SessionSpec(8, "bulk", 2, 3, cls="nonrealtime", floor_share=0.4)]
    return make_testbed(sessions=sessions, duration_s=20)


def test_c5_property_suites(sweep_250, sweep_400):
    floor = engine.run(floor_scenario())
    idle = engine.run(overhead_scenario(4))
    traces = list(sweep_250) + list(sweep_400) + [floor, idle]
    failures = {}
    for i, tr in enumerate(traces):
        for name, bad in checks.run_all(tr).items():
            if bad:
                failures[f"{tr.mode}/ftp{tr.ftp_count}#{i}/{name}"] = bad[:3]
    counts = checks.idle_poll_counts(idle, 2)
    aligned = len(counts) // 4 * 4
    once_per_k = aligned > 0 and all(sum(counts[j:j + 4]) == 1 for j in range(0, aligned, 4))
    share = min(checks.class_airtime_share(floor)["nonrealtime"])
    repeat = [engine.run(tr.scenario).dumps() == tr.dumps() for tr in (sweep_250[-1], floor)]
    ok = not failures and once_per_k and share >= 0.4 - 0.02 and all(repeat)
    verdict("C5 property suites", ok,
            f"{len(traces)} traces, violations {failures or 'none'}, "
            f"idle polls per K-window {'1' if once_per_k else counts[:8]}, "
            f"nonrealtime floor share {share:.3f}, deterministic {all(repeat)}")


def project(ev):
    if ev.kind is EventKind.IDLE_GAP:
        return (ev.kind.value, ev.t, ev.dur, None, None, None, None)
    f = ev.frames[0]
    return (ev.kind.value, ev.t, ev.dur, f.kind.value, f.src, f.dst, f.seq)


@pytest.mark.parametrize("cycle_ms", [None, 10, 7])
def test_c6_oracle_equivalence(cycle_ms):
    cfg = make_testbed(stations=[StationId(0, Role.MASTER), StationId(1)],
                       sessions=[SessionSpec(1, "video", 1, 0, rate_kbps=RATE)],
                       duration_s=0.6, cycle_ms=cycle_ms)
    tr = engine.run(cfg)
    cycle_us = tr.cycle_us
    want, sent = timeline(RATE, 1000, cycle_us, cfg.duration_us)
    got = [project(e) for e in tr.events]
    first_diff = next((i for i, (a, b) in enumerate(zip(got, want)) if a != b), None)
    ok = got == want and 0 < sent <= 20
    verdict(f"C6 oracle equivalence (cycle {cycle_us} us)", ok,
            f"{len(got)} events vs {len(want)}, {sent} frames, first difference "
            f"{first_diff}")
