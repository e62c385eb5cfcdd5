"""Trace-wide property checks. Each returns a list of violations (empty means it holds)."""

from __future__ import annotations

from collections import defaultdict

from .frames import FrameKind
from .medium import EventKind
from .scenario import CONTENTION, POLLED
from .trace import Trace


def no_collisions(trace: Trace) -> list[str]:
    if trace.mode != POLLED:
        return []
    return [f"collision at {e.t}" for e in trace.events if e.kind is EventKind.COLLISION]


def no_polls(trace: Trace) -> list[str]:
    if trace.mode != CONTENTION:
        return []
    return [f"poll at {e.t}" for e in trace.events
            if any(f.kind is FrameKind.POLL for f in e.frames)]


def monotone_time(trace: Trace) -> list[str]:
    out = []
    last = 0
    for e in trace.events:
        if e.t < last:
            out.append(f"event at {e.t} after {last}")
        if e.dur < 0:
            out.append(f"negative duration at {e.t}")
        last = e.t
    return out


def busy_segments(trace: Trace) -> list[tuple[int, int]]:
    segs = []
    for e in trace.events:
        if e.kind is EventKind.TX_END:
            f = e.frames[0]
            segs.append((f.tx_start, e.t))
        elif e.kind is EventKind.COLLISION:
            segs.append((e.t, e.t + e.dur))
    return segs


def channel_exclusive(trace: Trace) -> list[str]:
    out = []
    prev_end = 0
    for s, t in busy_segments(trace):
        if s < prev_end:
            out.append(f"overlap: segment starting {s} before {prev_end}")
        if t > trace.duration_us:
            out.append(f"segment ends at {t} after the run")
        prev_end = t
    return out


def throughput_ceiling(trace: Trace, window_us: int = 100_000) -> list[str]:
    rate = trace.scenario.phy.bit_rate
    bins: dict = defaultdict(int)
    for d in trace.deliveries:
        bins[d.t // window_us] += 8 * d.bytes
    limit = rate * window_us / 1_000_000
    return [f"window {k}: {b} bits > {limit:.0f}" for k, b in sorted(bins.items()) if b > limit]


def conservation(trace: Trace) -> list[str]:
    out = []
    for q in trace.queue_samples:
        if q["enqueued"] != q["dequeued"] + q["dropped"] + q["depth"]:
            out.append(f"queue {q['station']}/{q['session']}/{q['class']} at {q['t']}")
        if q["depth"] > trace.scenario.queue_capacity:
            out.append(f"queue over capacity at {q['t']}")
    return out


def _data_starts(trace: Trace):
    for e in trace.events:
        if e.kind is EventKind.TX_START and e.frames[0].kind is FrameKind.DATA:
            yield e.frames[0]


def fifo(trace: Trace) -> list[str]:
    """Frames leave each queue in creation order."""
    out = []
    last: dict = {}
    for f in _data_starts(trace):
        key = (f.src, f.cls.name) if trace.mode == POLLED else f.session
        if f.uid <= last.get(key, -1):
            out.append(f"queue {key}: uid {f.uid} after {last[key]}")
        last[key] = f.uid
    return out


def session_seq(trace: Trace) -> list[str]:
    out = []
    last: dict = {}
    for f in _data_starts(trace):
        if f.seq <= last.get(f.session, -1):
            out.append(f"session {f.session}: seq {f.seq} after {last[f.session]}")
        last[f.session] = f.seq
    return out


def nts_iff_empty(trace: Trace) -> list[str]:
    out = []
    for p in trace.polls:
        if p["response"] == "timeout":
            continue
        if (p["response"] == "nts") != (p["backlog"] == 0):
            out.append(f"poll at {p['t']}: {p['response']} with backlog {p['backlog']}")
    # every Nts answers the latest frame addressed to its sender, which must be a poll
    last_to: dict = {}
    for e in trace.events:
        if e.kind is not EventKind.TX_START:
            continue
        f = e.frames[0]
        if f.kind is FrameKind.NTS:
            prev = last_to.get(f.src)
            if prev is None or prev.kind is not FrameKind.POLL:
                out.append(f"nts from {f.src} at {e.t} without a poll")
        last_to[f.dst] = f
    return out


def polled_only(trace: Trace) -> list[str]:
    """In polled mode every data burst follows a poll of a same-class session at its source."""
    if trace.mode != POLLED:
        return []
    classes = {s.id: s.cls for s in trace.scenario.sessions}
    out = []
    poll = None
    for e in trace.events:
        if e.kind is not EventKind.TX_START:
            continue
        f = e.frames[0]
        if f.kind is FrameKind.POLL:
            poll = f
        elif f.kind is FrameKind.DATA:
            if poll is None or poll.dst != f.src or classes[poll.session] != f.cls.name:
                out.append(f"unsolicited data from {f.src} at {e.t}")
        else:
            poll = None
    return out


def idle_period(trace: Trace) -> list[str]:
    """Within every unbroken Idle stretch a session is polled on exactly every K-th cycle."""
    K = trace.scenario.idle_period
    if trace.mode != POLLED or K <= 0:
        return []
    complete = [c for c in trace.cycles if c["t"] + trace.cycle_us <= trace.duration_us]
    out = []
    run: dict = {}
    for c in complete:
        for s in c["sessions"]:
            sid = s["session"]
            if s["state"] != "idle":
                run.pop(sid, None)
                continue
            j = run.get(sid, 0)
            want = 1 if j % K == K - 1 else 0
            if s["polls"] != want:
                out.append(f"cycle {c['cycle']}: idle session {sid} polled {s['polls']}x, "
                           f"expected {want}")
            run[sid] = j + 1
    return out


def idle_poll_counts(trace: Trace, session: int) -> list[int]:
    """Polls per complete cycle for ``session`` while it started the cycle Idle."""
    return [s["polls"] for c in trace.cycles for s in c["sessions"]
            if s["session"] == session and s["state"] == "idle"
            and c["t"] + trace.cycle_us <= trace.duration_us]


def class_airtime_share(trace: Trace, window_us: int = 5_000_000) -> dict:
    """Per class, fraction of each whole window spent in that class's poll exchanges."""
    n = trace.duration_us // window_us
    share: dict = defaultdict(lambda: [0] * n)
    for p in trace.polls:
        a, b = p["t"], p["t"] + p["dur"]
        k = a // window_us
        while a < b and k < n:
            edge = min(b, (k + 1) * window_us)
            share[p["class"]][k] += edge - a
            a = edge
            k += 1
    return {c: [v / window_us for v in vals] for c, vals in share.items()}


def floor_share(trace: Trace, window_us: int = 5_000_000, slack: float = 0.02) -> list[str]:
    if trace.mode != POLLED:
        return []
    floors: dict = {}
    for s in trace.scenario.sessions:
        floors[s.cls] = max(floors.get(s.cls, 0.0), s.floor_share)
    shares = class_airtime_share(trace, window_us)
    out = []
    for cls, fl in floors.items():
        if fl <= 0:
            continue
        for k, v in enumerate(shares.get(cls, [0.0] * (trace.duration_us // window_us))):
            if v < fl - slack:
                out.append(f"class {cls} window {k}: share {v:.3f} < floor {fl}")
    return out


ALL = {
    "no_collisions_polled": no_collisions,
    "no_polls_contention": no_polls,
    "monotone_time": monotone_time,
    "channel_exclusive": channel_exclusive,
    "throughput_ceiling": throughput_ceiling,
    "conservation": conservation,
    "fifo": fifo,
    "session_seq": session_seq,
    "nts_iff_empty": nts_iff_empty,
    "polled_only": polled_only,
    "idle_period": idle_period,
    "floor_share": floor_share,
}


def run_all(trace: Trace) -> dict[str, list[str]]:
    return {name: fn(trace) for name, fn in ALL.items()}
