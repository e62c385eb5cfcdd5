import pytest

from conftest import make_testbed
from pollsim import engine, metrics
from pollsim.frames import Role, StationId
from pollsim.medium import EventKind
from pollsim.scenario import ConfigInvalid, SessionSpec


def test_polled_video_rate():
    tr = engine.run(make_testbed(duration_s=10))
    assert metrics.delivered_kbps(tr, 1) == pytest.approx(250, rel=0.01)


def test_runs_are_identical():
    cfg = make_testbed(duration_s=3, mode="contention")
    cfg = engine.with_ftp(cfg, 2, "contention")
    assert engine.run(cfg).dumps() == engine.run(cfg).dumps()


def test_seed_changes_contention():
    cfg = engine.with_ftp(make_testbed(duration_s=3, mode="contention"), 3, "contention")
    assert engine.run(cfg).dumps() != engine.run(cfg.replace(seed=cfg.seed + 1)).dumps()


def test_contention_single_bulk_closed_form():
    cfg = make_testbed(mode="contention", duration_s=10,
                  stations=[StationId(1), StationId(2)],
                  sessions=[SessionSpec(1, "bulk", 1, 2, cls="nonrealtime")])
    tr = engine.run(cfg)
    # one station alone: mean backoff cw_min / 2 slots after DIFS, then the frame
    expected = 1500 * 8 / (50 + 15.5 * 20 + 6328) * 1000
    assert metrics.delivered_kbps(tr, 1) == pytest.approx(expected, rel=0.05)


def test_invalid_config_raises():
    with pytest.raises(ConfigInvalid):
        engine.run(make_testbed(stations=[StationId(1), StationId(2)]))


def test_sweep_cardinality():
    base = make_testbed(duration_s=1)
    assert len(engine.sweep(base, range(7), ["polled"])) == 7
    assert len(engine.sweep(base, range(7), ["polled", "contention"])) == 14
    assert engine.sweep(base, [], ["polled"]) == []


def test_sweep_workers_match_serial():
    base = make_testbed(duration_s=1)
    a = engine.sweep(base, range(3), ["contention"])
    b = engine.sweep(base, range(3), ["contention"], workers=3)
    assert [t.dumps() for t in a] == [t.dumps() for t in b]


def test_with_ftp():
    cfg = engine.with_ftp(make_testbed(), 4, "polled")
    bulk = [s for s in cfg.sessions if s.kind == "bulk"]
    assert len(bulk) == 4
    assert {s.src for s in bulk} == {1, 2, 3}
    assert all(s.src != s.dst for s in bulk)


def test_no_collisions_in_polled():
    tr = engine.run(engine.with_ftp(make_testbed(duration_s=2), 3, "polled"))
    assert not any(e.kind is EventKind.COLLISION for e in tr.events)


def test_monitor_receives_nothing():
    tr = engine.run(engine.with_ftp(make_testbed(duration_s=2), 6, "polled"))
    assert not any(d for d in tr.deliveries
                   if next(s.dst for s in tr.scenario.sessions if s.id == d.session) == 4)
