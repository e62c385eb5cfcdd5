from hypothesis import given, strategies as st

from pollsim.frames import (NONREALTIME, REALTIME, ControlFactory, Frame, FrameKind,
                            NotPolled, Role, StationId, make_poll)
from pollsim.station import Enqueue, QueueSet, Route, demux, enqueue, on_poll

import pytest

MASTER = StationId(0, Role.MASTER)
S1 = StationId(1)
RULES = {1: REALTIME, 2: NONREALTIME}


def frame(cls, seq, session=None):
    session = session or (1 if cls == REALTIME else 2)
    return Frame(FrameKind.DATA, 1, 2, session=session, cls=cls, payload_bytes=1000, seq=seq)


def test_enqueue_into_empty():
    qs = QueueSet([REALTIME, NONREALTIME], 50)
    assert enqueue(qs, frame(REALTIME, 0)) is Enqueue.ENQUEUED
    assert qs.depth(REALTIME) == 1


def test_enqueue_full_drops():
    qs = QueueSet([REALTIME, NONREALTIME], 50)
    for i in range(50):
        qs.enqueue(frame(REALTIME, i))
    assert qs.enqueue(frame(REALTIME, 50)) is Enqueue.DROPPED
    assert qs.dropped[REALTIME] == 1 and qs.depth(REALTIME) == 50
    # the other class is unaffected
    assert qs.enqueue(frame(NONREALTIME, 0)) is Enqueue.ENQUEUED


def test_fifo_head():
    qs = QueueSet([REALTIME, NONREALTIME])
    qs.enqueue(frame(REALTIME, 5))
    qs.enqueue(frame(REALTIME, 6))
    assert qs.head(REALTIME).seq == 5


def test_on_poll_returns_head():
    qs = QueueSet([REALTIME, NONREALTIME])
    qs.enqueue(frame(REALTIME, 3))
    out = on_poll(qs, make_poll(MASTER, 1, 1, 0), S1, 0, RULES)
    assert out.kind is FrameKind.DATA and out.seq == 3


def test_on_poll_empty_gives_nts():
    qs = QueueSet([REALTIME, NONREALTIME])
    fac = ControlFactory(MASTER)
    out = on_poll(qs, fac.make_poll(MASTER, 1, 1, 0), S1, 7, RULES, fac.make_nts)
    assert out.kind is FrameKind.NTS and out.dst == 0


def test_on_poll_class_matched():
    qs = QueueSet([REALTIME, NONREALTIME])
    qs.enqueue(frame(NONREALTIME, 8))
    assert on_poll(qs, make_poll(MASTER, 1, 2, 0), S1, 0, RULES).seq == 8
    # a realtime poll does not reach into the nonrealtime queue
    qs.enqueue(frame(NONREALTIME, 9))
    assert on_poll(qs, make_poll(MASTER, 1, 1, 0), S1, 0, RULES).kind is FrameKind.NTS


def test_on_poll_wrong_station():
    with pytest.raises(NotPolled):
        on_poll(QueueSet([REALTIME]), make_poll(MASTER, 1, 1, 0), StationId(2), 0, RULES)


def test_demux_routes():
    poll = make_poll(MASTER, 1, 1, 0)
    assert demux(S1, poll) == {Route.TO_SCHEDULER}
    nts = Frame(FrameKind.NTS, 2, 0)
    assert demux(MASTER, nts) == {Route.TO_POLL_MANAGER}
    assert demux(StationId(2), poll) == {Route.IGNORE}


def test_demux_data():
    f = Frame(FrameKind.DATA, 1, 2, session=1)
    assert demux(StationId(2), f) == {Route.TO_LOCAL_SINK}
    assert demux(StationId(3), f) == {Route.IGNORE}
    assert demux(MASTER, Frame(FrameKind.DATA, 1, 0)) == {Route.TO_POLL_MANAGER,
                                                          Route.TO_LOCAL_SINK}
    assert demux(StationId(4, Role.MONITOR), f) == {Route.IGNORE}


ops = st.lists(st.tuples(st.sampled_from(["rt", "nrt", "deq_rt", "deq_nrt"])), max_size=200)


@given(ops, st.integers(1, 8))
def test_conservation_and_fifo(seq, cap):
    qs = QueueSet([REALTIME, NONREALTIME], cap)
    n = 0
    out = {REALTIME: [], NONREALTIME: []}
    accepted = {REALTIME: [], NONREALTIME: []}
    for (op,) in seq:
        if op in ("rt", "nrt"):
            cls = REALTIME if op == "rt" else NONREALTIME
            f = frame(cls, n)
            n += 1
            if qs.enqueue(f) is Enqueue.ENQUEUED:
                accepted[cls].append(f.seq)
        else:
            cls = REALTIME if op == "deq_rt" else NONREALTIME
            f = qs.dequeue(cls)
            if f is not None:
                out[cls].append(f.seq)
        assert qs.conserved()
        assert all(qs.depth(c) <= cap for c in qs.classes)
    for c in out:
        assert out[c] == accepted[c][:len(out[c])]
