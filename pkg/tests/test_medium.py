import numpy as np
import pytest

from pollsim.frames import Frame, FrameKind
from pollsim.medium import (Contender, EventKind, PhyParams, airtime, contention_round,
                            control_airtime, data_airtime, exchange_end, polled_exchange,
                            unanswered_poll)

PHY = PhyParams()


def data(nbytes=1000, src=1):
    return Frame(FrameKind.DATA, src, 0, session=src, payload_bytes=nbytes)


def poll():
    return Frame(FrameKind.POLL, 0, 1, session=1, payload_bytes=20)


def nts():
    return Frame(FrameKind.NTS, 1, 0, payload_bytes=20)


def test_airtimes():
    assert data_airtime(1000, PHY) == 4328
    assert control_airtime(20, PHY) == 272
    assert airtime(data(0), PHY) == 192 + 136
    assert control_airtime(0, PHY) == 192


def test_defaults_valid():
    assert PHY.errors() == []
    assert PhyParams(cw_min=30).errors()
    assert PhyParams(bit_rate=0).errors()


def test_polled_exchange_data():
    ev = polled_exchange(poll(), data(), PHY, 0)
    assert exchange_end(ev) == 4610
    kinds = [e.kind for e in ev]
    assert kinds == [EventKind.TX_START, EventKind.TX_END, EventKind.IDLE_GAP,
                     EventKind.TX_START, EventKind.TX_END]
    assert ev[2].t == 272 and ev[2].dur == 10


def test_polled_exchange_nts_and_shift():
    assert exchange_end(polled_exchange(poll(), nts(), PHY, 0)) == 554
    assert exchange_end(polled_exchange(poll(), nts(), PHY, 1000)) == 1554


def test_burst_adds_sifs_per_frame():
    ev = polled_exchange(poll(), data(), PHY, 0, burst=(data(),))
    assert exchange_end(ev) == 4610 + 10 + 4328


def test_unanswered():
    assert exchange_end(unanswered_poll(poll(), PHY, 0)) == 272 + PHY.poll_timeout


class Stub:
    def __init__(self, seq):
        self.seq = list(seq)

    def integers(self, lo, hi):
        v = self.seq.pop(0)
        assert lo <= v < hi
        return v


def test_tie_collides_then_resolves():
    a = Contender(1, data(src=1), 31)
    b = Contender(2, data(src=2), 31)
    r = contention_round([a, b], PHY, Stub([5, 5, 3, 9]), 0)
    assert r.collisions == 1
    col = [e for e in r.events if e.kind is EventKind.COLLISION]
    assert len(col) == 1 and col[0].dur == 4328
    assert r.winner is a
    assert a.cw == 31 and b.cw == 63
    assert r.end == (50 + 100) + 4328 + (50 + 60) + 4328


def test_single_contender():
    c = Contender(1, data(), 31)
    r = contention_round([c], PHY, Stub([7]), 100)
    assert r.winner is c and r.collisions == 0
    assert r.end == 100 + 50 + 140 + 4328


def test_cw_capped():
    a = Contender(1, data(src=1), 1023)
    b = Contender(2, data(src=2), 1023)
    contention_round([a, b], PHY, Stub([0, 0, 0, 1]), 0)
    assert b.cw == 1023


def test_empty_round():
    with pytest.raises(ValueError):
        contention_round([], PHY, None, 0)


def test_seeded_reproducible():
    def once():
        cs = [Contender(i, data(src=i), 31, np.random.default_rng(i)) for i in range(4)]
        return [contention_round(cs, PHY, None, 0).end for _ in range(20)]
    assert once() == once()
