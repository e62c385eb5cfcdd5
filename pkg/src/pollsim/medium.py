"""Shared half-duplex channel: airtime, polled exchanges and the contention baseline."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .frames import Frame, FrameKind


@dataclass(frozen=True)
class PhyParams:
    bit_rate: int = 2_000_000
    phy_overhead: int = 192
    sifs: int = 10
    difs: int = 50
    slot: int = 20
    cw_min: int = 31
    cw_max: int = 1023
    mac_header_bytes: int = 34

    def errors(self) -> list[str]:
        errs = [f"phy.{k} must be positive" for k, v in self.__dict__.items() if v <= 0]
        if self.cw_min > self.cw_max:
            errs.append("phy.cw_min exceeds phy.cw_max")
        for k in ("cw_min", "cw_max"):
            v = getattr(self, k)
            if v > 0 and (v + 1) & v:
                errs.append(f"phy.{k} must be 2^k - 1")
        return errs

    @property
    def poll_timeout(self) -> int:
        return self.sifs + 2 * self.slot


class EventKind(enum.Enum):
    TX_START = "tx_start"
    TX_END = "tx_end"
    COLLISION = "collision"
    IDLE_GAP = "idle_gap"


@dataclass(slots=True, frozen=True)
class MediumEvent:
    t: int
    kind: EventKind
    frames: tuple = ()
    dur: int = 0


def tx_bits_us(nbytes: int, bit_rate: int) -> int:
    return -(-8 * nbytes * 1_000_000 // bit_rate)


def airtime(frame: Frame, phy: PhyParams) -> int:
    """On-air duration in whole microseconds (rounded up)."""
    nbytes = frame.payload_bytes
    if frame.kind is FrameKind.DATA:
        nbytes += phy.mac_header_bytes
    return phy.phy_overhead + tx_bits_us(nbytes, phy.bit_rate)


def data_airtime(payload_bytes: int, phy: PhyParams) -> int:
    return phy.phy_overhead + tx_bits_us(payload_bytes + phy.mac_header_bytes, phy.bit_rate)


def control_airtime(control_bytes: int, phy: PhyParams) -> int:
    return phy.phy_overhead + tx_bits_us(control_bytes, phy.bit_rate)


def _transmit(frame: Frame, t: int, phy: PhyParams, out: list) -> int:
    end = t + airtime(frame, phy)
    frame.tx_start, frame.tx_end = t, end
    out.append(MediumEvent(t, EventKind.TX_START, (frame,)))
    out.append(MediumEvent(end, EventKind.TX_END, (frame,)))
    return end


def polled_exchange(poll: Frame, response: Frame, phy: PhyParams, start: int,
                    burst: Sequence[Frame] = ()) -> list[MediumEvent]:
    """Poll, SIFS, response. Extra ``burst`` frames follow, each after another SIFS."""
    if poll.kind is not FrameKind.POLL:
        raise ValueError("exchange must open with a poll")
    events: list[MediumEvent] = []
    t = _transmit(poll, start, phy, events)
    for f in (response, *burst):
        events.append(MediumEvent(t, EventKind.IDLE_GAP, dur=phy.sifs))
        t = _transmit(f, t + phy.sifs, phy, events)
    return events


def unanswered_poll(poll: Frame, phy: PhyParams, start: int) -> list[MediumEvent]:
    """A poll that draws no response; the master waits out the timeout."""
    events: list[MediumEvent] = []
    t = _transmit(poll, start, phy, events)
    events.append(MediumEvent(t, EventKind.IDLE_GAP, dur=phy.poll_timeout))
    return events


def exchange_end(events: Sequence[MediumEvent]) -> int:
    last = events[-1]
    return last.t + last.dur


@dataclass(eq=False)
class Contender:
    key: int
    frame: Frame
    cw: int
    rng: Optional[np.random.Generator] = None


@dataclass
class Round:
    events: list
    winner: Contender
    end: int
    collisions: int = 0


def contention_round(contenders: Sequence[Contender], phy: PhyParams,
                     rng: Optional[np.random.Generator], start: int) -> Round:
    """Simplified DCF: draw backoffs, unique minimum transmits, ties collide and retry.

    Each contender draws from its own generator when it has one, else from ``rng``.
    Contention windows are updated in place.
    """
    if not contenders:
        raise ValueError("contention round needs at least one contender")
    events: list[MediumEvent] = []
    t = start
    collisions = 0
    while True:
        draws = [int((c.rng or rng).integers(0, c.cw + 1)) for c in contenders]
        low = min(draws)
        wait = phy.difs + low * phy.slot
        events.append(MediumEvent(t, EventKind.IDLE_GAP, dur=wait))
        t += wait
        tied = [c for c, d in zip(contenders, draws) if d == low]
        if len(tied) == 1:
            win = tied[0]
            end = _transmit(win.frame, t, phy, events)
            win.cw = phy.cw_min
            return Round(events, win, end, collisions)
        span = max(airtime(c.frame, phy) for c in tied)
        events.append(MediumEvent(t, EventKind.COLLISION, tuple(c.frame for c in tied), span))
        t += span
        collisions += 1
        for c in tied:
            c.cw = min(2 * c.cw + 1, phy.cw_max)
