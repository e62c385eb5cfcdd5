"""Traffic sources (CBR video, greedy bulk) and receiver-side sink records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Optional

from .frames import Frame, FrameKind, SimError, TrafficClass, classify
from .station import Enqueue, QueueSet


class InvalidRate(SimError, ValueError):
    pass


class WrongDestination(SimError):
    pass


@dataclass
class VideoSource:
    session: int
    src: int
    dst: int
    rate_kbps: float
    packet_bytes: int = 1000
    start: int = 0
    stop: int = 0

    def period(self) -> Fraction:
        """Exact emission period in microseconds."""
        if self.rate_kbps <= 0:
            raise InvalidRate(f"session {self.session}: rate must be positive")
        # bits / (kbit/s) = ms; times 1000 for µs
        return Fraction(self.packet_bytes * 8 * 1000) / Fraction(self.rate_kbps)


@dataclass
class BulkSource:
    session: int
    src: int
    dst: int
    packet_bytes: int = 1500
    start: int = 0
    stop: int = 0
    backlog: int = 10
    next_seq: int = 0

    def active(self, now: int) -> bool:
        return self.start <= now < self.stop


def cbr_emissions(src: VideoSource) -> Iterator[tuple[int, Frame]]:
    """Yield (time µs, frame) at start, start+T, ... strictly before stop.

    Times are exact rationals rounded up per event, so rounding never accumulates.
    """
    period = src.period()
    k = 0
    while True:
        t = math.ceil(src.start + k * period)
        if t >= src.stop:
            return
        yield t, Frame(FrameKind.DATA, src.src, src.dst, session=src.session,
                       payload_bytes=src.packet_bytes, seq=k, created_at=t)
        k += 1


def bulk_refill(src: BulkSource, qs: QueueSet, now: int, rules: Mapping[int, TrafficClass],
                target: Optional[int] = None,
                stamp: Optional[Callable[[Frame], None]] = None) -> int:
    """Top the session's share of its class queue up to ``target`` frames.

    Only adds what fits, so refills never register as drops. Returns frames added.
    """
    if not src.active(now):
        return 0
    target = src.backlog if target is None else target
    cls = rules[src.session]
    want = target - qs.count_session(cls, src.session)
    added = 0
    while added < want and qs.room(cls) > 0:
        f = Frame(FrameKind.DATA, src.src, src.dst, session=src.session,
                  payload_bytes=src.packet_bytes, seq=src.next_seq, created_at=now)
        classify(rules, f)
        src.next_seq += 1
        if stamp is not None:
            stamp(f)
        if qs.enqueue(f) is not Enqueue.ENQUEUED:  # pragma: no cover - room checked
            raise RuntimeError("refill overflowed its queue")
        added += 1
    return added


@dataclass
class SinkRecord:
    session: int
    station: int
    arrivals: list = field(default_factory=list)
    sizes: list = field(default_factory=list)

    @property
    def bits(self) -> int:
        return 8 * sum(self.sizes)


def deliver(sink: SinkRecord, frame: Frame, now: int):
    if frame.kind is not FrameKind.DATA or frame.dst != sink.station:
        raise WrongDestination(f"frame for station {frame.dst} reached sink at {sink.station}")
    if sink.arrivals and now < sink.arrivals[-1]:
        raise ValueError("sink arrivals must be non-decreasing")
    sink.arrivals.append(now)
    sink.sizes.append(frame.payload_bytes)
