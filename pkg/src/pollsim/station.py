"""Station-side pipeline: per-class FIFO queues, poll-driven scheduler, demultiplexer."""

from __future__ import annotations

import enum
from collections import deque
from typing import Callable, Iterable, Mapping, Optional

from .frames import (Frame, FrameKind, NotPolled, Role, StationId, TrafficClass,
                     make_nts)


class Enqueue(enum.Enum):
    ENQUEUED = "enqueued"
    DROPPED = "dropped"


class Route(enum.Enum):
    TO_SCHEDULER = "scheduler"
    TO_POLL_MANAGER = "poll_manager"
    TO_LOCAL_SINK = "local_sink"
    IGNORE = "ignore"


class QueueSet:
    """One bounded FIFO per traffic class, with per-class counters."""

    def __init__(self, classes: Iterable[TrafficClass], capacity: int = 50):
        if capacity <= 0:
            raise ValueError("queue capacity must be positive")
        self.capacity = capacity
        self.classes = tuple(sorted(classes))
        self.queues: dict[TrafficClass, deque] = {c: deque() for c in self.classes}
        self.enqueued = {c: 0 for c in self.classes}
        self.dequeued = {c: 0 for c in self.classes}
        self.dropped = {c: 0 for c in self.classes}

    def __len__(self):
        return sum(len(q) for q in self.queues.values())

    def depth(self, cls: TrafficClass) -> int:
        return len(self.queues[cls])

    def count_session(self, cls: TrafficClass, session: int) -> int:
        return sum(1 for f in self.queues[cls] if f.session == session)

    def room(self, cls: TrafficClass) -> int:
        return self.capacity - len(self.queues[cls])

    def enqueue(self, frame: Frame) -> Enqueue:
        if frame.kind is not FrameKind.DATA:
            raise ValueError("only data frames are queued")
        q = self.queues.get(frame.cls)
        if q is None:
            raise ValueError(f"class {frame.cls} has no queue here")
        self.enqueued[frame.cls] += 1
        if len(q) >= self.capacity:
            self.dropped[frame.cls] += 1
            return Enqueue.DROPPED
        q.append(frame)
        return Enqueue.ENQUEUED

    def dequeue(self, cls: TrafficClass) -> Optional[Frame]:
        q = self.queues[cls]
        if not q:
            return None
        self.dequeued[cls] += 1
        return q.popleft()

    def head(self, cls: TrafficClass) -> Optional[Frame]:
        q = self.queues[cls]
        return q[0] if q else None

    def conserved(self) -> bool:
        return all(self.enqueued[c] == self.dequeued[c] + self.dropped[c] + len(self.queues[c])
                   for c in self.classes)


def enqueue(qs: QueueSet, frame: Frame) -> Enqueue:
    return qs.enqueue(frame)


def on_poll(qs: QueueSet, poll: Frame, station: StationId, now: int,
            rules: Mapping[int, TrafficClass],
            nts: Optional[Callable[[int, Frame, int], Frame]] = None) -> Frame:
    """Answer a poll with the head frame of the polled session's class queue, else Nts.

    ``nts`` builds the Nts reply; it defaults to a counter-less ``make_nts``.
    """
    if poll.kind is not FrameKind.POLL or poll.dst != station.id:
        raise NotPolled(f"station {station.id} was not polled by this frame")
    cls = rules[poll.session]
    frame = qs.dequeue(cls)
    if frame is not None:
        return frame
    return (nts or make_nts)(station.id, poll, now)


def demux(station: StationId, frame: Frame) -> frozenset[Route]:
    """Route an inbound frame heard by ``station``."""
    if station.role is Role.MONITOR:
        return frozenset({Route.IGNORE})
    if frame.kind is FrameKind.POLL:
        if frame.dst == station.id:
            return frozenset({Route.TO_SCHEDULER})
        return frozenset({Route.IGNORE})
    routes = set()
    # the master overhears every data/nts frame to track medium state
    if station.role is Role.MASTER:
        routes.add(Route.TO_POLL_MANAGER)
    if frame.kind is FrameKind.DATA and frame.dst == station.id:
        routes.add(Route.TO_LOCAL_SINK)
    return frozenset(routes or {Route.IGNORE})
