"""Frame model, packet types and the session classifier."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Optional


class SimError(Exception):
    """Base class for simulator errors."""


class UnknownSession(SimError, KeyError):
    pass


class NotMaster(SimError):
    pass


class NotPolled(SimError):
    pass


class Role(enum.Enum):
    MASTER = "master"
    REGULAR = "regular"
    MONITOR = "monitor"


class FrameKind(enum.Enum):
    DATA = "data"
    POLL = "poll"
    NTS = "nts"


@dataclass(frozen=True, order=True)
class TrafficClass:
    """Priority class; lower rank is served first."""

    rank: int
    name: str = field(compare=False)

    def __str__(self):
        return self.name


REALTIME = TrafficClass(0, "realtime")
NONREALTIME = TrafficClass(1, "nonrealtime")
DEFAULT_CLASSES = (REALTIME, NONREALTIME)


@dataclass(frozen=True)
class StationId:
    id: int
    role: Role = Role.REGULAR


@dataclass(frozen=True)
class ClassifierRule:
    session: int
    cls: TrafficClass


@dataclass(slots=True, eq=False)
class Frame:
    kind: FrameKind
    src: int
    dst: int
    session: Optional[int] = None
    cls: Optional[TrafficClass] = None
    payload_bytes: int = 0
    seq: int = 0
    created_at: int = 0
    tx_start: Optional[int] = None
    tx_end: Optional[int] = None
    # creation order across the whole run; FIFO checks compare these
    uid: int = -1
    lost: bool = False

    @property
    def is_control(self) -> bool:
        return self.kind is not FrameKind.DATA

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "src": self.src,
            "dst": self.dst,
            "session": self.session,
            "class": None if self.cls is None else self.cls.name,
            "bytes": self.payload_bytes,
            "seq": self.seq,
            "uid": self.uid,
            "created": self.created_at,
            "lost": self.lost,
        }


def rule_table(rules) -> dict[int, TrafficClass]:
    table: dict[int, TrafficClass] = {}
    for r in rules:
        if r.session in table:
            raise ValueError(f"duplicate classifier rule for session {r.session}")
        table[r.session] = r.cls
    return table


def classify(rules: Mapping[int, TrafficClass], frame: Frame) -> TrafficClass:
    """Look up the class bound to ``frame.session`` and stamp it on the frame."""
    if frame.kind is not FrameKind.DATA:
        raise ValueError("only data frames are classified")
    try:
        cls = rules[frame.session]
    except KeyError:
        raise UnknownSession(frame.session) from None
    frame.cls = cls
    return cls


class ControlFactory:
    """Builds Poll and Nts frames, keeping per-station control counters."""

    def __init__(self, master: StationId, control_bytes: int = 20):
        self.master = master
        self.control_bytes = control_bytes
        self._poll_seq = 0
        self._nts_seq: dict[int, int] = {}

    def make_poll(self, caller: StationId, target: int, session: int, now: int) -> Frame:
        if caller.role is not Role.MASTER:
            raise NotMaster(f"station {caller.id} is not the master")
        f = Frame(FrameKind.POLL, caller.id, target, session=session,
                  payload_bytes=self.control_bytes, seq=self._poll_seq, created_at=now)
        self._poll_seq += 1
        return f

    def make_nts(self, station: int, poll: Frame, now: int) -> Frame:
        if poll.kind is not FrameKind.POLL or poll.dst != station:
            raise NotPolled(f"station {station} was not polled by this frame")
        seq = self._nts_seq.get(station, 0)
        self._nts_seq[station] = seq + 1
        return Frame(FrameKind.NTS, station, poll.src, session=poll.session,
                     payload_bytes=self.control_bytes, seq=seq, created_at=now)


def make_poll(master: StationId, target: int, session: int, now: int,
              control_bytes: int = 20, seq: int = 0) -> Frame:
    """Stand-alone poll constructor; the engine uses ControlFactory for counters."""
    if master.role is not Role.MASTER:
        raise NotMaster(f"station {master.id} is not the master")
    return Frame(FrameKind.POLL, master.id, target, session=session,
                 payload_bytes=control_bytes, seq=seq, created_at=now)


def make_nts(station: int, poll: Frame, now: int, control_bytes: int = 20,
             seq: int = 0) -> Frame:
    if poll.kind is not FrameKind.POLL or poll.dst != station:
        raise NotPolled(f"station {station} was not polled by this frame")
    return Frame(FrameKind.NTS, station, poll.src, session=poll.session,
                 payload_bytes=control_bytes, seq=seq, created_at=now)
