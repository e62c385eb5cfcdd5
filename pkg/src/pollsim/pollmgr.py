"""Master-side poll manager: polling list, cycle traversal and the Active/Idle adjustment."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .frames import SimError, TrafficClass, UnknownSession


class InvalidQos(SimError, ValueError):
    pass


class State(enum.Enum):
    ACTIVE = "active"
    IDLE = "idle"


class Response(enum.Enum):
    GOT_DATA = "data"
    GOT_NTS = "nts"
    TIMEOUT = "timeout"


class _CycleEnd:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "CYCLE_END"

    def __bool__(self):
        return False


CYCLE_END = _CycleEnd()


@dataclass(frozen=True)
class QosRequirement:
    session: int
    station: int
    cls: TrafficClass
    reserved_kbps: Optional[float] = None
    floor_share: float = 0.0


@dataclass
class PollState:
    state: State = State.ACTIVE
    consecutive_nts: int = 0
    idle_skip: int = 0


@dataclass(eq=False)
class PollEntry:
    session: int
    station: int
    cls: TrafficClass
    poll: PollState = field(default_factory=PollState)
    polls: int = 0  # polls issued in the current cycle

    @property
    def idle(self) -> bool:
        return self.poll.state is State.IDLE


class PollSchedule:
    """Ordered polling list plus per-session poll state.

    ``idle_period`` (K) of 0 disables the Idle state: every session stays Active.
    """

    def __init__(self, entries: Sequence[PollEntry], floors: dict,
                 idle_threshold: int = 3, idle_period: int = 4):
        self.entries = list(entries)
        self.by_session = {e.session: e for e in self.entries}
        self.floors = dict(floors)
        self.idle_threshold = idle_threshold
        self.idle_period = idle_period
        self.cycle = 0
        self.classes = sorted({e.cls for e in self.entries})
        self._order = {c: [e for e in self.entries if e.cls == c] for c in self.classes}
        # the top class keeps declaration order; lower classes rotate across cycles
        self._rotating = set(self.classes[1:])
        self._offset = {c: 0 for c in self.classes}
        self._due: Optional[dict] = None
        self._deferred: dict = {}
        self._start_states: dict = {}
        self.consumed = {c: 0 for c in self.classes}
        self.last_cycle: Optional[dict] = None

    @property
    def in_cycle(self) -> bool:
        return self._due is not None

    def order(self, cls: TrafficClass) -> list:
        base = self._order[cls]
        k = self._offset[cls] % len(base) if base else 0
        return base[k:] + base[:k]

    def begin_cycle(self):
        K = self.idle_period
        self._due = {}
        self._deferred = {c: [] for c in self.classes}
        self._start_states = {e.session: e.poll.state for e in self.entries}
        self.consumed = {c: 0 for c in self.classes}
        for c in self.classes:
            due = deque()
            for e in self.order(c):
                e.polls = 0
                if e.idle:
                    if e.poll.idle_skip < K - 1:
                        e.poll.idle_skip += 1
                        continue
                    e.poll.idle_skip = 0
                due.append(e)
            self._due[c] = due

    def pending(self, cls: TrafficClass) -> bool:
        return bool(self._due and self._due[cls])

    def next_poll(self, cls: Optional[TrafficClass] = None):
        """Pop the next entry due this cycle (optionally restricted to ``cls``).

        Returns CYCLE_END once nothing is due anywhere, closing the cycle.
        """
        if self._due is None:
            self.begin_cycle()
        if cls is not None and self._due[cls]:
            e = self._due[cls].popleft()
            e.polls += 1
            return e
        if cls is None:
            for c in self.classes:
                if self._due[c]:
                    e = self._due[c].popleft()
                    e.polls += 1
                    return e
        if any(self._due.values()):
            return None  # requested class exhausted, others still due
        self._end_cycle()
        return CYCLE_END

    def defer(self, entry: PollEntry):
        """Undo the poll just handed out: the entry sits this cycle out."""
        entry.polls -= 1
        self._deferred[entry.cls].append(entry)

    def _end_cycle(self):
        self.last_cycle = {
            "cycle": self.cycle,
            "sessions": [
                {"session": e.session, "state": self._start_states[e.session].value,
                 "end_state": e.poll.state.value, "polls": e.polls}
                for e in self.entries
            ],
        }
        for c in self.classes:
            base = self._order[c]
            if not base:
                continue
            if self._deferred[c]:
                self._offset[c] = base.index(self._deferred[c][0])
            elif c in self._rotating:
                self._offset[c] = (self._offset[c] + 1) % len(base)
        self.cycle += 1
        self._due = None

    def record_response(self, session: int, response: Response):
        e = self.by_session.get(session)
        if e is None:
            raise UnknownSession(session)
        st = e.poll
        if response is Response.GOT_DATA:
            st.state = State.ACTIVE
            st.consecutive_nts = 0
            return
        st.consecutive_nts += 1
        if (self.idle_period > 0 and st.state is State.ACTIVE
                and st.consecutive_nts >= self.idle_threshold):
            st.state = State.IDLE
            st.idle_skip = 0

    def record_usage(self, cls: TrafficClass, us: int):
        self.consumed[cls] += us

    def budgets(self, cycle_us: int) -> dict:
        return {c: self.floors.get(c, 0.0) * cycle_us for c in self.classes}


def build_poll_list(requirements: Sequence[QosRequirement], idle_threshold: int = 3,
                    idle_period: int = 4) -> PollSchedule:
    if not requirements:
        raise InvalidQos("no sessions to poll")
    seen = set()
    floors: dict = {}
    for r in requirements:
        if r.session in seen:
            raise InvalidQos(f"session {r.session} declared twice")
        seen.add(r.session)
        if not 0.0 <= r.floor_share <= 1.0:
            raise InvalidQos(f"floor share {r.floor_share} outside [0, 1]")
        if r.cls.rank == 0 and not (r.reserved_kbps and r.reserved_kbps > 0):
            raise InvalidQos(f"real-time session {r.session} has no reserved rate")
        floors[r.cls] = max(floors.get(r.cls, 0.0), r.floor_share)
    if sum(floors.values()) > 1.0 + 1e-12:
        raise InvalidQos(f"floor shares sum to {sum(floors.values()):.3f} > 1")
    # stable sort keeps declaration order inside a class
    ordered = sorted(requirements, key=lambda r: r.cls)
    entries = [PollEntry(r.session, r.station, r.cls) for r in ordered]
    return PollSchedule(entries, floors, idle_threshold, idle_period)


def enforce_floor(schedule: PollSchedule, budgets: dict) -> Optional[TrafficClass]:
    """Pick the class to poll next.

    Classes still short of their floor budget this cycle go first (in priority
    order); after that plain priority order applies. None when nothing is due.
    """
    due = [c for c in schedule.classes if schedule.pending(c)]
    if not due:
        return None
    for c in due:
        if budgets.get(c, 0) > 0 and schedule.consumed[c] < budgets[c]:
            return c
    return due[0]
