"""Deterministic discrete-event loop for polled and contention runs."""

from __future__ import annotations

import heapq
import math
from concurrent.futures import ThreadPoolExecutor
from itertools import count
from typing import Iterable, Optional, Sequence

import numpy as np

from .frames import (ClassifierRule, ControlFactory, Frame, FrameKind, Role, SimError, classify,
                     rule_table)
from .medium import (Contender, contention_round, control_airtime, data_airtime,
                     exchange_end, polled_exchange, unanswered_poll)
from .pollmgr import (CYCLE_END, QosRequirement, Response, build_poll_list, enforce_floor)
from .scenario import CONTENTION, POLLED, ConfigInvalid, ScenarioConfig, SessionSpec, validate
from .station import Enqueue, QueueSet, Route, demux, on_poll
from .trace import Delivery, Trace
from .traffic import BulkSource, VideoSource, bulk_refill, cbr_emissions

# same-time ordering: medium, then sources, then management
MEDIUM, SOURCE, MANAGEMENT = 0, 1, 2

_STREAM_SESSION, _STREAM_LOSS = 1, 2


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for one entity; adding entities never shifts others."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def derived_seed(base: int, n: int) -> int:
    return int(np.random.SeedSequence([base, n]).generate_state(1, dtype=np.uint64)[0])


def us(seconds: float) -> int:
    return round(seconds * 1_000_000)


class Engine:
    def __init__(self, cfg: ScenarioConfig):
        errs = validate(cfg)
        if errs:
            raise ConfigInvalid(errs)
        self.cfg = cfg
        self.phy = cfg.phy
        self.end = cfg.duration_us
        self.now = 0
        self._heap: list = []
        self._tick = count()
        self._uid = count()
        self.stopped = False

        self.rules = rule_table(_rules(cfg))
        self.specs = {s.id: s for s in cfg.sessions}
        self.stations = {s.id: s for s in cfg.stations}
        self.videos = []
        self.bulks = []
        for s in cfg.sessions:
            stop = self.end if s.stop_s is None else min(us(s.stop_s), self.end)
            if s.kind == "video":
                self.videos.append(VideoSource(s.id, s.src, s.dst, s.rate_kbps, s.size,
                                               us(s.start_s), stop))
            else:
                self.bulks.append(BulkSource(s.id, s.src, s.dst, s.size, us(s.start_s),
                                             stop, s.backlog))
        self.loss_rng = substream(cfg.seed, _STREAM_LOSS, 0)
        self.trace = Trace(cfg)

    # event queue

    def at(self, t: int, prio: int, fn, *args):
        heapq.heappush(self._heap, (t, prio, next(self._tick), fn, args))

    def stamp(self, f: Frame):
        f.uid = next(self._uid)

    def loop(self):
        while self._heap and not self.stopped:
            t, _, _, fn, args = heapq.heappop(self._heap)
            if t >= self.end:
                break
            self.now = t
            fn(t, *args)
        self.sample(self.end)
        return self.trace

    # shared plumbing

    def lost(self) -> bool:
        p = self.cfg.frame_error_rate
        return p > 0 and bool(self.loss_rng.random() < p)

    def queue_for(self, session: int) -> QueueSet:
        raise NotImplementedError

    def queues(self):
        raise NotImplementedError

    def emit_video(self, t: int, item, it):
        frame = item[1]
        classify(self.rules, frame)
        self.stamp(frame)
        if self.queue_for(frame.session).enqueue(frame) is Enqueue.DROPPED:
            self.trace.drops.append({"t": t, "session": frame.session, "seq": frame.seq})
        self.on_arrival(t)
        nxt = next(it, None)
        if nxt is not None:
            self.at(nxt[0], SOURCE, self.emit_video, nxt, it)

    def on_arrival(self, t: int):
        pass

    def deliver(self, frame: Frame):
        if frame.lost:
            return
        if Route.TO_LOCAL_SINK not in demux(self.stations[frame.dst], frame):
            return
        self.trace.deliveries.append(Delivery(frame.tx_end, frame.session, frame.seq, frame.uid,
                                              frame.payload_bytes, frame.created_at,
                                              frame.tx_start))

    def sample(self, t: int):
        for (station, session), qs in self.queues():
            for c in qs.classes:
                self.trace.queue_samples.append({
                    "t": t, "station": station, "session": session, "class": c.name,
                    "depth": qs.depth(c), "enqueued": qs.enqueued[c],
                    "dequeued": qs.dequeued[c], "dropped": qs.dropped[c]})

    def _sampler(self, t: int):
        self.sample(t)
        self.at(t + round(self.cfg.sample_ms * 1000), MANAGEMENT, self._sampler)

    def start(self):
        for v in self.videos:
            it = cbr_emissions(v)
            first = next(it, None)
            if first is not None:
                self.at(first[0], SOURCE, self.emit_video, first, it)
        self.at(round(self.cfg.sample_ms * 1000), MANAGEMENT, self._sampler)


def _rules(cfg: ScenarioConfig):
    return [ClassifierRule(s.id, cfg.class_named(s.cls)) for s in cfg.sessions]


class PolledEngine(Engine):
    def __init__(self, cfg: ScenarioConfig):
        super().__init__(cfg)
        self.master = cfg.master
        self.factory = ControlFactory(self.master, cfg.control_bytes)
        self.qsets = {s.id: QueueSet(cfg.classes, cfg.queue_capacity)
                      for s in cfg.stations if s.role is Role.REGULAR}
        reqs = [QosRequirement(s.id, s.src, self.rules[s.id], s.reserved, s.floor_share)
                for s in cfg.sessions]
        self.schedule = build_poll_list(reqs, cfg.idle_threshold, cfg.idle_period)
        self.bulk_at: dict = {}
        for b in self.bulks:
            self.bulk_at.setdefault(b.src, []).append(b)
        self.worst = {s.id: self._worst_exchange(s) for s in cfg.sessions}
        self.cycle_us = self._cycle_length()
        self.trace.cycle_us = self.cycle_us
        self.budgets = self.schedule.budgets(self.cycle_us)
        self.cycle_end = 0
        self.cycle_polls = 0

    def _worst_exchange(self, s: SessionSpec) -> int:
        # the poll may be answered by any same-class frame queued at that station
        cls = self.rules[s.id]
        biggest = max(o.size for o in self.cfg.sessions
                      if o.src == s.src and self.rules[o.id] == cls)
        poll = control_airtime(self.cfg.control_bytes, self.phy)
        data = data_airtime(biggest, self.phy)
        return poll + self.cfg.poll_budget * (self.phy.sifs + data)

    def _cycle_length(self) -> int:
        if self.cfg.cycle_ms is not None:
            return round(self.cfg.cycle_ms * 1000)
        top = self.cfg.classes[0]
        periods = [math.ceil(s.size * 8 * 1000 / s.reserved) for s in self.cfg.sessions
                   if self.rules[s.id] == top and s.reserved]
        if periods:
            return min(periods)
        return sum(self.worst.values())

    def queue_for(self, session: int) -> QueueSet:
        return self.qsets[self.specs[session].src]

    def queues(self):
        for sid, qs in self.qsets.items():
            yield (sid, None), qs

    def refill(self, station: int, t: int):
        for b in self.bulk_at.get(station, ()):
            bulk_refill(b, self.qsets[station], t, self.rules, stamp=self.stamp)

    def run(self) -> Trace:
        self.start()
        self.at(0, MANAGEMENT, self.step)
        return self.loop()

    def step(self, t: int):
        sched = self.schedule
        if not sched.in_cycle:
            sched.begin_cycle()
            self.cycle_end = t + self.cycle_us
            self.cycle_polls = 0
        while True:
            cls = enforce_floor(sched, self.budgets)
            if cls is None:
                assert sched.next_poll() is CYCLE_END
                snap = dict(sched.last_cycle)
                snap["t"] = t
                self.trace.cycles.append(snap)
                self.at(max(t, self.cycle_end), MANAGEMENT, self.step)
                return
            entry = sched.next_poll(cls)
            worst = self.worst[entry.session]
            if t + worst > self.end:
                sched.defer(entry)
                continue
            if not entry.idle and self.cycle_polls and t + worst > self.cycle_end:
                sched.defer(entry)
                continue
            end = self.exchange(t, entry)
            self.cycle_polls += 1
            self.at(end, MANAGEMENT, self.step)
            return

    def exchange(self, t: int, entry) -> int:
        station = self.stations[entry.station]
        self.refill(entry.station, t)
        qs = self.qsets[entry.station]
        cls = self.rules[entry.session]
        backlog = qs.depth(cls)
        poll = self.factory.make_poll(self.master, entry.station, entry.session, t)
        self.stamp(poll)
        if self.lost():
            poll.lost = True
            events = unanswered_poll(poll, self.phy, t)
            response, kind = Response.TIMEOUT, "timeout"
            sent = []
        else:
            first = on_poll(qs, poll, station, t, self.rules, self.factory.make_nts)
            self.stamp(first)
            sent = [first]
            if first.kind is FrameKind.DATA:
                for _ in range(self.cfg.poll_budget - 1):
                    more = qs.dequeue(cls)
                    if more is None:
                        break
                    sent.append(more)
            events = polled_exchange(poll, first, self.phy, t, sent[1:])
            for f in sent:
                f.lost = self.lost()
            if first.lost:
                response, kind = Response.TIMEOUT, "timeout"
            elif first.kind is FrameKind.DATA:
                response, kind = Response.GOT_DATA, "data"
            else:
                response, kind = Response.GOT_NTS, "nts"
        end = exchange_end(events)
        self.trace.events.extend(events)
        for f in sent:
            if f.kind is FrameKind.DATA:
                self.deliver(f)
        self.schedule.record_response(entry.session, response)
        self.schedule.record_usage(cls, end - t)
        self.trace.polls.append({
            "t": t, "cycle": self.schedule.cycle, "session": entry.session,
            "station": entry.station, "class": cls.name, "backlog": backlog,
            "response": kind, "frames": sum(f.kind is FrameKind.DATA for f in sent),
            "dur": end - t})
        return end


class ContentionEngine(Engine):
    def __init__(self, cfg: ScenarioConfig):
        super().__init__(cfg)
        self.sq = {s.id: QueueSet([self.rules[s.id]], cfg.queue_capacity)
                   for s in cfg.sessions}
        self.contenders = {s.id: Contender(s.id, None, cfg.phy.cw_min,
                                           substream(cfg.seed, _STREAM_SESSION, s.id))
                           for s in cfg.sessions}
        self.busy = False

    def queue_for(self, session: int) -> QueueSet:
        return self.sq[session]

    def queues(self):
        for sid, qs in self.sq.items():
            yield (self.specs[sid].src, sid), qs

    def run(self) -> Trace:
        self.start()
        for b in self.bulks:
            if b.start < b.stop:
                self.at(b.start, SOURCE, self.bulk_start)
        return self.loop()

    def bulk_start(self, t: int):
        self.on_arrival(t)

    def on_arrival(self, t: int):
        if not self.busy:
            self.busy = True
            self.at(t, MEDIUM, self.round)

    def refill(self, t: int):
        for b in self.bulks:
            bulk_refill(b, self.sq[b.session], t, self.rules, stamp=self.stamp)

    def round(self, t: int):
        self.refill(t)
        ready = []
        for sid, qs in self.sq.items():
            head = qs.head(self.rules[sid])
            if head is not None:
                c = self.contenders[sid]
                c.frame = head
                ready.append(c)
        if not ready:
            self.busy = False
            return
        rnd = contention_round(ready, self.phy, None, t)
        if rnd.end > self.end:
            self.stopped = True
            return
        win = rnd.winner
        frame = self.sq[win.key].dequeue(self.rules[win.key])
        frame.lost = self.lost()
        self.trace.events.extend(rnd.events)
        self.deliver(frame)
        self.at(rnd.end, MEDIUM, self.round)


def run(cfg: ScenarioConfig) -> Trace:
    """Simulate ``cfg`` for exactly its duration and return the trace."""
    if cfg.mode == POLLED:
        return PolledEngine(cfg).run()
    if cfg.mode == CONTENTION:
        return ContentionEngine(cfg).run()
    raise ConfigInvalid([f"unknown mode {cfg.mode!r}"])


def with_ftp(base: ScenarioConfig, n: int, mode: Optional[str] = None) -> ScenarioConfig:
    """Copy of ``base`` plus ``n`` bulk sessions placed round-robin on regular stations."""
    regs = [s.id for s in base.regulars]
    if n and not regs:
        raise ConfigInvalid(["no regular stations to host bulk sessions"])
    sessions = list(base.sessions)
    next_id = max((s.id for s in sessions), default=0) + 1
    master = base.master
    ftp = base.ftp
    for k in range(n):
        src = regs[k % len(regs)]
        if len(regs) > 1:
            dst = regs[(k + 1) % len(regs)]
        elif master is not None:
            dst = master.id
        else:
            raise ConfigInvalid(["bulk session needs a distinct destination station"])
        sessions.append(SessionSpec(next_id + k, "bulk", src, dst, cls=ftp.cls,
                                    packet_bytes=ftp.packet_bytes, backlog=ftp.backlog,
                                    floor_share=ftp.floor_share))
    return base.replace(sessions=sessions, mode=mode or base.mode,
                        seed=derived_seed(base.seed, n))


def sweep(base: ScenarioConfig, ftp_counts: Iterable[int],
          modes: Optional[Sequence[str]] = None, workers: int = 1) -> list[Trace]:
    """One run per (mode, ftp count); seeds depend only on (base seed, count)."""
    counts = list(ftp_counts)
    if any(n < 0 for n in counts):
        raise ValueError("ftp counts must be non-negative")
    cfgs = [with_ftp(base, n, m) for m in (modes or [base.mode]) for n in counts]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(run, cfgs))
    return [run(c) for c in cfgs]


__all__ = ["run", "sweep", "with_ftp", "derived_seed", "substream", "SimError"]
