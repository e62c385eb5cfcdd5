"""Run trace: medium events, polls, deliveries, queue samples, cycle snapshots.

On disk a trace is JSON lines: a header echoing the scenario and seed, then one
record per line tagged by ``rec``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .frames import Frame, FrameKind, TrafficClass
from .medium import EventKind, MediumEvent
from .scenario import ScenarioConfig, from_dict

FORMAT = 1


@dataclass
class Delivery:
    t: int
    session: int
    seq: int
    uid: int
    bytes: int
    created: int
    tx_start: int


@dataclass
class Trace:
    scenario: ScenarioConfig
    events: list = field(default_factory=list)
    polls: list = field(default_factory=list)
    deliveries: list = field(default_factory=list)
    drops: list = field(default_factory=list)
    queue_samples: list = field(default_factory=list)
    cycles: list = field(default_factory=list)
    cycle_us: Optional[int] = None

    @property
    def seed(self) -> int:
        return self.scenario.seed

    @property
    def mode(self) -> str:
        return self.scenario.mode

    @property
    def duration_us(self) -> int:
        return self.scenario.duration_us

    @property
    def ftp_count(self) -> int:
        return sum(1 for s in self.scenario.sessions if s.kind == "bulk")

    def arrivals(self, session: int) -> list:
        return [d.t for d in self.deliveries if d.session == session]

    def session_ids(self) -> list:
        return [s.id for s in self.scenario.sessions]

    # serialization

    def lines(self):
        yield _dump({"rec": "header", "format": FORMAT, "seed": self.seed,
                     "cycle_us": self.cycle_us, "scenario": self.scenario.to_dict()})
        for e in self.events:
            yield _dump({"rec": "event", "t": e.t, "kind": e.kind.value, "dur": e.dur,
                         "frames": [f.to_dict() for f in e.frames]})
        for p in self.polls:
            yield _dump({"rec": "poll", **p})
        for d in self.deliveries:
            yield _dump({"rec": "delivery", **d.__dict__})
        for d in self.drops:
            yield _dump({"rec": "drop", **d})
        for q in self.queue_samples:
            yield _dump({"rec": "queue", **q})
        for c in self.cycles:
            yield _dump({"rec": "cycle", **c})

    def dumps(self) -> str:
        return "".join(line + "\n" for line in self.lines())

    def save(self, path):
        with open(path, "w") as fh:
            for line in self.lines():
                fh.write(line + "\n")


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _frame(d: dict, classes: dict) -> Frame:
    return Frame(FrameKind(d["kind"]), d["src"], d["dst"], session=d["session"],
                 cls=None if d["class"] is None else classes[d["class"]],
                 payload_bytes=d["bytes"], seq=d["seq"], created_at=d["created"],
                 uid=d["uid"], lost=d["lost"])


def parse(text_lines) -> Trace:
    it = iter(text_lines)
    head = json.loads(next(it))
    if head.get("rec") != "header" or head.get("format") != FORMAT:
        raise ValueError("not a trace file")
    cfg = from_dict(head["scenario"])
    classes = {c.name: c for c in cfg.classes}
    tr = Trace(cfg, cycle_us=head.get("cycle_us"))
    # frames shared between events (tx_start/tx_end pairs) are rebuilt once
    frames: dict = {}
    for line in it:
        if not line.strip():
            continue
        r = json.loads(line)
        rec = r.pop("rec")
        if rec == "event":
            fs = []
            for fd in r["frames"]:
                key = (fd["kind"], fd["src"], fd["uid"], fd["seq"])
                f = frames.get(key)
                if f is None:
                    f = frames[key] = _frame(fd, classes)
                fs.append(f)
            kind = EventKind(r["kind"])
            ev = MediumEvent(r["t"], kind, tuple(fs), r["dur"])
            if kind is EventKind.TX_START:
                for f in fs:
                    f.tx_start = ev.t
            elif kind is EventKind.TX_END:
                for f in fs:
                    f.tx_end = ev.t
            tr.events.append(ev)
        elif rec == "poll":
            tr.polls.append(r)
        elif rec == "delivery":
            tr.deliveries.append(Delivery(**r))
        elif rec == "drop":
            tr.drops.append(r)
        elif rec == "queue":
            tr.queue_samples.append(r)
        elif rec == "cycle":
            tr.cycles.append(r)
        else:
            raise ValueError(f"unknown record {rec!r}")
    return tr


def load(path) -> Trace:
    with open(path) as fh:
        return parse(fh)


def loads(text: str) -> Trace:
    return parse(text.splitlines())


def class_index(cfg: ScenarioConfig) -> dict[str, TrafficClass]:
    return {c.name: c for c in cfg.classes}


def save_all(traces, outdir) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for tr in traces:
        p = out / f"{tr.mode}_ftp{tr.ftp_count}.jsonl"
        tr.save(p)
        paths.append(p)
    return paths
