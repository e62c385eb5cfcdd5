"""Scenario description: YAML loading, defaults, echo and validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import yaml

from .frames import DEFAULT_CLASSES, Role, SimError, StationId, TrafficClass
from .medium import PhyParams

POLLED = "polled"
CONTENTION = "contention"
MODES = (POLLED, CONTENTION)


class ConfigInvalid(SimError, ValueError):
    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class SessionSpec:
    id: int
    kind: str  # "video" | "bulk"
    src: int
    dst: int
    cls: str = "realtime"
    rate_kbps: Optional[float] = None
    packet_bytes: Optional[int] = None
    start_s: float = 0.0
    stop_s: Optional[float] = None
    reserved_kbps: Optional[float] = None
    floor_share: float = 0.0
    backlog: int = 10

    @property
    def size(self) -> int:
        if self.packet_bytes is not None:
            return self.packet_bytes
        return 1000 if self.kind == "video" else 1500

    @property
    def reserved(self) -> Optional[float]:
        return self.reserved_kbps if self.reserved_kbps is not None else self.rate_kbps


@dataclass
class FtpTemplate:
    """Shape of the bulk sessions a sweep adds."""

    packet_bytes: int = 1500
    backlog: int = 10
    cls: str = "nonrealtime"
    floor_share: float = 0.0


@dataclass
class ScenarioConfig:
    stations: list
    sessions: list
    mode: str = POLLED
    duration_s: float = 60.0
    seed: int = 0
    phy: PhyParams = field(default_factory=PhyParams)
    classes: tuple = DEFAULT_CLASSES
    queue_capacity: int = 50
    control_bytes: int = 20
    idle_threshold: int = 3
    idle_period: int = 4
    poll_budget: int = 1
    cycle_ms: Optional[float] = None
    sample_ms: float = 1000.0
    frame_error_rate: float = 0.0
    ftp: FtpTemplate = field(default_factory=FtpTemplate)

    @property
    def duration_us(self) -> int:
        return round(self.duration_s * 1_000_000)

    def class_named(self, name: str) -> TrafficClass:
        for c in self.classes:
            if c.name == name:
                return c
        raise KeyError(name)

    def station(self, sid: int) -> StationId:
        for s in self.stations:
            if s.id == sid:
                return s
        raise KeyError(sid)

    @property
    def master(self) -> Optional[StationId]:
        masters = [s for s in self.stations if s.role is Role.MASTER]
        return masters[0] if masters else None

    @property
    def regulars(self) -> list:
        return [s for s in self.stations if s.role is Role.REGULAR]

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "duration_s": self.duration_s,
            "seed": self.seed,
            "classes": [c.name for c in self.classes],
            "queue_capacity": self.queue_capacity,
            "control_bytes": self.control_bytes,
            "sample_ms": self.sample_ms,
            "frame_error_rate": self.frame_error_rate,
            "poll": {
                "idle_threshold": self.idle_threshold,
                "idle_period": self.idle_period,
                "budget": self.poll_budget,
                "cycle_ms": self.cycle_ms,
            },
            "phy": dataclasses.asdict(self.phy),
            "stations": [{"id": s.id, "role": s.role.value} for s in self.stations],
            "sessions": [_session_dict(s) for s in self.sessions],
            "ftp": {"packet_bytes": self.ftp.packet_bytes, "backlog": self.ftp.backlog,
                    "class": self.ftp.cls, "floor_share": self.ftp.floor_share},
        }


def _session_dict(s: SessionSpec) -> dict:
    d = {"id": s.id, "kind": s.kind, "class": s.cls, "src": s.src, "dst": s.dst}
    for k in ("rate_kbps", "packet_bytes", "stop_s", "reserved_kbps"):
        v = getattr(s, k)
        if v is not None:
            d[k] = v
    d["start_s"] = s.start_s
    d["floor_share"] = s.floor_share
    if s.kind == "bulk":
        d["backlog"] = s.backlog
    return d


_TOP_KEYS = {"mode", "duration_s", "seed", "classes", "queue_capacity", "control_bytes",
             "sample_ms", "frame_error_rate", "poll", "phy", "stations", "sessions", "ftp"}
_POLL_KEYS = {"idle_threshold": "idle_threshold", "idle_period": "idle_period",
              "budget": "poll_budget", "cycle_ms": "cycle_ms"}
_SESSION_KEYS = {"id", "kind", "class", "src", "dst", "rate_kbps", "packet_bytes", "start_s",
                 "stop_s", "reserved_kbps", "floor_share", "backlog"}
_FTP_KEYS = {"packet_bytes", "backlog", "class", "floor_share"}


def _unknown(d: dict, allowed, where: str, errors: list):
    for k in d:
        if k not in allowed:
            errors.append(f"unknown key {where}{k}")


def from_dict(d: dict) -> ScenarioConfig:
    """Build a config from parsed YAML. Structural problems raise ConfigInvalid."""
    if not isinstance(d, dict):
        raise ConfigInvalid(["scenario must be a mapping"])
    errors: list[str] = []
    _unknown(d, _TOP_KEYS, "", errors)
    kw: dict[str, Any] = {}
    for k in ("mode", "duration_s", "seed", "queue_capacity", "control_bytes", "sample_ms",
              "frame_error_rate"):
        if k in d:
            kw[k] = d[k]
    if "classes" in d:
        names = d["classes"]
        if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
            errors.append("classes must be a list of names")
        else:
            kw["classes"] = tuple(TrafficClass(i, n) for i, n in enumerate(names))
    poll = d.get("poll") or {}
    _unknown(poll, _POLL_KEYS, "poll.", errors)
    for k, attr in _POLL_KEYS.items():
        if k in poll:
            kw[attr] = poll[k]
    phy = d.get("phy") or {}
    phy_fields = {f.name for f in dataclasses.fields(PhyParams)}
    _unknown(phy, phy_fields, "phy.", errors)
    kw["phy"] = PhyParams(**{k: v for k, v in phy.items() if k in phy_fields})
    ftp = d.get("ftp") or {}
    _unknown(ftp, _FTP_KEYS, "ftp.", errors)
    kw["ftp"] = FtpTemplate(packet_bytes=ftp.get("packet_bytes", 1500),
                            backlog=ftp.get("backlog", 10),
                            cls=ftp.get("class", "nonrealtime"),
                            floor_share=ftp.get("floor_share", 0.0))
    stations = []
    for i, s in enumerate(d.get("stations") or []):
        _unknown(s, {"id", "role"}, f"stations[{i}].", errors)
        try:
            stations.append(StationId(int(s["id"]), Role(s.get("role", "regular"))))
        except (KeyError, ValueError, TypeError) as exc:
            errors.append(f"stations[{i}]: bad entry ({exc})")
    sessions = []
    for i, s in enumerate(d.get("sessions") or []):
        _unknown(s, _SESSION_KEYS, f"sessions[{i}].", errors)
        try:
            sessions.append(SessionSpec(
                id=int(s["id"]), kind=s["kind"], src=int(s["src"]), dst=int(s["dst"]),
                cls=s.get("class", "realtime" if s["kind"] == "video" else "nonrealtime"),
                rate_kbps=s.get("rate_kbps"), packet_bytes=s.get("packet_bytes"),
                start_s=s.get("start_s", 0.0), stop_s=s.get("stop_s"),
                reserved_kbps=s.get("reserved_kbps"), floor_share=s.get("floor_share", 0.0),
                backlog=s.get("backlog", 10)))
        except (KeyError, ValueError, TypeError) as exc:
            errors.append(f"sessions[{i}]: bad entry ({exc})")
    if errors:
        raise ConfigInvalid(errors)
    return ScenarioConfig(stations=stations, sessions=sessions, **kw)


def load(path) -> ScenarioConfig:
    with open(path) as fh:
        return from_dict(yaml.safe_load(fh))


def dump(cfg: ScenarioConfig, path):
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


def validate(cfg: ScenarioConfig) -> list[str]:
    """One diagnostic per violated invariant; empty when the scenario is runnable."""
    errs: list[str] = []
    if cfg.mode not in MODES:
        errs.append(f"unknown mode {cfg.mode!r}")
    if not cfg.duration_s > 0:
        errs.append("duration must be positive")
    if len(cfg.classes) < 2:
        errs.append("at least two traffic classes are required")
    errs += cfg.phy.errors()
    if cfg.queue_capacity < 1:
        errs.append("queue capacity must be positive")
    if cfg.control_bytes < 0:
        errs.append("control frame size must be non-negative")
    if cfg.idle_threshold < 1:
        errs.append("idle threshold must be at least 1")
    if cfg.idle_period < 0:
        errs.append("idle period must be non-negative")
    if cfg.poll_budget < 1:
        errs.append("poll budget must be at least 1")
    if cfg.cycle_ms is not None and not cfg.cycle_ms > 0:
        errs.append("cycle length must be positive")
    if not cfg.sample_ms > 0:
        errs.append("sample interval must be positive")
    if not 0.0 <= cfg.frame_error_rate < 1.0:
        errs.append("frame error rate must be in [0, 1)")

    ids = [s.id for s in cfg.stations]
    if len(set(ids)) != len(ids):
        errs.append("duplicate station id")
    roles = {s.id: s.role for s in cfg.stations}
    masters = [s for s in cfg.stations if s.role is Role.MASTER]
    if cfg.mode == POLLED:
        if not masters:
            errs.append("no master station")
        elif len(masters) > 1:
            errs.append("more than one master station")

    class_names = {c.name for c in cfg.classes}
    sids = [s.id for s in cfg.sessions]
    if len(set(sids)) != len(sids):
        errs.append("duplicate session id")
    floors: dict[str, float] = {}
    for s in cfg.sessions:
        for end in (s.src, s.dst):
            if end not in roles:
                errs.append(f"unknown station {end}")
            elif roles[end] is Role.MONITOR:
                errs.append(f"session {s.id} uses monitor station {end}")
        if s.src == s.dst:
            errs.append(f"session {s.id} has identical endpoints")
        if cfg.mode == POLLED and roles.get(s.src) is Role.MASTER:
            errs.append(f"session {s.id} is sourced at the master")
        if s.kind not in ("video", "bulk"):
            errs.append(f"session {s.id} has unknown kind {s.kind!r}")
        if s.cls not in class_names:
            errs.append(f"session {s.id} has unknown class {s.cls!r}")
        if s.kind == "video" and not (s.rate_kbps and s.rate_kbps > 0):
            errs.append(f"session {s.id} needs a positive rate")
        if s.size <= 0:
            errs.append(f"session {s.id} needs a positive packet size")
        if s.kind == "bulk" and s.backlog < 1:
            errs.append(f"session {s.id} needs a positive backlog target")
        if s.start_s < 0 or (s.stop_s is not None and s.stop_s < s.start_s):
            errs.append(f"session {s.id} has a bad start/stop interval")
        if not 0.0 <= s.floor_share <= 1.0:
            errs.append(f"session {s.id} floor share outside [0, 1]")
        floors[s.cls] = max(floors.get(s.cls, 0.0), s.floor_share)
        if cfg.classes and s.cls == cfg.classes[0].name and not (s.reserved and s.reserved > 0):
            errs.append(f"real-time session {s.id} has no reserved rate")
    if sum(floors.values()) > 1.0 + 1e-12:
        errs.append("floor shares sum above 1")
    if cfg.mode == POLLED and not cfg.sessions:
        errs.append("polled mode needs at least one session")
    return errs
