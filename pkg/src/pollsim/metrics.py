"""Per-session metrics from a trace, sweep reports and CSV export."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .frames import SimError, UnknownSession
from .trace import Trace


class InsufficientData(SimError, ValueError):
    pass


class Window(NamedTuple):
    start_us: int
    length_us: int
    bits: int
    kbps: float


def _check_session(trace: Trace, session: int):
    if session not in trace.session_ids():
        raise UnknownSession(session)


def throughput(trace: Trace, session: int, window_ms: float = 1000.0) -> list[Window]:
    """Delivered payload rate per window; windows tile [0, duration)."""
    if not window_ms > 0:
        raise ValueError("window must be positive")
    _check_session(trace, session)
    width = round(window_ms * 1000)
    end = trace.duration_us
    nwin = -(-end // width)
    bits = [0] * nwin
    for d in trace.deliveries:
        if d.session == session and d.t < end:
            bits[d.t // width] += 8 * d.bytes
    out = []
    for i, b in enumerate(bits):
        start = i * width
        length = min(width, end - start)
        out.append(Window(start, length, b, b * 1000 / length))
    return out


def delivered_kbps(trace: Trace, session: int) -> float:
    _check_session(trace, session)
    bits = sum(8 * d.bytes for d in trace.deliveries if d.session == session)
    return bits * 1000 / trace.duration_us


def inter_packet_stats(trace: Trace, session: int) -> tuple[float, float]:
    """Mean and population std (ms) of successive receiver arrival gaps."""
    _check_session(trace, session)
    return gap_stats(trace.arrivals(session))


def gap_stats(arrivals_us: Sequence[int]) -> tuple[float, float]:
    if len(arrivals_us) < 2:
        raise InsufficientData("need at least two arrivals")
    gaps = np.diff(np.asarray(arrivals_us, dtype=np.int64)) / 1000.0
    return float(gaps.mean()), float(gaps.std())


def queue_delay_ms(trace: Trace, session: int) -> list[tuple[int, float]]:
    """(arrival µs, enqueue-to-first-transmission ms) per delivered frame."""
    return [(d.t, (d.tx_start - d.created) / 1000.0)
            for d in trace.deliveries if d.session == session]


@dataclass
class SessionMetrics:
    session: int
    cls: str
    kind: str
    series: list
    kbps: float
    ipt_mean: Optional[float]
    ipt_std: Optional[float]
    delivered: int
    dropped: int
    qdelay: list = field(default_factory=list)


def session_metrics(trace: Trace, session: int, window_ms: float = 1000.0) -> SessionMetrics:
    spec = next(s for s in trace.scenario.sessions if s.id == session)
    try:
        mean, std = inter_packet_stats(trace, session)
    except InsufficientData:
        mean = std = None
    return SessionMetrics(
        session=session, cls=spec.cls, kind=spec.kind,
        series=throughput(trace, session, window_ms),
        kbps=delivered_kbps(trace, session),
        ipt_mean=mean, ipt_std=std,
        delivered=sum(1 for d in trace.deliveries if d.session == session),
        dropped=sum(1 for d in trace.drops if d["session"] == session),
        qdelay=queue_delay_ms(trace, session))


@dataclass
class Row:
    mode: str
    ftp_count: int
    metrics: SessionMetrics


@dataclass
class Report:
    rows: list = field(default_factory=list)
    # per mode: first ftp count where video std > factor * its zero-ftp std
    jitter_onset: dict = field(default_factory=dict)
    # per mode: first ftp count where video throughput < degrade_frac * nominal rate
    throughput_onset: dict = field(default_factory=dict)
    video: dict = field(default_factory=dict)

    def video_series(self, mode: str) -> list[tuple[int, SessionMetrics]]:
        return sorted((r.ftp_count, r.metrics) for r in self.rows
                      if r.mode == mode and r.metrics.session == self.video.get(mode))


def _video_session(trace: Trace) -> Optional[int]:
    top = trace.scenario.classes[0].name
    for s in trace.scenario.sessions:
        if s.cls == top and s.kind == "video":
            return s.id
    return None


def _first(counts, pred) -> Optional[int]:
    for n in counts:
        if pred(n):
            return n
    return None


def report(traces: Sequence[Trace], window_ms: float = 1000.0, onset_factor: float = 2.0,
           degrade_frac: float = 0.9) -> Report:
    rep = Report()
    by_mode: dict = {}
    for tr in traces:
        for sid in tr.session_ids():
            rep.rows.append(Row(tr.mode, tr.ftp_count, session_metrics(tr, sid, window_ms)))
        by_mode.setdefault(tr.mode, []).append(tr)
    rep.rows.sort(key=lambda r: (r.mode, r.ftp_count, r.metrics.session))
    for mode, trs in by_mode.items():
        vid = _video_session(trs[0])
        if vid is None:
            continue
        rep.video[mode] = vid
        series = dict(rep.video_series(mode))
        counts = sorted(series)
        rate = next(s.rate_kbps for s in trs[0].scenario.sessions if s.id == vid)
        base = series.get(0)
        if base is not None and base.ipt_std is not None:
            limit = onset_factor * base.ipt_std
            rep.jitter_onset[mode] = _first(
                [n for n in counts if n > 0],
                lambda n: series[n].ipt_std is not None and series[n].ipt_std > limit)
        rep.throughput_onset[mode] = _first(
            counts, lambda n: series[n].kbps < degrade_frac * rate)
    return rep


CSV_COLUMNS = ["mode", "ftp_count", "session", "class", "window_start_ms", "kbps",
               "ipt_mean_ms", "ipt_std_ms", "drops", "supp_qdelay_ms"]


def csv_rows(rep: Report):
    """One row per (mode, ftp count, session, window).

    ``supp_qdelay_ms`` is a supplementary mean enqueue-to-transmit delay of the
    frames arriving in that window; blank when none arrived.
    """
    for r in rep.rows:
        m = r.metrics
        qd = m.qdelay
        qi = 0
        for w in m.series:
            acc = []
            while qi < len(qd) and qd[qi][0] < w.start_us + w.length_us:
                acc.append(qd[qi][1])
                qi += 1
            yield [r.mode, r.ftp_count, m.session, m.cls, w.start_us / 1000, w.kbps,
                   _blank(m.ipt_mean), _blank(m.ipt_std), m.dropped,
                   _blank(sum(acc) / len(acc) if acc else None)]


def _blank(v):
    return "" if v is None else v


def write_csv(rep: Report, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        w.writerows(csv_rows(rep))


def summary_lines(rep: Report) -> list[str]:
    lines = []
    for mode in sorted(rep.video):
        lines.append(f"[{mode}] video session {rep.video[mode]}")
        lines.append("  ftp  kbps      ipt_mean_ms  ipt_std_ms  drops")
        for n, m in rep.video_series(mode):
            lines.append(f"  {n:>3}  {m.kbps:8.1f}  {fmt(m.ipt_mean):>11}  "
                         f"{fmt(m.ipt_std):>10}  {m.dropped:>5}")
        lines.append(f"  jitter onset: {rep.jitter_onset.get(mode)}  "
                     f"throughput onset: {rep.throughput_onset.get(mode)}")
    return lines


def fmt(v):
    return "-" if v is None else f"{v:.3f}"
