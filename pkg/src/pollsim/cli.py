"""Command-line front end: validate, run, sweep, report."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import engine, metrics, scenario, trace as tracemod
from .frames import SimError

log = logging.getLogger("pollsim")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def parse_counts(text: str) -> list[int]:
    """'0..6', '0,2,4' or a single integer."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _load(path) -> tuple[scenario.ScenarioConfig | None, list[str]]:
    try:
        cfg = scenario.load(path)
    except scenario.ConfigInvalid as exc:
        return None, exc.errors
    except (OSError, ValueError) as exc:
        return None, [str(exc)]
    return cfg, scenario.validate(cfg)


def cmd_validate(args) -> int:
    cfg, errs = _load(args.scenario)
    for e in errs:
        print(e)
    if errs:
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg, errs = _load(args.scenario)
    if errs:
        for e in errs:
            print(e, file=sys.stderr)
        return EXIT_INVALID
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    tr = engine.run(cfg)
    if args.out:
        tr.save(args.out)
        log.info("wrote %s", args.out)
    for sid in tr.session_ids():
        m = metrics.session_metrics(tr, sid)
        print(f"session {sid} ({m.kind}, {m.cls}): {m.kbps:.1f} kbps, "
              f"ipt mean {metrics.fmt(m.ipt_mean)} ms, std {metrics.fmt(m.ipt_std)} ms, "
              f"drops {m.dropped}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg, errs = _load(args.scenario)
    if errs:
        for e in errs:
            print(e, file=sys.stderr)
        return EXIT_INVALID
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    bad = [m for m in modes if m not in scenario.MODES]
    if bad:
        print(f"unknown mode(s): {', '.join(bad)}", file=sys.stderr)
        return EXIT_INVALID
    traces = engine.sweep(cfg, parse_counts(args.ftp), modes, workers=args.workers)
    for p in tracemod.save_all(traces, args.out):
        print(p)
    return EXIT_OK


def cmd_report(args) -> int:
    paths = sorted(Path(args.dir).glob("*.jsonl"))
    traces = [tracemod.load(p) for p in paths]
    rep = metrics.report(traces, args.window_ms, args.onset_factor)
    for line in metrics.summary_lines(rep):
        print(line)
    if args.csv:
        metrics.write_csv(rep, args.csv)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pollsim",
                                description="Polling vs contention WLAN MAC simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    v = sub.add_parser("validate", help="check a scenario file")
    v.add_argument("scenario")
    v.set_defaults(func=cmd_validate)

    r = sub.add_parser("run", help="simulate one scenario")
    r.add_argument("scenario")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="trace file (JSON lines)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a scenario over ftp counts and modes")
    s.add_argument("scenario")
    s.add_argument("--ftp", default="0..6", help="counts, e.g. 0..6 or 0,2,4")
    s.add_argument("--modes", default="polled,contention")
    s.add_argument("--out", required=True, help="output directory for traces")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    rp = sub.add_parser("report", help="metrics and onset detection over a sweep directory")
    rp.add_argument("dir")
    rp.add_argument("--window-ms", type=float, default=1000.0)
    rp.add_argument("--onset-factor", type=float, default=2.0)
    rp.add_argument("--csv")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except SimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
