"""Command line entry point: ``manet-dri`` / ``python -m manet_dri``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import experiment
from .config import AXES, DEFAULT_VALUES, PROTOCOLS, ScenarioConfig, SweepSpec, parse_config
from .traffic import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_RUN = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # bad flags are configuration errors (exit 1), not run failures
        raise ConfigError("arguments", message)


def build_parser():
    p = _Parser(prog="manet-dri",
                description="Simulate AODV with cooperative black holes and the DRI cross-check defence.")
    p.add_argument("--config", metavar="PATH", help="key = value scenario or sweep file")
    p.add_argument("--sweep", choices=AXES, help="sweep axis (default values unless the config gives some)")
    p.add_argument("--protocol", choices=PROTOCOLS + ("all",), default="all")
    p.add_argument("--reps", type=int, metavar="N", help="repetitions per point (default 5 for sweeps, 1 otherwise)")
    p.add_argument("--seed", type=int, metavar="N", help="base seed")
    p.add_argument("--out", metavar="DIR", default="results")
    p.add_argument("--per-run", action="store_true", help="also write runs.csv with one row per run")
    p.add_argument("--trace", action="store_true", help="write an event trace per run under DIR/traces")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes (0 = all CPUs)")
    return p


def resolve(args):
    """Turn parsed flags into a ScenarioConfig or SweepSpec."""
    loaded = parse_config(args.config) if args.config else ScenarioConfig()
    if isinstance(loaded, SweepSpec):
        base, axis, values, reps = loaded.base, loaded.axis, loaded.values, loaded.repetitions
    else:
        base, axis, values, reps = loaded, None, None, None
    if args.seed is not None:
        base = base.replace(seed=args.seed)
    if args.sweep is not None and args.sweep != axis:
        axis, values = args.sweep, DEFAULT_VALUES[args.sweep]
    if args.reps is not None:
        if args.reps < 1:
            raise ConfigError("reps", "must be at least 1")
        reps = args.reps
    if axis is None:
        if reps not in (None, 1):
            return SweepSpec("connections", (base.flow_count,), reps, base)
        return base
    return SweepSpec(axis, tuple(values), reps or 5, base)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        target = resolve(args)
        if args.jobs < 0:
            raise ConfigError("jobs", "must be non-negative")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    protocols = PROTOCOLS if args.protocol == "all" else (args.protocol,)
    out = Path(args.out)
    jobs = args.jobs or experiment.default_jobs()
    try:
        out.mkdir(parents=True, exist_ok=True)
        rows = experiment.run_matrix(target, protocols, jobs,
                                     trace_dir=out / "traces" if args.trace else None)
        experiment.emit_csv(rows, out / "summary.csv")
        if args.per_run:
            experiment.emit_runs_csv(rows, out / "runs.csv")
        (out / "runs.log").write_text("\n".join(experiment.run_log_lines(rows)) + "\n")
        if isinstance(target, SweepSpec):
            experiment.emit_plotdata(rows, out)
    except experiment.MatrixError as exc:
        print(f"run failure: {exc}", file=sys.stderr)
        return EXIT_RUN
    except OSError as exc:
        print(f"run failure: {exc}", file=sys.stderr)
        return EXIT_RUN
    for line in (out / "summary.csv").read_text().splitlines():
        print(line)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
