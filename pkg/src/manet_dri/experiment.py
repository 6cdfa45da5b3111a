"""Scenario matrix execution and result files."""
from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import PROTOCOLS, ScenarioConfig, SweepSpec
from .scenario import run_scenario
from .traffic import aggregate

CSV_HEADER = ("variant,axis,axis_value,reps,sent_mean,delivered_mean,pdr_mean,pdr_sd,"
              "false_rreps_mean,false_rreps_sd,poisoned_mean,blacklist_size_mean,"
              "detection_time_mean,rreq,rrep,rerr,frq,frp,alarm").split(",")
RUN_HEADER = ("variant,axis,axis_value,seed,sent,delivered,pdr,false_rreps,poisoned,"
              "blacklist_size,detection_time,attacker_dropped,overflow_dropped,link_lost,"
              "in_flight,conserved,rreq,rrep,rerr,frq,frp,alarm").split(",")
CTL = ("RREQ", "RREP", "RERR", "FRQ", "FRP", "ALARM")
FIGURES = {
    "connections": (("fig7", "pdr"), ("fig9", "false_rreps")),
    "speed": (("fig8", "pdr"), ("fig10", "false_rreps")),
}


class MatrixError(RuntimeError):
    """A single run failed; ``key`` is its (variant, axis value, seed)."""

    def __init__(self, key, cause):
        super().__init__(f"run failed for variant={key[0]} value={key[1]} seed={key[2]}: {cause}")
        self.key = key


@dataclass
class Row:
    variant: str
    axis: str
    axis_value: object
    runs: list
    stats: dict = field(default_factory=dict)

    @property
    def reps(self):
        return len(self.runs)


@dataclass(frozen=True)
class Task:
    variant: str
    axis: str
    axis_value: object
    config: ScenarioConfig
    trace_path: str | None = None

    @property
    def key(self):
        return (self.variant, self.axis_value, self.config.seed)


class _FileTrace:
    def __init__(self, fh):
        self.fh = fh

    def append(self, line):
        self.fh.write(line)
        self.fh.write("\n")


def run_one(cfg, trace_path=None):
    """Run one scenario point and return its RunMetrics."""
    if trace_path is None:
        return run_scenario(cfg)
    with open(trace_path, "w") as fh:
        return run_scenario(cfg, _FileTrace(fh))


def _run_task(task):
    try:
        return True, run_one(task.config, task.trace_path)
    except Exception as exc:  # reported with the task's identity by the caller
        return False, f"{type(exc).__name__}: {exc}"


def plan(sweep, protocols=PROTOCOLS, trace_dir=None):
    """Tasks in output order: variant, then axis value, then seed."""
    if isinstance(sweep, ScenarioConfig):
        points = [("none", "", None)]
        seeds = [sweep.seed]
    else:
        points = [(sweep.axis, v, v) for v in sweep.values]
        seeds = sweep.seeds()
    tasks = []
    for variant in protocols:
        for axis, value, raw in points:
            for seed in seeds:
                if raw is None:
                    cfg = sweep.replace(protocol=variant, seed=seed)
                else:
                    cfg = sweep.point(raw, variant).replace(seed=seed)
                trace = None
                if trace_dir is not None:
                    tag = f"{variant}_{axis}{_fmt(value) if value != '' else ''}_seed{seed}"
                    trace = str(Path(trace_dir) / f"{tag}.trace")
                tasks.append(Task(variant, axis, value, cfg, trace))
    return tasks


def run_matrix(sweep, protocols=PROTOCOLS, jobs=1, trace_dir=None):
    """Run every (variant, value, seed) and aggregate per (variant, value).

    Runs may execute in worker processes; the result order only depends on
    the sweep. Raises MatrixError naming the first failing run.
    """
    tasks = plan(sweep, protocols, trace_dir)
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    rows = {}
    for task, (ok, res) in zip(tasks, results):
        if not ok:
            raise MatrixError(task.key, res)
        key = (task.variant, task.axis_value)
        if key not in rows:
            rows[key] = Row(task.variant, task.axis, task.axis_value, [])
        rows[key].runs.append(res)
    out = list(rows.values())
    for row in out:
        row.stats = aggregate(row.runs)
    return out


def _fmt(v):
    if v is None or v == "":
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    return f"{v:.6g}"


def csv_rows(rows):
    out = []
    for r in rows:
        st = r.stats
        ctl = [_fmt(st.get("ctl_" + k, (0.0, 0.0))[0]) for k in CTL]
        out.append([
            r.variant, r.axis, _fmt(r.axis_value), str(r.reps),
            _fmt(st["sent"][0]), _fmt(st["delivered"][0]),
            _fmt(st["pdr"][0]), _fmt(st["pdr"][1]),
            _fmt(st["false_rreps"][0]), _fmt(st["false_rreps"][1]),
            _fmt(st["poisoned_nodes"][0]), _fmt(st["blacklist_size"][0]),
            _fmt(st["detection_time"][0]), *ctl])
    return out


def _write(path, header, body):
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)
    return path


def emit_csv(rows, path):
    if not rows:
        raise ValueError("no rows to write")
    return _write(path, CSV_HEADER, csv_rows(rows))


def emit_runs_csv(rows, path):
    body = []
    for r in rows:
        for m in r.runs:
            body.append([
                r.variant, r.axis, _fmt(r.axis_value), str(m.seed), str(m.sent),
                str(m.delivered), _fmt(m.pdr), str(m.false_rreps), str(m.poisoned_nodes),
                str(len(m.blacklisted)), _fmt(m.detection_time), str(m.attacker_dropped),
                str(m.overflow_dropped), str(m.link_lost), str(m.in_flight),
                str(int(m.conserved())),
                *(str(m.control_packets.get(k, 0)) for k in CTL)])
    return _write(path, RUN_HEADER, body)


def run_log_lines(rows):
    """One line per run: identity, seed and the conservation audit."""
    lines = []
    for r in rows:
        for m in r.runs:
            status = "ok" if m.conserved() else "VIOLATED"
            lines.append(
                f"variant={r.variant} {r.axis}={_fmt(r.axis_value) or '-'} seed={m.seed} "
                f"sent={m.sent} delivered={m.delivered} attacker_dropped={m.attacker_dropped} "
                f"overflow_dropped={m.overflow_dropped} link_lost={m.link_lost} "
                f"in_flight={m.in_flight} conservation={status}")
    return lines


def emit_plotdata(rows, out_dir):
    """Whitespace-separated series per figure: axis value, then mean and sd per variant."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    axes = {r.axis for r in rows}
    for axis in sorted(axes):
        variants = []
        for r in rows:
            if r.axis == axis and r.variant not in variants:
                variants.append(r.variant)
        values = sorted({r.axis_value for r in rows if r.axis == axis})
        by = {(r.variant, r.axis_value): r for r in rows if r.axis == axis}
        for name, metric in FIGURES.get(axis, ()):
            cols = [axis] + [f"{v}_{s}" for v in variants for s in ("mean", "sd")]
            lines = ["# " + " ".join(cols)]
            for val in values:
                cells = [_fmt(val)]
                for v in variants:
                    r = by.get((v, val))
                    mean, sd = r.stats[metric] if r is not None else (None, None)
                    cells += [_fmt(mean) or "nan", _fmt(sd) or "nan"]
                lines.append(" ".join(cells))
            p = out_dir / f"{name}.dat"
            p.write_text("\n".join(lines) + "\n")
            written.append(p)
    return written


def default_jobs():
    return max(1, os.cpu_count() or 1)
