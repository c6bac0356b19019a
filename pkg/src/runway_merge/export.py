"""CSV/JSON writers for traces, streams, run records, sweep grids and oracle grids.

Every writer lands its file atomically (temp file in the target directory,
then rename) and formats floats with ``repr`` so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

from runway_merge import __version__
from runway_merge.arrivals import ArrivalStreams
from runway_merge.commlink import CommTrace
from runway_merge.merge_sim import SimResult
from runway_merge.metrics import MetricsReport
from runway_merge.sweep import ContourGrid

SCHEMA_VERSION = 1

GRID_METRICS = {
    "throughput": "throughput_per_hour",
    "immediate_frac": "immediate_turn_fraction",
    "avg_hold_s": "avg_hold_s",
}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, header, rows) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return atomic_write_text(path, buf.getvalue())


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_trace_csv(trace: CommTrace, path) -> Path:
    return write_csv(path, ["start_s", "end_s", "state"], trace.segments)


def write_streams_csv(streams: ArrivalStreams, path) -> Path:
    rows = [(float(e), "straight_in") for e in streams.straight_in_entries]
    rows += [(float(e), "downwind") for e in streams.downwind_entries]
    rows.sort(key=lambda r: (r[0], r[1]))
    return write_csv(path, ["entry_s", "stream"], rows)


def write_records_csv(result: SimResult, path) -> Path:
    rows = [
        (
            r.entry_time,
            r.status,
            r.turn_time,
            r.merge_time,
            r.hold_time,
            r.evaluation_count,
            r.first_attempt_success,
        )
        for r in result.downwind_records
    ]
    header = ["entry_s", "status", "turn_s", "merge_s", "hold_s", "evals", "first_attempt"]
    return write_csv(path, header, rows)


def report_dict(report: MetricsReport) -> dict:
    d = dict(vars(report))
    if d["min_separation_s"] == float("inf"):
        d["min_separation_s"] = None
    return d


def write_grid_csv(grid: ContourGrid, metric: str, path) -> Path:
    """One row per cell: ``beta_si,beta_dw,value,reps,censored``; infeasible cells stay blank."""
    attr = GRID_METRICS.get(metric, metric)
    rows = []
    for i, bs in enumerate(grid.beta_si):
        for j, bd in enumerate(grid.beta_dw):
            cell = grid.cells[i][j]
            if cell is None:
                rows.append((bs, bd, None, 0, None))
            else:
                rows.append((bs, bd, getattr(cell, attr), cell.replication_count, cell.censored_count))
    return write_csv(path, ["beta_si", "beta_dw", "value", "reps", "censored"], rows)


def write_metrics_csv(grids: list[ContourGrid], path) -> Path:
    header = [
        "beta_si", "beta_dw", "p_a", "scenario", "throughput",
        "immediate_frac", "avg_hold_s", "censored", "reps",
    ]
    rows = []
    for g in grids:
        for i, bs in enumerate(g.beta_si):
            for j, bd in enumerate(g.beta_dw):
                c = g.cells[i][j]
                p_a, sc = g.metadata["p_a"], g.metadata["scenario"]
                if c is None:
                    rows.append((bs, bd, p_a, sc, None, None, None, None, 0))
                else:
                    rows.append(
                        (bs, bd, p_a, sc, c.throughput_per_hour, c.immediate_turn_fraction,
                         c.avg_hold_s, c.censored_count, c.replication_count)
                    )
    return write_csv(path, header, rows)


def grid_filename(metric: str, p_a: float, scenario: str) -> str:
    return f"{metric}_pa{p_a:.2f}_{scenario}.csv"


def write_sweep(grids: list[ContourGrid], out_dir, spec_dict: dict, seed: int) -> Path:
    """Per-(metric, P_A, scenario) CSVs, a combined metrics table and a manifest."""
    out_dir = Path(out_dir)
    entries = []
    for g in grids:
        for metric in GRID_METRICS:
            name = grid_filename(metric, g.metadata["p_a"], g.metadata["scenario"])
            write_grid_csv(g, metric, out_dir / name)
            entries.append({"file": name, "metric": metric, **g.metadata})
    write_metrics_csv(grids, out_dir / "metrics.csv")
    return write_json(
        out_dir / "manifest.json",
        {
            "schema_version": SCHEMA_VERSION,
            "software_version": __version__,
            "seed": seed,
            "spec": spec_dict,
            "grids": entries,
            "grid_columns": ["beta_si", "beta_dw", "value", "reps", "censored"],
        },
    )


def write_oracle_csv(rows, path) -> Path:
    return write_csv(path, ["beta_si", "beta_dw", "beta_theory"], rows)
