"""Capacity metrics per run, their aggregation, and the holding-time growth fit."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from runway_merge.merge_sim import SimResult


@dataclass(frozen=True)
class MetricsReport:
    """Metrics of one run or of an aggregated cell.

    ``immediate_turn_fraction`` is ``None`` when no downwind aircraft entered
    and ``avg_hold_s`` is ``None`` when none merged. The last four fields are
    bookkeeping for aggregation and safety checks.
    """

    throughput_per_hour: float
    immediate_turn_fraction: float | None
    avg_hold_s: float | None
    merged_count: int
    censored_count: int
    replication_count: int = 1
    downwind_count: int = 0
    throughput_std: float = 0.0
    max_throughput_per_hour: float = 0.0
    min_separation_s: float = math.inf


def compute_metrics(result: SimResult, horizon: float | None = None) -> MetricsReport:
    horizon = result.horizon if horizon is None else horizon
    records = result.downwind_records
    merged = [r for r in records if r.merged]
    throughput = result.landed_count / (horizon / 3600.0)
    immediate = (
        sum(r.first_attempt_success for r in records) / len(records) if records else None
    )
    avg_hold = float(np.mean([r.hold_time for r in merged])) if merged else None
    return MetricsReport(
        throughput_per_hour=throughput,
        immediate_turn_fraction=immediate,
        avg_hold_s=avg_hold,
        merged_count=len(merged),
        censored_count=len(records) - len(merged),
        replication_count=1,
        downwind_count=len(records),
        throughput_std=0.0,
        max_throughput_per_hour=throughput,
        min_separation_s=result.final_queue.min_gap(),
    )


def _weighted(values, weights) -> float | None:
    pairs = [(v, w) for v, w in zip(values, weights) if v is not None and w > 0]
    if not pairs:
        return None
    total = sum(w for _, w in pairs)
    return sum(v * w for v, w in pairs) / total


def aggregate(reports: list[MetricsReport]) -> MetricsReport:
    """Combine reports as if their replications had been pooled.

    Throughput and immediate-turn fraction are averaged over replications;
    the holding time is averaged over merged aircraft.
    """
    if not reports:
        raise ValueError("cannot aggregate an empty list of reports")
    if len(reports) == 1:
        return reports[0]
    reps = [r.replication_count for r in reports]
    n = sum(reps)
    mean_tp = sum(r.throughput_per_hour * w for r, w in zip(reports, reps)) / n
    # pooled variance from per-report mean and spread
    ss = sum(
        (w - 1) * r.throughput_std**2 + w * (r.throughput_per_hour - mean_tp) ** 2
        for r, w in zip(reports, reps)
    )
    std = math.sqrt(ss / (n - 1)) if n > 1 else 0.0
    immediate = _weighted([r.immediate_turn_fraction for r in reports], reps)
    avg_hold = _weighted([r.avg_hold_s for r in reports], [r.merged_count for r in reports])
    return MetricsReport(
        throughput_per_hour=mean_tp,
        immediate_turn_fraction=immediate,
        avg_hold_s=avg_hold,
        merged_count=sum(r.merged_count for r in reports),
        censored_count=sum(r.censored_count for r in reports),
        replication_count=n,
        downwind_count=sum(r.downwind_count for r in reports),
        throughput_std=std,
        max_throughput_per_hour=max(r.max_throughput_per_hour for r in reports),
        min_separation_s=min(r.min_separation_s for r in reports),
    )


@dataclass(frozen=True)
class ExpFit:
    amplitude: float
    rate: float
    r_squared: float

    def __call__(self, x):
        return self.amplitude * np.exp(self.rate * np.asarray(x, dtype=float))


def fit_exponential(points) -> ExpFit:
    """Least-squares line through ``(x, ln y)``; r² is that of the log-linear fit."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("need at least three (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.any(y <= 0) or not np.all(np.isfinite(y)):
        raise ValueError("exponential fit needs strictly positive y values")
    ly = np.log(y)
    slope, intercept = np.polyfit(x, ly, 1)
    resid = ly - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    if ss_tot <= 1e-300:
        r2 = 1.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return ExpFit(amplitude=float(math.exp(intercept)), rate=float(slope), r_squared=r2)
