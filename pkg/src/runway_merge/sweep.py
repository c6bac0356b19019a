"""Monte Carlo sweeps over (straight-in rate, downwind rate, P_A, scenario).

Replication ``r`` of grid cell ``(i, j)`` always draws from the stream path
``(i * n_dw + j, r)`` under the master seed, whatever the P_A level or
scenario. Cells are therefore reproducible in isolation, can run in any
order or process, and levels are compared on common random numbers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from runway_merge.arrivals import (
    SECONDS_PER_HOUR,
    StreamParams,
    beta_of,
    generate_streams,
    lambda_of_beta,
)
from runway_merge.commlink import params_from_availability
from runway_merge.merge_sim import SimParams, SimResult, UncertaintyConfig, run_simulation
from runway_merge.metrics import MetricsReport, aggregate, compute_metrics
from runway_merge.uncertainty import LogUniformRange, RngStream, sample_log_uniform

DEFAULT_P_A_LEVELS = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5)

# substream tags under a replication path
_STREAMS, _TRACE, _AIRCRAFT = 0, 2, 3


def run_replication(
    beta_si: float,
    beta_dw: float,
    sim: SimParams,
    unc: UncertaintyConfig,
    rng: RngStream,
) -> SimResult:
    """One simulation with fresh streams, link trace and delays drawn from ``rng``."""
    si = StreamParams.from_beta(beta_si, sim.t_sep, sim.arrival_start)
    dw = StreamParams.from_beta(beta_dw, sim.t_sep, sim.arrival_start)
    streams = generate_streams(si, dw, sim.horizon, rng.child(_STREAMS))
    trace = unc.trace_for(sim.horizon, rng.child(_TRACE))
    return run_simulation(streams, sim, unc, trace, rng.child(_AIRCRAFT))


def replicate(
    beta_si: float,
    beta_dw: float,
    sim: SimParams,
    unc: UncertaintyConfig,
    replications: int,
    master_seed: int,
    cell_index: int = 0,
) -> list[MetricsReport]:
    """Per-replication metrics for one cell."""
    return [
        compute_metrics(
            run_replication(beta_si, beta_dw, sim, unc, RngStream(master_seed, (cell_index, r)))
        )
        for r in range(replications)
    ]


def stratified_log_uniform_axis(range_: LogUniformRange, n: int, rng: RngStream, t_sep: float) -> list[float]:
    """``n`` arrival rates (AC/h) from rate parameters stratified in log space.

    The range bounds the exponential rate parameter in events per hour; each
    of ``n`` equal log-width strata contributes one draw, and the draw is
    mapped to its effective separated arrival rate.
    """
    lo, hi = math.log(range_.lambda_min), math.log(range_.lambda_max)
    edges = np.linspace(lo, hi, n + 1)
    lams = [
        float(sample_log_uniform(LogUniformRange(math.exp(a), math.exp(b)), rng.child(k)))
        for k, (a, b) in enumerate(zip(edges[:-1], edges[1:]))
    ]
    return sorted(beta_of(StreamParams(lam / SECONDS_PER_HOUR, t_sep)) for lam in lams)


@dataclass(frozen=True)
class SweepSpec:
    """Grid, levels and replication budget of a sweep.

    Axes are explicit lists of arrival rates in AC/h or a
    :class:`LogUniformRange` of exponential rate parameters (per hour),
    which is expanded with ``log_axis_samples`` stratified draws.
    """

    beta_si_axis: tuple[float, ...] | LogUniformRange = (5.0, 10.0, 20.0, 30.0, 40.0, 50.0)
    beta_dw_axis: tuple[float, ...] | LogUniformRange = (5.0, 10.0, 20.0, 30.0, 40.0, 50.0)
    p_a_levels: tuple[float, ...] = DEFAULT_P_A_LEVELS
    scenarios: tuple[str, ...] = ("voice", "rpas")
    replications_per_cell: int = 200
    master_seed: int = 0
    horizon: float = 3600.0
    sim: SimParams = field(default_factory=SimParams)
    unc: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    mean_outage_s: float = 10.0
    log_axis_samples: int = 10

    def __post_init__(self) -> None:
        if self.replications_per_cell < 1:
            raise ValueError("replications_per_cell must be >= 1")
        if not self.p_a_levels or any(not (0 < p <= 1) for p in self.p_a_levels):
            raise ValueError("p_a_levels must lie in (0, 1]")
        if not self.scenarios or any(s not in ("voice", "rpas") for s in self.scenarios):
            raise ValueError("scenarios must be a non-empty subset of {voice, rpas}")
        for name in ("beta_si_axis", "beta_dw_axis"):
            axis = getattr(self, name)
            if not isinstance(axis, LogUniformRange):
                axis = tuple(float(b) for b in axis)
                if not axis or any(b <= 0 for b in axis):
                    raise ValueError(f"{name} needs positive rates")
                object.__setattr__(self, name, axis)

    def axes(self) -> tuple[list[float], list[float]]:
        out = []
        for tag, axis in enumerate((self.beta_si_axis, self.beta_dw_axis)):
            if isinstance(axis, LogUniformRange):
                rng = RngStream(self.master_seed, (2**32 - 1, tag))
                out.append(stratified_log_uniform_axis(axis, self.log_axis_samples, rng, self.sim.t_sep))
            else:
                out.append(list(axis))
        return out[0], out[1]

    def level_config(self, p_a: float, scenario: str) -> tuple[SimParams, UncertaintyConfig]:
        sim = replace(self.sim, horizon=self.horizon, scenario=scenario)
        unc = replace(self.unc, comm=params_from_availability(p_a, self.mean_outage_s))
        return sim, unc


@dataclass
class ContourGrid:
    """Aggregated metrics on a rectangular grid; ``None`` marks infeasible cells."""

    beta_si: list[float]
    beta_dw: list[float]
    cells: list[list[MetricsReport | None]]
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.beta_si), len(self.beta_dw)

    def values(self, metric: str) -> np.ndarray:
        """``metric`` of every cell as a float array (NaN where absent)."""
        out = np.full(self.shape, np.nan)
        for i, row in enumerate(self.cells):
            for j, cell in enumerate(row):
                v = None if cell is None else getattr(cell, metric)
                if v is not None:
                    out[i, j] = v
        return out

    @property
    def infeasible(self) -> np.ndarray:
        return np.array([[c is None for c in row] for row in self.cells], dtype=bool)


def _feasible(beta: float, t_sep: float) -> bool:
    try:
        lambda_of_beta(beta, t_sep)
    except ValueError:
        return False
    return True


def _run_cell(args) -> MetricsReport | None:
    beta_si, beta_dw, sim, unc, reps, seed, cell_index = args
    if not (_feasible(beta_si, sim.t_sep) and _feasible(beta_dw, sim.t_sep)):
        return None
    return aggregate(replicate(beta_si, beta_dw, sim, unc, reps, seed, cell_index))


def run_sweep(spec: SweepSpec, workers: int | None = 1) -> list[ContourGrid]:
    """One :class:`ContourGrid` per (P_A level, scenario), in that nesting order.

    ``workers`` > 1 farms cells out to processes; ``None`` uses every CPU.
    The output does not depend on the worker count.
    """
    beta_si, beta_dw = spec.axes()
    n_dw = len(beta_dw)
    if workers is None:
        workers = os.cpu_count() or 1
    grids = []
    for p_a in spec.p_a_levels:
        for scenario in spec.scenarios:
            sim, unc = spec.level_config(p_a, scenario)
            tasks = [
                (bs, bd, sim, unc, spec.replications_per_cell, spec.master_seed, i * n_dw + j)
                for i, bs in enumerate(beta_si)
                for j, bd in enumerate(beta_dw)
            ]
            if workers > 1:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    flat = list(pool.map(_run_cell, tasks))
            else:
                flat = [_run_cell(t) for t in tasks]
            cells = [flat[i * n_dw : (i + 1) * n_dw] for i in range(len(beta_si))]
            grids.append(
                ContourGrid(
                    beta_si=list(beta_si),
                    beta_dw=list(beta_dw),
                    cells=cells,
                    metadata={
                        "p_a": p_a,
                        "scenario": scenario,
                        "seed": spec.master_seed,
                        "replications": spec.replications_per_cell,
                        "smoothing_window": 1,
                    },
                )
            )
    return grids


_SMOOTHED = ("throughput_per_hour", "immediate_turn_fraction", "avg_hold_s")


def _moving_average(values: np.ndarray, window: int) -> np.ndarray:
    """Box average over a ``window`` square, shrunk at borders, ignoring NaN."""
    h = window // 2
    rows, cols = values.shape
    out = np.full_like(values, np.nan)
    for i in range(rows):
        for j in range(cols):
            block = values[max(0, i - h) : i + h + 1, max(0, j - h) : j + h + 1]
            if np.isfinite(values[i, j]) and np.isfinite(block).any():
                out[i, j] = np.nanmean(block)
    return out


def smooth_contours(grid: ContourGrid, window: int) -> ContourGrid:
    if window < 1 or window % 2 == 0:
        raise ValueError("smoothing window must be an odd integer >= 1")
    meta = dict(grid.metadata, smoothing_window=window)
    if window == 1:
        return ContourGrid(list(grid.beta_si), list(grid.beta_dw), [list(r) for r in grid.cells], meta)
    smoothed = {m: _moving_average(grid.values(m), window) for m in _SMOOTHED}
    cells = []
    for i, row in enumerate(grid.cells):
        new_row = []
        for j, cell in enumerate(row):
            if cell is None:
                new_row.append(None)
                continue
            updates = {}
            for m in _SMOOTHED:
                v = smoothed[m][i, j]
                updates[m] = None if math.isnan(v) else float(v)
            new_row.append(replace(cell, **updates))
        cells.append(new_row)
    return ContourGrid(list(grid.beta_si), list(grid.beta_dw), cells, meta)
