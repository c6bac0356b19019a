"""Acceptance gate: one test per criterion, each reporting a single PASS/FAIL line.

Statistical comparisons use common random numbers: replication ``r`` of a
cell draws from the same stream path whatever the link availability or
scenario, so level-to-level differences are tested pairwise.

The whole module takes several minutes on one core.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES
from runway_merge.cli import run_cli
from runway_merge.commlink import generate_trace, params_from_availability
from runway_merge.merge_sim import SimParams, UncertaintyConfig
from runway_merge.metrics import aggregate, fit_exponential
from runway_merge.oracle import OracleInput, beta_max, theoretical_throughput
from runway_merge.sweep import SweepSpec, replicate, run_sweep
from runway_merge.uncertainty import (
    GammaParams,
    RngStream,
    ShiftedExpParams,
    TruncNormalParams,
    sample_gamma,
    sample_shifted_exp,
    sample_trunc_normal,
)

SEED = 2025
T_SEP = 64.0
CEILING = 3600.0 / T_SEP
GRID_AXIS = tuple(float(b) for b in range(5, 55, 5))
GRID_REPS = 200
PAIRED_REPS = 500
CURVE_REPS = 200

# every per-run or per-cell report produced here, for the global safety checks
_SEEN: list = []


def report(n: int, passed: bool, text: str) -> None:
    line = f"CRITERION {n:2d} {'PASS' if passed else 'FAIL'}: {text}"
    ACCEPTANCE_LINES[n] = line
    print(line)


@lru_cache(maxsize=None)
def ideal_grid():
    spec = SweepSpec(
        beta_si_axis=GRID_AXIS,
        beta_dw_axis=GRID_AXIS,
        p_a_levels=(1.0,),
        scenarios=("voice",),
        replications_per_cell=GRID_REPS,
        master_seed=SEED,
        unc=UncertaintyConfig.ideal(),
    )
    (grid,) = run_sweep(spec)
    _SEEN.extend(c for row in grid.cells for c in row)
    return grid


@lru_cache(maxsize=None)
def cell_runs(beta_si: float, beta_dw: float, scenario: str, p_a: float, reps: int):
    sim = SimParams(scenario=scenario)
    unc = UncertaintyConfig(comm=params_from_availability(p_a))
    runs = replicate(beta_si, beta_dw, sim, unc, reps, SEED, cell_index=int(beta_si * 1000 + beta_dw))
    _SEEN.extend(runs)
    return runs


def _paired_greater(a, b) -> float:
    """One-sided p-value for mean(a - b) > 0 over paired replications."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if np.all(a == b):
        return 1.0
    return float(stats.ttest_rel(a, b, alternative="greater").pvalue)


def test_c01_oracle_equivalence():
    grid = ideal_grid()
    errors = []
    for i, bs in enumerate(grid.beta_si):
        for j, bd in enumerate(grid.beta_dw):
            theory = theoretical_throughput(OracleInput(bs, bd, T_SEP))
            errors.append((abs(grid.cells[i][j].throughput_per_hour - theory), bs, bd))
    worst = max(errors)
    failing = sum(e > 1.0 for e, _, _ in errors)
    passed = failing == 0
    report(
        1,
        passed,
        f"ideal grid {len(errors)} cells x {GRID_REPS} reps: max |sim - theory| = {worst[0]:.2f} AC/h "
        f"at ({worst[1]:g}, {worst[2]:g}); {failing} cells exceed 1 AC/h",
    )
    assert passed, f"{failing} cells outside +/-1 AC/h, worst {worst}"


def test_c02_additive_regime():
    grid = ideal_grid()
    rel = []
    for i, bs in enumerate(grid.beta_si):
        for j, bd in enumerate(grid.beta_dw):
            if bs + bd <= 25.0:
                tp = grid.cells[i][j].throughput_per_hour
                rel.append((abs(tp - (bs + bd)) / (bs + bd), bs, bd))
    worst = max(rel)
    passed = worst[0] <= 0.05
    report(2, passed, f"{len(rel)} cells with sum <= 25: max relative error {worst[0]:.3%} at ({worst[1]:g}, {worst[2]:g})")
    assert passed


def test_c05_link_degradation_ordering():
    lines, ok = [], True
    for scenario in ("voice", "rpas"):
        hi = [r.throughput_per_hour for r in cell_runs(30.0, 30.0, scenario, 1.0, PAIRED_REPS)]
        lo = [r.throughput_per_hour for r in cell_runs(30.0, 30.0, scenario, 0.5, PAIRED_REPS)]
        p = _paired_greater(hi, lo)
        ok &= p < 0.05
        lines.append(f"{scenario} {np.mean(hi):.2f} vs {np.mean(lo):.2f} (p={p:.2g})")
    report(5, ok, "throughput P_A=1.0 > P_A=0.5 at (30, 30): " + "; ".join(lines))
    assert ok


def test_c06_rpas_more_robust_than_voice():
    voice = cell_runs(30.0, 30.0, "voice", 0.7, PAIRED_REPS)
    rpas = cell_runs(30.0, 30.0, "rpas", 0.7, PAIRED_REPS)
    tp_v = [r.throughput_per_hour for r in voice]
    tp_r = [r.throughput_per_hour for r in rpas]
    im_v = [r.immediate_turn_fraction for r in voice]
    im_r = [r.immediate_turn_fraction for r in rpas]
    p_tp = _paired_greater(tp_r, tp_v)
    p_im = _paired_greater(im_r, im_v)
    ok = p_tp < 0.05 and p_im < 0.05
    report(
        6,
        ok,
        f"P_A=0.7 at (30, 30): throughput rpas {np.mean(tp_r):.2f} vs voice {np.mean(tp_v):.2f} (p={p_tp:.2g}); "
        f"immediate rpas {np.mean(im_r):.3f} vs voice {np.mean(im_v):.3f} (p={p_im:.2g})",
    )
    assert ok


def _fraction_curve(scenario):
    points = []
    for bd in (5.0, 15.0, 25.0, 35.0):
        runs = cell_runs(20.0, bd, scenario, 1.0, CURVE_REPS)
        f = np.array([r.immediate_turn_fraction for r in runs], dtype=float)
        agg = aggregate(list(runs)).immediate_turn_fraction
        points.append((bd, agg, f.std(ddof=1) / math.sqrt(len(f))))
    return points


def test_c07_immediate_turn_monotone():
    ok, lines = True, []
    for scenario in ("voice", "rpas"):
        pts = _fraction_curve(scenario)
        inversions, noisy = 0, True
        for (_, f0, s0), (_, f1, s1) in zip(pts, pts[1:]):
            if f1 > f0:
                inversions += 1
                noisy &= f1 - f0 <= 2 * math.hypot(s0, s1)
        ok &= inversions == 0 or (inversions == 1 and noisy)
        lines.append(f"{scenario} " + " > ".join(f"{f:.3f}" for _, f, _ in pts) + f" ({inversions} inversions)")
    report(7, ok, "beta_SI=20, beta_DW 5/15/25/35: " + "; ".join(lines))
    assert ok


HOLD_DW = tuple(float(b) for b in range(5, 50, 5))


def _hold_fit(beta_si, below_capacity):
    # below_capacity keeps only cells whose total demand is under the oracle ceiling
    cap = beta_max(beta_si)
    dws = [bd for bd in HOLD_DW if not below_capacity or beta_si + bd < cap]
    pts = [(bd, aggregate(list(cell_runs(beta_si, bd, "voice", 1.0, CURVE_REPS))).avg_hold_s) for bd in dws]
    return fit_exponential(pts), dws


def test_c08_holding_growth_and_censoring():
    low = {bs: _hold_fit(bs, True) for bs in (10.0, 20.0)}
    sat = {bs: _hold_fit(bs, False) for bs in (40.0, 50.0)}
    ok = all(f.r_squared >= 0.9 for f, _ in low.values()) and all(f.r_squared < 0.9 for f, _ in sat.values())
    fmt = lambda d: ", ".join(f"beta_SI={k:g} (beta_DW {v[1][0]:g}..{v[1][-1]:g}): {v[0].r_squared:.3f}" for k, v in d.items())
    report(8, ok, f"log-linear r^2 of hold vs beta_DW: below capacity {fmt(low)}; saturated {fmt(sat)}")
    assert ok


def test_c09_sampler_moments():
    checks = []
    lam = 1.0 / 60.0
    x = sample_shifted_exp(ShiftedExpParams(T_SEP, lam), RngStream(SEED, (9, 0)), size=1_000_000)
    checks.append(("shifted exp", x.mean(), T_SEP + 1 / lam, abs(x.mean() / (T_SEP + 1 / lam) - 1) <= 0.005))
    x = sample_trunc_normal(TruncNormalParams(), RngStream(SEED, (9, 1)), size=1_000_000)
    checks.append(("trunc normal", x.mean(), 4.0508, abs(x.mean() - 4.0508) <= 0.01))
    x = sample_gamma(GammaParams(2.0, 2.5), RngStream(SEED, (9, 2)), size=1_000_000)
    checks.append(("gamma", x.mean(), 5.0, abs(x.mean() / 5.0 - 1) <= 0.02))
    for k, p_a in enumerate((0.5, 0.7, 0.9)):
        trace = generate_trace(params_from_availability(p_a), 1e6, RngStream(SEED, (9, 3, k)))
        frac = trace.on_fraction()
        checks.append((f"link P_A={p_a}", frac, p_a, abs(frac - p_a) <= 0.01))
    ok = all(c[3] for c in checks)
    report(9, ok, "; ".join(f"{name} {got:.4f} (target {want:g})" for name, got, want, _ in checks))
    assert ok


def _snapshot(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_c10_reruns_are_byte_identical(tmp_path):
    configs = {
        "single": {"mode": "single", "seed": 42},
        "sweep": {
            "mode": "sweep",
            "seed": 42,
            "sweep": {"beta_si": [10, 30], "beta_dw": [20], "p_a_levels": [1.0, 0.6], "replications": 3},
        },
        "oracle": {"mode": "oracle", "oracle": {"beta_si": [5, 25, 45], "beta_dw": [5, 25]}},
        "validate": {"mode": "validate", "seed": 42, "validate": {"beta_si": [10], "beta_dw": [10, 40], "replications": 5}},
    }
    differing = []
    for name, cfg in configs.items():
        path = tmp_path / f"{name}.json"
        path.write_text(json.dumps(cfg))
        outs = []
        for k in range(2):
            out = tmp_path / f"{name}_{k}"
            code = run_cli(["--config", str(path), "--out", str(out), "--quiet"])
            assert code in (0, 2)
            outs.append(_snapshot(out))
        if outs[0] != outs[1] or not outs[0]:
            differing.append(name)
    ok = not differing
    report(10, ok, f"modes rerun with the same config and seed: {len(configs) - len(differing)}/{len(configs)} byte-identical")
    assert ok


# the global safety checks run last and also pull in every run above


def _all_reports():
    ideal_grid()
    for scenario in ("voice", "rpas"):
        for p_a in (1.0, 0.5):
            cell_runs(30.0, 30.0, scenario, p_a, PAIRED_REPS)
    return list(_SEEN)


def test_c03_saturation_ceiling():
    reports = _all_reports()
    peak = max(r.max_throughput_per_hour for r in reports)
    ok = peak <= CEILING
    report(3, ok, f"peak single-run throughput {peak:.2f} AC/h over {len(reports)} reports (ceiling {CEILING})")
    assert ok


def test_c04_separation_invariant():
    reports = _all_reports()
    gap = min(r.min_separation_s for r in reports)
    ok = gap >= T_SEP
    report(4, ok, f"smallest landing gap {gap:.6f} s over {len(reports)} reports (minimum {T_SEP:g} s)")
    assert ok


@pytest.mark.slow
def test_long_horizon_convergence_near_capacity():
    # supplementary, not a criterion: the 1 h shortfall near capacity is a
    # finite-horizon transient and closes as the horizon grows
    cells = [(25.0, 25.0), (30.0, 50.0), (5.0, 45.0)]
    spec_h = 36000.0
    for bs, bd in cells:
        runs = replicate(bs, bd, SimParams(horizon=spec_h), UncertaintyConfig.ideal(), 20, SEED)
        tp = np.mean([r.throughput_per_hour for r in runs])
        assert tp == pytest.approx(theoretical_throughput(OracleInput(bs, bd)), abs=1.0)
