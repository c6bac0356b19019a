"""Command-line entry point: ``runway-merge --config run.json --mode sweep``.

Exit codes: 0 success, 1 configuration or input error, 2 the validation
check exceeded its tolerance.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from runway_merge import __version__
from runway_merge.config import MODES, OUTPUT_ENV, ConfigError, RunConfig, load_config, parse_config
from runway_merge.export import (
    SCHEMA_VERSION,
    report_dict,
    write_csv,
    write_json,
    write_oracle_csv,
    write_records_csv,
    write_sweep,
)
from runway_merge.merge_sim import UncertaintyConfig
from runway_merge.metrics import compute_metrics
from runway_merge.oracle import OracleInput, oracle_grid, theoretical_throughput
from runway_merge.sweep import SweepSpec, run_replication, run_sweep, smooth_contours
from runway_merge.uncertainty import RngStream


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="runway-merge", description=__doc__.splitlines()[0])
    p.add_argument("--config", type=Path, help="JSON run configuration")
    p.add_argument("--mode", choices=MODES, help="override the configured mode")
    p.add_argument("--seed", type=int, help="master seed (0 <= seed < 2**64)")
    p.add_argument("--out", type=Path, help=f"output directory (default ${OUTPUT_ENV} or ./runway_out)")
    p.add_argument("--scenario", choices=("voice", "rpas"), help="restrict to one scenario")
    p.add_argument("--reps", type=int, help="replications per cell (sweep/validate)")
    p.add_argument("--threads", type=int, help="worker processes (default: all CPUs)")
    p.add_argument("--quiet", action="store_true", help="suppress progress output")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _asdict(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _asdict(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.name != "raw"}
    if isinstance(obj, (list, tuple)):
        return [_asdict(v) for v in obj]
    if isinstance(obj, float) and obj == float("inf"):
        return None
    return obj


def _config_dict(cfg: RunConfig) -> dict:
    # where outputs go and how many workers ran do not affect their content
    d = _asdict(cfg)
    for key in ("output_dir", "threads"):
        d.pop(key)
    return d


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    raw = dict(cfg.raw)
    if args.mode is not None:
        raw["mode"] = args.mode
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = str(args.out)
    if args.threads is not None:
        raw["threads"] = args.threads
    if args.scenario is not None:
        raw["sim"] = dict(raw.get("sim") or {}, scenario=args.scenario)
        raw["sweep"] = dict(raw.get("sweep") or {}, scenarios=[args.scenario])
    if args.reps is not None:
        raw["sweep"] = dict(raw.get("sweep") or {}, replications=args.reps)
        raw["validate"] = dict(raw.get("validate") or {}, replications=args.reps)
    return parse_config(raw)


def _manifest(cfg: RunConfig, files: list[str], **extra) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "software_version": __version__,
        "seed": cfg.seed,
        "mode": cfg.mode,
        "config": _config_dict(cfg),
        "files": files,
        **extra,
    }


def _run_single(cfg: RunConfig, out: Path, log) -> int:
    rng = RngStream(cfg.seed, (0, 0))
    result = run_replication(cfg.beta_si, cfg.beta_dw, cfg.sim, cfg.unc, rng)
    report = compute_metrics(result)
    write_records_csv(result, out / "records.csv")
    write_json(out / "metrics.json", report_dict(report))
    write_json(out / "manifest.json", _manifest(cfg, ["records.csv", "metrics.json"]))
    log(
        f"throughput {report.throughput_per_hour:.2f} AC/h, "
        f"{report.merged_count}/{report.downwind_count} downwind merged"
    )
    return 0


def _run_sweep(cfg: RunConfig, out: Path, log) -> int:
    grids = run_sweep(cfg.sweep, workers=cfg.threads)
    if cfg.smoothing_window > 1:
        grids = [smooth_contours(g, cfg.smoothing_window) for g in grids]
    write_sweep(grids, out, _config_dict(cfg), cfg.seed)
    log(f"wrote {len(grids)} grid sets to {out}")
    return 0


def _run_oracle(cfg: RunConfig, out: Path, log) -> int:
    rows = oracle_grid(cfg.oracle_beta_si, cfg.oracle_beta_dw, cfg.sim.t_sep)
    write_oracle_csv(rows, out / "oracle.csv")
    write_json(out / "manifest.json", _manifest(cfg, ["oracle.csv"]))
    log(f"wrote {len(rows)} oracle rows")
    return 0


def _run_validate(cfg: RunConfig, out: Path, log) -> int:
    v = cfg.validate
    spec = SweepSpec(
        beta_si_axis=v.beta_si,
        beta_dw_axis=v.beta_dw,
        p_a_levels=(1.0,),
        scenarios=("voice",),
        replications_per_cell=v.replications,
        master_seed=cfg.seed,
        horizon=cfg.sim.horizon,
        sim=cfg.sim,
        unc=UncertaintyConfig.ideal(),
    )
    (grid,) = run_sweep(spec, workers=cfg.threads)
    rows, worst = [], 0.0
    for i, bs in enumerate(grid.beta_si):
        for j, bd in enumerate(grid.beta_dw):
            sim_tp = grid.cells[i][j].throughput_per_hour
            theory = theoretical_throughput(OracleInput(bs, bd, cfg.sim.t_sep))
            err = abs(sim_tp - theory)
            worst = max(worst, err)
            rows.append((bs, bd, sim_tp, theory, err, err <= v.tolerance))
    header = ["beta_si", "beta_dw", "simulated", "theory", "abs_error", "within_tolerance"]
    write_csv(out / "validation.csv", header, rows)
    passed = worst <= v.tolerance
    write_json(
        out / "manifest.json",
        _manifest(cfg, ["validation.csv"], max_abs_error=worst, tolerance=v.tolerance, passed=passed),
    )
    log(f"max |simulated - theory| = {worst:.3f} AC/h (tolerance {v.tolerance}): {'PASS' if passed else 'FAIL'}")
    return 0 if passed else 2


_DISPATCH = {"single": _run_single, "sweep": _run_sweep, "oracle": _run_oracle, "validate": _run_validate}


def run_cli(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad flags; keep 2 reserved for failed validation
        return 0 if exc.code == 0 else 1
    log = (lambda msg: None) if args.quiet else (lambda msg: print(msg, file=sys.stderr))
    try:
        cfg = load_config(args.config) if args.config else parse_config({})
        cfg = _apply_overrides(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out = Path(cfg.output_dir)
    try:
        return _DISPATCH[cfg.mode](cfg, out, log)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
