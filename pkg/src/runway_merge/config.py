"""JSON run configuration: schema, defaults and validation.

Layout (every key optional)::

    {
      "mode": "single" | "sweep" | "oracle" | "validate",
      "seed": 0,
      "output_dir": "runway_out",
      "threads": null,
      "sim": {"dt": 0.1, "t_base": 60, "t_sep": 64, "horizon": 3600, "scenario": "voice"},
      "uncertainty": {
        "latency": {"mode": "deterministic", "value": 0.5}
                 | {"mode": "distribution", "shape": 2, "scale": 0.25},
        "pilot_response": {"shape": 2, "mean": 5} | null,
        "transaction": {"mu": 4, "sigma": 1, "lower": 2, "upper": 7} | null,
        "comm": {"p_a": 1.0, "mean_outage": 10}
              | {"rate_to_on": 0.1, "rate_to_off": 0.01},
        "initial_state": "stationary" | "always_on",
        "trace_slack_s": 600
      },
      "streams": {"beta_si": 30, "beta_dw": 30},
      "sweep": {"beta_si": [..] | {"log_uniform": [1, 3000], "samples": 10},
                "beta_dw": ..., "p_a_levels": [..], "scenarios": [..],
                "replications": 200, "smoothing_window": 1},
      "oracle": {"beta_si": [..], "beta_dw": [..]},
      "validate": {"beta_si": [..], "beta_dw": [..], "replications": 200, "tolerance": 1.0}
    }
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from runway_merge.arrivals import InfeasibleRateError, lambda_of_beta
from runway_merge.commlink import CommLinkParams, LatencySpec, params_from_availability
from runway_merge.merge_sim import SimParams, UncertaintyConfig
from runway_merge.sweep import DEFAULT_P_A_LEVELS, SweepSpec
from runway_merge.uncertainty import GammaParams, LogUniformRange, TruncNormalParams

MODES = ("single", "sweep", "oracle", "validate")
OUTPUT_ENV = "RUNWAY_MERGE_OUT"
FIVE_TO_FIFTY = tuple(float(b) for b in range(5, 55, 5))


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class ValidateSpec:
    beta_si: tuple[float, ...] = FIVE_TO_FIFTY
    beta_dw: tuple[float, ...] = FIVE_TO_FIFTY
    replications: int = 200
    tolerance: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    mode: str = "single"
    seed: int = 0
    output_dir: str = "runway_out"
    threads: int | None = None
    sim: SimParams = field(default_factory=SimParams)
    unc: UncertaintyConfig = field(default_factory=UncertaintyConfig)
    beta_si: float = 30.0
    beta_dw: float = 30.0
    sweep: SweepSpec = field(default_factory=SweepSpec)
    smoothing_window: int = 1
    oracle_beta_si: tuple[float, ...] = FIVE_TO_FIFTY
    oracle_beta_dw: tuple[float, ...] = FIVE_TO_FIFTY
    validate: ValidateSpec = field(default_factory=ValidateSpec)
    raw: dict = field(default_factory=dict, compare=False)


def _section(d: dict, key: str, allowed: set[str], prefix: str = "") -> dict:
    sub = d.get(key, {})
    path = f"{prefix}{key}"
    if sub is None:
        return {}
    if not isinstance(sub, dict):
        raise ConfigError(path, "must be an object")
    unknown = set(sub) - allowed
    if unknown:
        raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown key")
    return sub


def _num(d: dict, key: str, default, path: str, *, positive=False, nonneg=False, integer=False):
    v = d.get(key, default)
    full = f"{path}.{key}" if path else key
    if v is None:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(full, f"expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(full, "expected an integer")
    if positive and not v > 0:
        raise ConfigError(full, f"must be > 0, got {v}")
    if nonneg and not v >= 0:
        raise ConfigError(full, f"must be >= 0, got {v}")
    return int(v) if integer else float(v)


def _rates(v, path: str, t_sep: float) -> tuple[float, ...]:
    if not isinstance(v, list) or not v:
        raise ConfigError(path, "expected a non-empty list of rates")
    out = []
    for k, b in enumerate(v):
        if isinstance(b, bool) or not isinstance(b, (int, float)) or not b > 0:
            raise ConfigError(f"{path}[{k}]", f"expected a positive rate, got {b!r}")
        out.append(float(b))
    return tuple(out)


def _axis(v, path: str, t_sep: float):
    if isinstance(v, dict):
        extra = set(v) - {"log_uniform", "samples"}
        if extra:
            raise ConfigError(f"{path}.{sorted(extra)[0]}", "unknown key")
        lu = v.get("log_uniform")
        if not (isinstance(lu, list) and len(lu) == 2):
            raise ConfigError(f"{path}.log_uniform", "expected [lambda_min, lambda_max]")
        try:
            rng = LogUniformRange(float(lu[0]), float(lu[1]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}.log_uniform", str(exc)) from None
        samples = _num(v, "samples", 10, path, positive=True, integer=True)
        return rng, samples
    return _rates(v, path, t_sep), None


def _sim(d: dict) -> SimParams:
    s = _section(d, "sim", {"dt", "t_base", "t_sep", "horizon", "scenario", "arrival_start"})
    scenario = s.get("scenario", "voice")
    if scenario not in ("voice", "rpas"):
        raise ConfigError("sim.scenario", f"expected 'voice' or 'rpas', got {scenario!r}")
    start = s.get("arrival_start", "stationary")
    if start not in ("stationary", "renewal"):
        raise ConfigError(
            "sim.arrival_start", f"expected 'stationary' or 'renewal', got {start!r}"
        )
    return SimParams(
        dt=_num(s, "dt", 0.1, "sim", positive=True),
        t_base=_num(s, "t_base", 60.0, "sim", positive=True),
        t_sep=_num(s, "t_sep", 64.0, "sim", positive=True),
        horizon=_num(s, "horizon", 3600.0, "sim", positive=True),
        scenario=scenario,
        arrival_start=start,
    )


def _gamma(d: dict, path: str, default_mean: float) -> GammaParams:
    extra = set(d) - {"shape", "scale", "mean", "mode"}
    if extra:
        raise ConfigError(f"{path}.{sorted(extra)[0]}", "unknown key")
    shape = _num(d, "shape", 2.0, path, positive=True)
    if "scale" in d and "mean" in d:
        raise ConfigError(f"{path}.scale", "give either scale or mean, not both")
    if "scale" in d:
        return GammaParams(shape, _num(d, "scale", None, path, positive=True))
    return GammaParams.from_mean(_num(d, "mean", default_mean, path, positive=True), shape)


def _uncertainty(d: dict) -> tuple[UncertaintyConfig, float]:
    u = _section(
        d,
        "uncertainty",
        {"latency", "pilot_response", "transaction", "comm", "initial_state", "trace_slack_s"},
    )
    lat = u.get("latency", {}) or {}
    mode = lat.get("mode", "deterministic")
    if mode == "deterministic":
        extra = set(lat) - {"mode", "value"}
        if extra:
            raise ConfigError(f"uncertainty.latency.{sorted(extra)[0]}", "unknown key")
        latency = LatencySpec("deterministic", _num(lat, "value", 0.5, "uncertainty.latency", nonneg=True))
    elif mode == "distribution":
        latency = LatencySpec("distribution", params=_gamma(lat, "uncertainty.latency", 0.5))
    else:
        raise ConfigError("uncertainty.latency.mode", f"unknown mode {mode!r}")

    if "pilot_response" in u and u["pilot_response"] is None:
        pilot = None
    else:
        pr = u.get("pilot_response", {})
        if not isinstance(pr, dict):
            raise ConfigError("uncertainty.pilot_response", "must be an object or null")
        pilot = _gamma(pr, "uncertainty.pilot_response", 5.0)

    if "transaction" in u and u["transaction"] is None:
        transaction = None
    else:
        tn = _section(u, "transaction", {"mu", "sigma", "lower", "upper"}, "uncertainty.")
        p = "uncertainty.transaction"
        mu = _num(tn, "mu", 4.0, p)
        sigma = _num(tn, "sigma", 1.0, p, positive=True)
        lower = _num(tn, "lower", 2.0, p)
        upper = _num(tn, "upper", 7.0, p)
        if not lower < upper:
            raise ConfigError(f"{p}.upper", "must exceed lower")
        transaction = TruncNormalParams(mu, sigma, lower, upper)

    c = _section(u, "comm", {"p_a", "mean_outage", "rate_to_on", "rate_to_off"}, "uncertainty.")
    p = "uncertainty.comm"
    mean_outage = _num(c, "mean_outage", 10.0, p, positive=True)
    if "rate_to_on" in c or "rate_to_off" in c:
        if "p_a" in c:
            raise ConfigError(f"{p}.p_a", "give either p_a or explicit rates, not both")
        comm = CommLinkParams(
            _num(c, "rate_to_on", 1.0, p, positive=True),
            _num(c, "rate_to_off", 0.0, p, nonneg=True),
        )
    else:
        p_a = _num(c, "p_a", 1.0, p)
        if not (0 < p_a <= 1):
            raise ConfigError(f"{p}.p_a", f"must lie in (0, 1], got {p_a}")
        comm = params_from_availability(p_a, mean_outage)

    rule = u.get("initial_state", "stationary")
    if rule not in ("stationary", "always_on"):
        raise ConfigError("uncertainty.initial_state", f"unknown rule {rule!r}")
    slack = _num(u, "trace_slack_s", 600.0, "uncertainty", nonneg=True)
    unc = UncertaintyConfig(latency, pilot, transaction, comm, rule, slack)
    return unc, mean_outage


def _check_feasible(beta: float, t_sep: float, key: str) -> None:
    try:
        lambda_of_beta(beta, t_sep)
    except InfeasibleRateError as exc:
        raise ConfigError(key, str(exc)) from None


def parse_config(d: dict) -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    top = {"mode", "seed", "output_dir", "threads", "sim", "uncertainty", "streams",
           "sweep", "oracle", "validate"}
    unknown = set(d) - top
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    mode = d.get("mode", "single")
    if mode not in MODES:
        raise ConfigError("mode", f"expected one of {MODES}, got {mode!r}")
    seed = _num(d, "seed", 0, "", nonneg=True, integer=True)
    if seed >= 2**64:
        raise ConfigError("seed", "must fit in 64 bits")
    out = d.get("output_dir", os.environ.get(OUTPUT_ENV, "runway_out"))
    if not isinstance(out, str) or not out:
        raise ConfigError("output_dir", "expected a path string")
    threads = _num(d, "threads", None, "", positive=True, integer=True)

    sim = _sim(d)
    unc, mean_outage = _uncertainty(d)

    st = _section(d, "streams", {"beta_si", "beta_dw"})
    beta_si = _num(st, "beta_si", 30.0, "streams", positive=True)
    beta_dw = _num(st, "beta_dw", 30.0, "streams", positive=True)
    _check_feasible(beta_si, sim.t_sep, "streams.beta_si")
    _check_feasible(beta_dw, sim.t_sep, "streams.beta_dw")

    sw = _section(d, "sweep", {"beta_si", "beta_dw", "p_a_levels", "scenarios",
                               "replications", "smoothing_window"})
    axes = {}
    samples = 10
    for key in ("beta_si", "beta_dw"):
        axis, n = _axis(sw.get(key, [5, 10, 20, 30, 40, 50]), f"sweep.{key}", sim.t_sep)
        axes[key] = axis
        samples = n or samples
    levels = sw.get("p_a_levels", list(DEFAULT_P_A_LEVELS))
    if not isinstance(levels, list) or not levels:
        raise ConfigError("sweep.p_a_levels", "expected a non-empty list")
    for k, p in enumerate(levels):
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not (0 < p <= 1):
            raise ConfigError(f"sweep.p_a_levels[{k}]", f"must lie in (0, 1], got {p!r}")
    scenarios = sw.get("scenarios", ["voice", "rpas"])
    if not isinstance(scenarios, list) or not scenarios or any(s not in ("voice", "rpas") for s in scenarios):
        raise ConfigError("sweep.scenarios", "expected a non-empty subset of ['voice', 'rpas']")
    reps = _num(sw, "replications", 200, "sweep", positive=True, integer=True)
    window = _num(sw, "smoothing_window", 1, "sweep", positive=True, integer=True)
    if window % 2 == 0:
        raise ConfigError("sweep.smoothing_window", "must be odd")
    sweep = SweepSpec(
        beta_si_axis=axes["beta_si"],
        beta_dw_axis=axes["beta_dw"],
        p_a_levels=tuple(float(p) for p in levels),
        scenarios=tuple(scenarios),
        replications_per_cell=reps,
        master_seed=seed,
        horizon=sim.horizon,
        sim=sim,
        unc=unc,
        mean_outage_s=mean_outage,
        log_axis_samples=samples,
    )

    orc = _section(d, "oracle", {"beta_si", "beta_dw"})
    o_si = _rates(orc.get("beta_si", list(FIVE_TO_FIFTY)), "oracle.beta_si", sim.t_sep)
    o_dw = _rates(orc.get("beta_dw", list(FIVE_TO_FIFTY)), "oracle.beta_dw", sim.t_sep)
    for k, b in enumerate(o_si):
        _check_feasible(b, sim.t_sep, f"oracle.beta_si[{k}]")

    va = _section(d, "validate", {"beta_si", "beta_dw", "replications", "tolerance"})
    validate = ValidateSpec(
        beta_si=_rates(va.get("beta_si", list(FIVE_TO_FIFTY)), "validate.beta_si", sim.t_sep),
        beta_dw=_rates(va.get("beta_dw", list(FIVE_TO_FIFTY)), "validate.beta_dw", sim.t_sep),
        replications=_num(va, "replications", 200, "validate", positive=True, integer=True),
        tolerance=_num(va, "tolerance", 1.0, "validate", positive=True),
    )
    for key in ("beta_si", "beta_dw"):
        for k, b in enumerate(getattr(validate, key)):
            _check_feasible(b, sim.t_sep, f"validate.{key}[{k}]")

    return RunConfig(
        mode=mode, seed=seed, output_dir=out, threads=threads, sim=sim, unc=unc,
        beta_si=beta_si, beta_dw=beta_dw, sweep=sweep, smoothing_window=window,
        oracle_beta_si=o_si, oracle_beta_dw=o_dw, validate=validate, raw=d,
    )


def load_config(path: str | os.PathLike) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(str(path), "config file not found") from None
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON ({exc})") from None
    return parse_config(data)
