"""Closed-form throughput ceiling for two merging streams with no uncertainty.

A straight-in gap ``t_sep + X`` holds its leading aircraft plus
``floor(X / t_sep)`` downwind merges. Averaging over the exponential ``X``
and dividing by the mean straight-in headway gives the largest total rate the
runway can sustain for a given straight-in rate; realised throughput is the
smaller of that ceiling and the offered demand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from runway_merge.arrivals import SECONDS_PER_HOUR, InfeasibleRateError


@dataclass(frozen=True)
class OracleInput:
    beta_si: float
    beta_dw: float
    t_sep: float = 64.0

    def __post_init__(self) -> None:
        if not (0 < self.beta_si < SECONDS_PER_HOUR / self.t_sep):
            raise InfeasibleRateError(
                f"beta_si must lie in (0, {SECONDS_PER_HOUR / self.t_sep}) AC/h"
            )
        if not self.beta_dw >= 0:
            raise ValueError("beta_dw must be >= 0")


def gap_capacity(x: float, t_sep: float = 64.0) -> int:
    """Aircraft landing in one straight-in gap, the leader included."""
    if x < 0:
        raise ValueError("gap excess must be >= 0")
    return 1 + math.floor(x / t_sep)


def expected_gap_capacity(lambda_si: float, t_sep: float = 64.0) -> float:
    if not lambda_si > 0:
        raise ValueError("lambda_si must be > 0")
    return -1.0 / math.expm1(-lambda_si * t_sep)


def beta_max(beta_si: float, t_sep: float = 64.0) -> float:
    """Throughput ceiling in AC/h given the straight-in rate in AC/h."""
    ceiling = SECONDS_PER_HOUR / t_sep
    if not beta_si > 0:
        raise ValueError("beta_si must be > 0")
    if beta_si >= ceiling:
        raise InfeasibleRateError(f"beta_si={beta_si} reaches the ceiling {ceiling} AC/h")
    mean_excess = SECONDS_PER_HOUR / beta_si - t_sep
    return beta_si * expected_gap_capacity(1.0 / mean_excess, t_sep)


def theoretical_throughput(inp: OracleInput) -> float:
    return min(beta_max(inp.beta_si, inp.t_sep), inp.beta_dw + inp.beta_si)


def oracle_grid(beta_si_values, beta_dw_values, t_sep: float = 64.0) -> list[tuple[float, float, float]]:
    """Rows ``(beta_si, beta_dw, theory)`` over the product of both axes."""
    return [
        (float(bs), float(bd), theoretical_throughput(OracleInput(bs, bd, t_sep)))
        for bs in beta_si_values
        for bd in beta_dw_values
    ]
