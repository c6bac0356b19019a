"""Straight-in and downwind entry streams as separated renewal processes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from runway_merge.uncertainty import RngStream

SECONDS_PER_HOUR = 3600.0
ARRIVAL_STARTS = ("stationary", "renewal")


class InfeasibleRateError(ValueError):
    """Requested rate is at or above the separation ceiling ``3600 / t_sep``."""


@dataclass(frozen=True)
class SeparationSpec:
    """Inputs that fix the single landing separation ``t_sep_s``.

    ``t_sep_s`` is the larger of the threshold spacing in seconds and the
    runway occupancy time. The threshold spacing defaults to 64 s, the rounded
    value of 2.5 nm at 140 kt; set ``threshold_spacing_s=None`` to derive it
    from distance and speed instead.
    """

    final_approach_separation_nm: float = 2.5
    approach_speed_kt: float = 140.0
    runway_occupancy_s: float = 64.0
    threshold_spacing_s: float | None = 64.0

    def __post_init__(self) -> None:
        if self.final_approach_separation_nm <= 0 or self.approach_speed_kt <= 0:
            raise ValueError("separation distance and approach speed must be > 0")
        if self.runway_occupancy_s < 0:
            raise ValueError("runway occupancy must be >= 0")

    @property
    def spacing_from_distance_s(self) -> float:
        return SECONDS_PER_HOUR * self.final_approach_separation_nm / self.approach_speed_kt

    @property
    def t_sep_s(self) -> float:
        spacing = self.threshold_spacing_s
        if spacing is None:
            spacing = self.spacing_from_distance_s
        return max(spacing, self.runway_occupancy_s)


@dataclass(frozen=True)
class StreamParams:
    """Arrival stream: exponential rate ``lam`` (1/s) on top of ``t_sep`` seconds.

    ``start="stationary"`` draws the first entry from the forward-recurrence
    distribution, so the stream is already in equilibrium at t=0 and the
    expected count in ``[0, h)`` is exactly ``h / mean_gap``. ``"renewal"``
    places the first entry one full gap after t=0.
    """

    lam: float
    t_sep: float = 64.0
    start: str = "stationary"

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError("stream rate must be > 0")
        if not self.t_sep >= 0:
            raise ValueError("t_sep must be >= 0")
        if self.start not in ARRIVAL_STARTS:
            raise ValueError(f"unknown arrival start {self.start!r}")

    @classmethod
    def from_beta(
        cls, beta_per_hour: float, t_sep: float = 64.0, start: str = "stationary"
    ) -> StreamParams:
        return cls(lambda_of_beta(beta_per_hour, t_sep), t_sep, start)


@dataclass(frozen=True)
class ArrivalStreams:
    straight_in_entries: np.ndarray
    downwind_entries: np.ndarray
    horizon: float
    t_sep: float = 64.0

    def __post_init__(self) -> None:
        for name in ("straight_in_entries", "downwind_entries"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.size and (arr[0] < 0 or arr[-1] >= self.horizon):
                raise ValueError(f"{name} must lie in [0, horizon)")
            if arr.size > 1 and np.min(np.diff(arr)) < self.t_sep:
                raise ValueError(f"{name} violates the minimum gap {self.t_sep}")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def beta_of(params: StreamParams) -> float:
    """Effective arrival rate in aircraft per hour."""
    return SECONDS_PER_HOUR / (params.t_sep + 1.0 / params.lam)


def lambda_of_beta(beta: float, t_sep: float) -> float:
    """Invert :func:`beta_of`: exponential rate (1/s) giving ``beta`` per hour."""
    if not beta > 0:
        raise ValueError("beta must be > 0")
    ceiling = SECONDS_PER_HOUR / t_sep if t_sep > 0 else math.inf
    if beta >= ceiling:
        raise InfeasibleRateError(
            f"beta={beta} AC/h is not below the separation ceiling {ceiling} AC/h"
        )
    return 1.0 / (SECONDS_PER_HOUR / beta - t_sep)


def generate_stream(params: StreamParams, horizon: float, rng: RngStream) -> np.ndarray:
    """Entry times in ``[0, horizon)``.

    Every gap after the first is a fresh ``t_sep + Exp(lam)`` draw; the first
    entry follows ``params.start``.
    """
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    gen = rng.generator
    scale = 1.0 / params.lam
    mean_gap = params.t_sep + scale
    chunk = int(horizon / mean_gap * 1.2) + 16
    parts: list[np.ndarray] = []
    last = 0.0
    if params.start == "stationary":
        # forward recurrence time: uniform over the separation part with
        # probability t_sep / mean_gap, else t_sep plus a fresh exponential
        if gen.random() < params.t_sep / mean_gap:
            last = float(gen.uniform(0.0, params.t_sep))
        else:
            last = params.t_sep + float(gen.exponential(scale))
        parts.append(np.array([last]))
    while last < horizon:
        times = last + np.cumsum(params.t_sep + gen.exponential(scale, size=chunk))
        parts.append(times)
        last = float(times[-1])
    entries = np.concatenate(parts)
    entries = entries[: int(np.searchsorted(entries, horizon, side="left"))]
    entries = _enforce_min_gap(entries, params.t_sep)
    return entries[entries < horizon]


def _enforce_min_gap(entries: np.ndarray, t_sep: float) -> np.ndarray:
    # a cumulative sum can shave an ulp off a gap that was drawn as exactly t_sep
    bad = np.flatnonzero(np.diff(entries) < t_sep)
    if bad.size:
        for j in range(int(bad[0]) + 1, len(entries)):
            while entries[j] - entries[j - 1] < t_sep:
                entries[j] = np.nextafter(entries[j], np.inf)
    return entries


def generate_streams(
    straight_in: StreamParams,
    downwind: StreamParams,
    horizon: float,
    rng: RngStream,
) -> ArrivalStreams:
    """Both streams, drawn from independent children of ``rng``."""
    si = generate_stream(straight_in, horizon, rng.child(0))
    dw = generate_stream(downwind, horizon, rng.child(1))
    return ArrivalStreams(si, dw, horizon, min(straight_in.t_sep, downwind.t_sep))
