"""Two-state (on/off) CTMC model of the controller-pilot communication link."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from runway_merge.uncertainty import GammaParams, RngStream, sample_gamma


@dataclass(frozen=True)
class CommLinkParams:
    """Transition rates of the link chain, both per second.

    ``rate_to_on`` is the rate of leaving the off state (repair),
    ``rate_to_off`` the rate of leaving the on state (failure).
    """

    rate_to_on: float
    rate_to_off: float

    def __post_init__(self) -> None:
        if not self.rate_to_on > 0:
            raise ValueError("rate_to_on must be > 0")
        if not self.rate_to_off >= 0:
            raise ValueError("rate_to_off must be >= 0")

    @property
    def availability(self) -> float:
        return availability_of(self)


def availability_of(params: CommLinkParams) -> float:
    return params.rate_to_on / (params.rate_to_on + params.rate_to_off)


def continuity_of(params: CommLinkParams, duration: float) -> float:
    """Probability an on-period outlasts ``duration`` seconds."""
    if duration < 0:
        raise ValueError("duration must be >= 0")
    return math.exp(-params.rate_to_off * duration)


def params_from_availability(p_a: float, mean_outage: float = 10.0) -> CommLinkParams:
    if not (0 < p_a <= 1):
        raise ValueError("p_a must lie in (0, 1]")
    if not mean_outage > 0:
        raise ValueError("mean_outage must be > 0")
    rate_to_on = 1.0 / mean_outage
    return CommLinkParams(rate_to_on=rate_to_on, rate_to_off=rate_to_on * (1.0 - p_a) / p_a)


@dataclass(frozen=True)
class LatencySpec:
    """One-way system latency: a fixed value or a Gamma-distributed draw."""

    mode: Literal["deterministic", "distribution"] = "deterministic"
    value: float = 0.5
    params: GammaParams | None = None

    def __post_init__(self) -> None:
        if self.mode == "deterministic":
            if not self.value >= 0:
                raise ValueError("deterministic latency must be >= 0")
        elif self.mode == "distribution":
            if self.params is None:
                raise ValueError("distribution latency needs Gamma params")
        else:
            raise ValueError(f"unknown latency mode {self.mode!r}")

    def sample(self, rng: RngStream, size=None):
        if self.mode == "deterministic":
            return float(self.value) if size is None else np.full(size, float(self.value))
        return sample_gamma(self.params, rng, size=size)


class CommTrace:
    """Alternating on/off timeline tiling ``[0, horizon]``.

    Segments are half-open ``[start, end)``; the final one is closed at the
    horizon. Construct from explicit ``(start, end, state)`` tuples or use
    :func:`generate_trace`.
    """

    def __init__(self, segments, horizon: float | None = None):
        segs = [(float(a), float(b), _as_on(s)) for a, b, s in segments]
        if not segs:
            raise ValueError("a trace needs at least one segment")
        if horizon is None:
            horizon = segs[-1][1]
        self.horizon = float(horizon)
        self.starts = np.array([s[0] for s in segs])
        self.ends = np.array([s[1] for s in segs])
        self.on = np.array([s[2] for s in segs], dtype=bool)
        self._validate()

    @classmethod
    def _from_arrays(cls, starts, ends, on, horizon) -> CommTrace:
        obj = cls.__new__(cls)
        obj.starts, obj.ends, obj.on, obj.horizon = starts, ends, on, float(horizon)
        obj._validate()
        return obj

    @classmethod
    def constant(cls, horizon: float, on: bool = True) -> CommTrace:
        return cls([(0.0, horizon, on)], horizon)

    def _validate(self) -> None:
        if self.starts[0] != 0.0 or self.ends[-1] != self.horizon:
            raise ValueError("segments must tile [0, horizon]")
        if np.any(self.starts[1:] != self.ends[:-1]):
            raise ValueError("segments must be contiguous")
        if np.any(self.ends < self.starts):
            raise ValueError("segment ends before it starts")
        if np.any(self.on[1:] == self.on[:-1]):
            raise ValueError("adjacent segments must alternate state")
        for arr in (self.starts, self.ends, self.on):
            arr.flags.writeable = False

    @property
    def segments(self) -> list[tuple[float, float, str]]:
        return [
            (float(a), float(b), "on" if s else "off")
            for a, b, s in zip(self.starts, self.ends, self.on)
        ]

    def __len__(self) -> int:
        return len(self.starts)

    def on_fraction(self) -> float:
        return float(np.sum((self.ends - self.starts)[self.on]) / self.horizon)

    def available_mask(self, t, duration) -> np.ndarray:
        """Vectorised continuous-availability test.

        Windows reaching past the horizon count as unavailable rather than
        raising, which is what the merge loop wants near the end of a run.
        """
        t = np.asarray(t, dtype=float)
        end = t + np.asarray(duration, dtype=float)
        idx = np.searchsorted(self.starts, t, side="right") - 1
        idx = np.clip(idx, 0, len(self.starts) - 1)
        return self.on[idx] & (end <= self.ends[idx]) & (t >= 0) & (end <= self.horizon)


def _as_on(state) -> bool:
    if isinstance(state, str):
        if state not in ("on", "off"):
            raise ValueError(f"unknown link state {state!r}")
        return state == "on"
    return bool(state)


def is_continuously_available(trace: CommTrace, t: float, duration: float) -> bool:
    """True iff every instant of ``[t, t + duration]`` falls in an on-segment."""
    if t < 0 or duration < 0 or t + duration > trace.horizon:
        raise ValueError(
            f"query [{t}, {t + duration}] outside trace horizon [0, {trace.horizon}]"
        )
    return bool(trace.available_mask(t, duration))


def generate_trace(
    params: CommLinkParams,
    horizon: float,
    rng: RngStream,
    initial_state_rule: Literal["stationary", "always_on"] = "stationary",
) -> CommTrace:
    """Simulate the link chain over ``[0, horizon]``.

    On-periods last ``Exp(rate_to_off)`` and off-periods ``Exp(rate_to_on)``.
    """
    if not horizon > 0:
        raise ValueError("horizon must be > 0")
    gen = rng.generator
    p_a = availability_of(params)
    if initial_state_rule == "stationary":
        start_on = bool(gen.random() < p_a)
    elif initial_state_rule == "always_on":
        start_on = True
    else:
        raise ValueError(f"unknown initial_state_rule {initial_state_rule!r}")
    if params.rate_to_off == 0 and start_on:
        return CommTrace.constant(horizon, on=True)

    mean_on = math.inf if params.rate_to_off == 0 else 1.0 / params.rate_to_off
    mean_off = 1.0 / params.rate_to_on
    # segment i has state start_on xor (i odd)
    first_mean, second_mean = (mean_on, mean_off) if start_on else (mean_off, mean_on)
    chunk = max(64, int(2 * horizon / (mean_on + mean_off)) + 64) if math.isfinite(mean_on) else 2
    durations: list[np.ndarray] = []
    total = 0.0
    while total < horizon:
        pair = np.empty(2 * chunk)
        pair[0::2] = gen.exponential(first_mean, size=chunk) if math.isfinite(first_mean) else np.inf
        pair[1::2] = gen.exponential(second_mean, size=chunk) if math.isfinite(second_mean) else np.inf
        durations.append(pair)
        total += float(pair.sum())
    d = np.concatenate(durations)
    ends = np.cumsum(d)
    n = int(np.searchsorted(ends, horizon, side="left")) + 1
    ends = ends[:n].copy()
    ends[-1] = horizon
    starts = np.concatenate(([0.0], ends[:-1]))
    on = (np.arange(n) % 2 == 0) == start_on
    keep = ends > starts
    keep[0] = True
    if not keep.all():
        # zero-length draws would break alternation; merge them away
        return _merge_degenerate(starts, ends, on, horizon)
    return CommTrace._from_arrays(starts, ends, on, horizon)


def _merge_degenerate(starts, ends, on, horizon) -> CommTrace:
    segs: list[list] = []
    for a, b, s in zip(starts, ends, on):
        if b <= a:
            continue
        if segs and segs[-1][2] == s:
            segs[-1][1] = b
        else:
            segs.append([a, b, s])
    segs[0][0] = 0.0
    return CommTrace([tuple(s) for s in segs], horizon)
