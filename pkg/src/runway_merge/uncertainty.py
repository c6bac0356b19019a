"""Stochastic primitives: seeded streams, samplers and their reference statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream addressed by ``(master_seed, stream_path)``.

    The path is fed to :class:`numpy.random.SeedSequence` as its spawn key, so
    streams are derived positionally: the same path always yields the same
    sequence no matter which other streams were created before it.
    """

    master_seed: int
    stream_path: tuple[int, ...] = ()
    _gen: np.random.Generator | None = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.master_seed < 0 or self.master_seed >= 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        path = tuple(int(p) for p in self.stream_path)
        if any(p < 0 for p in path):
            raise ValueError("stream_path entries must be non-negative")
        object.__setattr__(self, "stream_path", path)
        object.__setattr__(self, "_gen", None)

    def child(self, *tags: int) -> RngStream:
        """Fresh stream whose path extends this one by ``tags``."""
        return RngStream(self.master_seed, self.stream_path + tuple(tags))

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=self.stream_path)
            object.__setattr__(self, "_gen", np.random.Generator(np.random.PCG64(seq)))
        return self._gen


@dataclass(frozen=True)
class ShiftedExpParams:
    shift: float
    rate: float

    def __post_init__(self) -> None:
        if not self.shift >= 0:
            raise ValueError("shift must be >= 0")
        if not self.rate > 0:
            raise ValueError("rate must be > 0")

    @property
    def mean(self) -> float:
        return self.shift + 1.0 / self.rate


@dataclass(frozen=True)
class GammaParams:
    shape: float = 2.0
    scale: float = 2.5

    def __post_init__(self) -> None:
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("Gamma shape and scale must be > 0")

    @classmethod
    def from_mean(cls, mean: float, shape: float = 2.0) -> GammaParams:
        return cls(shape=shape, scale=mean / shape)

    @property
    def mean(self) -> float:
        return self.shape * self.scale

    @property
    def variance(self) -> float:
        return self.shape * self.scale**2


@dataclass(frozen=True)
class TruncNormalParams:
    mu: float = 4.0
    sigma: float = 1.0
    lower: float = 2.0
    upper: float = 7.0

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")
        if not self.lower < self.upper:
            raise ValueError("lower bound must be below upper bound")

    @property
    def mean(self) -> float:
        return trunc_normal_mean(self)


@dataclass(frozen=True)
class LogUniformRange:
    lambda_min: float
    lambda_max: float

    def __post_init__(self) -> None:
        if not (0 < self.lambda_min <= self.lambda_max):
            raise ValueError("need 0 < lambda_min <= lambda_max")

    @property
    def median(self) -> float:
        return math.sqrt(self.lambda_min * self.lambda_max)


def sample_shifted_exp(params: ShiftedExpParams, rng: RngStream, size=None):
    """Draw ``shift + Exp(rate)``; an infinite rate collapses to the shift."""
    x = rng.generator.exponential(1.0 / params.rate, size=size)
    return params.shift + x


def sample_log_uniform(range_: LogUniformRange, rng: RngStream, size=None):
    lo, hi = math.log(range_.lambda_min), math.log(range_.lambda_max)
    u = rng.generator.uniform(lo, hi, size=size)
    # exp(log(x)) can land one ulp outside the range
    return np.clip(np.exp(u), range_.lambda_min, range_.lambda_max)


def sample_gamma(params: GammaParams, rng: RngStream, size=None):
    return rng.generator.gamma(params.shape, params.scale, size=size)


def sample_trunc_normal(params: TruncNormalParams, rng: RngStream, size=None):
    """Rejection sampling from the parent normal (accepted draws keep stream order)."""
    n = 1 if size is None else int(np.prod(size))
    gen = rng.generator
    out = np.empty(n)
    filled = 0
    accept = trunc_normal_acceptance(params)
    if accept < 1e-6:
        raise ValueError("truncation window carries negligible probability mass")
    while filled < n:
        need = n - filled
        batch = max(16, int(need / accept * 1.1) + 4)
        z = gen.normal(params.mu, params.sigma, size=batch)
        z = z[(z >= params.lower) & (z <= params.upper)]
        take = min(need, z.size)
        out[filled : filled + take] = z[:take]
        filled += take
    if size is None:
        return float(out[0])
    return out.reshape(size)


# --- closed-form reference statistics -------------------------------------


def _phi(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _Phi(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def trunc_normal_acceptance(params: TruncNormalParams) -> float:
    """Probability mass of the parent normal inside ``[lower, upper]``."""
    a = (params.lower - params.mu) / params.sigma
    b = (params.upper - params.mu) / params.sigma
    return _Phi(b) - _Phi(a)


def trunc_normal_mean(params: TruncNormalParams) -> float:
    a = (params.lower - params.mu) / params.sigma
    b = (params.upper - params.mu) / params.sigma
    return params.mu + params.sigma * (_phi(a) - _phi(b)) / trunc_normal_acceptance(params)


def trunc_normal_variance(params: TruncNormalParams) -> float:
    a = (params.lower - params.mu) / params.sigma
    b = (params.upper - params.mu) / params.sigma
    z = trunc_normal_acceptance(params)
    t1 = (a * _phi(a) - b * _phi(b)) / z
    t2 = ((_phi(a) - _phi(b)) / z) ** 2
    return params.sigma**2 * (1.0 + t1 - t2)


def shifted_exp_variance(params: ShiftedExpParams) -> float:
    return 1.0 / params.rate**2


def gamma_sf(params: GammaParams, x: float) -> float:
    return float(gammaincc(params.shape, x / params.scale))
