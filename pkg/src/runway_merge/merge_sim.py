"""Discrete-event merge of downwind traffic into a straight-in landing queue.

Each downwind aircraft runs the same loop from its entry time ``t``:

1. the link must stay up over ``[t, t + tau_msg]``, otherwise ``t += dt``;
2. draw latency ``eps`` and pilot response ``eta`` and propose a merge at
   ``t + eps + eta + t_base``;
3. the proposal must sit ``t_sep`` clear of both queue neighbours, otherwise
   ``t += dt``;
4. commit: the turn starts at ``t + eps + eta`` and ends ``t_base`` later;
5. when the turn ends the gap is checked again against the queue as it is
   then; on failure the aircraft restarts its loop from the turn start;
6. on success the landing is inserted into the queue.

Evaluations never modify the queue, only step 6 does, and a commit can only
add a landing at least ``t_base`` after the evaluation that produced it. The
engine exploits this by testing whole runs of ``dt`` steps at once with numpy
while the queue is known to be frozen. Every aircraft owns a private draw
table indexed by attempt number, so batching never changes a result.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from runway_merge.arrivals import ArrivalStreams
from runway_merge.commlink import (
    CommLinkParams,
    CommTrace,
    LatencySpec,
    generate_trace,
    params_from_availability,
)
from runway_merge.uncertainty import (
    GammaParams,
    RngStream,
    TruncNormalParams,
    trunc_normal_acceptance,
)

Scenario = Literal["voice", "rpas"]

_DRAW_CHUNK = 256
_MAX_BATCH = 4096
_VERIFY, _EVALUATE = 0, 1


class SeparationViolation(AssertionError):
    """Raised if a landing is ever inserted closer than ``t_sep`` to a neighbour."""


@dataclass(frozen=True)
class SimParams:
    dt: float = 0.1
    t_base: float = 60.0
    t_sep: float = 64.0
    horizon: float = 3600.0
    scenario: Scenario = "voice"
    arrival_start: str = "stationary"

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if not self.t_base > 0:
            raise ValueError("t_base must be > 0")
        if not self.t_sep > 0:
            raise ValueError("t_sep must be > 0")
        if not self.horizon > 0:
            raise ValueError("horizon must be > 0")
        if self.scenario not in ("voice", "rpas"):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if self.arrival_start not in ("stationary", "renewal"):
            raise ValueError(f"unknown arrival start {self.arrival_start!r}")


@dataclass(frozen=True)
class UncertaintyConfig:
    """Latency, pilot response, message transaction and link settings.

    ``pilot_response=None`` means an instantaneous pilot and
    ``transaction=None`` an instantaneous voice exchange. ``transaction`` is
    only used in the voice scenario; RPAS transactions are shorter than ``dt``
    and count as zero.
    """

    latency: LatencySpec = field(default_factory=LatencySpec)
    pilot_response: GammaParams | None = field(default_factory=GammaParams)
    transaction: TruncNormalParams | None = field(default_factory=TruncNormalParams)
    comm: CommLinkParams = field(default_factory=lambda: params_from_availability(1.0))
    initial_state_rule: Literal["stationary", "always_on"] = "stationary"
    trace_slack_s: float = 600.0

    @classmethod
    def ideal(cls) -> UncertaintyConfig:
        """No latency, instant pilot, instant exchange, perfect link."""
        return cls(
            latency=LatencySpec("deterministic", 0.0),
            pilot_response=None,
            transaction=None,
            comm=params_from_availability(1.0),
        )

    def trace_for(self, horizon: float, rng: RngStream) -> CommTrace:
        return generate_trace(
            self.comm, horizon + self.trace_slack_s, rng, self.initial_state_rule
        )


class LandingQueue:
    """Time-ordered landing schedule with a hard separation guard."""

    def __init__(self, t_sep: float):
        self.t_sep = float(t_sep)
        self._times: list[float] = []
        self._origins: list[str] = []
        self._padded: np.ndarray | None = None

    @classmethod
    def from_times(cls, times, t_sep: float, origin: str = "straight_in") -> LandingQueue:
        q = cls(t_sep)
        for t in times:
            q.insert(float(t), origin)
        return q

    def __len__(self) -> int:
        return len(self._times)

    @property
    def times(self) -> np.ndarray:
        return np.array(self._times)

    @property
    def origins(self) -> list[str]:
        return list(self._origins)

    def find_gap(self, t: float) -> int | None:
        """Insertion index of the gap admitting ``t``, or ``None``.

        Index ``k`` names the gap between ``times[k-1]`` and ``times[k]``;
        the ends of the queue are open-ended gaps.
        """
        k = bisect.bisect_right(self._times, t)
        if k > 0 and t - self._times[k - 1] < self.t_sep:
            return None
        if k < len(self._times) and self._times[k] - t < self.t_sep:
            return None
        return k

    def feasible(self, t: np.ndarray) -> np.ndarray:
        if self._padded is None:
            self._padded = np.concatenate(([-math.inf], self._times, [math.inf]))
        qp = self._padded
        k = np.searchsorted(qp[1:-1], t, side="right")
        return (t - qp[k] >= self.t_sep) & (qp[k + 1] - t >= self.t_sep)

    def insert(self, t: float, origin: str) -> int:
        k = self.find_gap(t)
        if k is None:
            raise SeparationViolation(f"landing at {t:.3f}s breaks the {self.t_sep}s minimum")
        self._times.insert(k, t)
        self._origins.insert(k, origin)
        self._padded = None
        return k

    def min_gap(self) -> float:
        if len(self._times) < 2:
            return math.inf
        return float(np.min(np.diff(self._times)))


def find_gap(queue: LandingQueue, t_candidate: float, t_sep: float | None = None) -> int | None:
    if t_sep is not None and t_sep != queue.t_sep:
        queue = LandingQueue.from_times(queue.times, t_sep)
    return queue.find_gap(t_candidate)


@dataclass
class DownwindRecord:
    entry_time: float
    status: Literal["merged", "unmerged_at_horizon"] = "unmerged_at_horizon"
    turn_time: float | None = None
    merge_time: float | None = None
    hold_time: float | None = None
    evaluation_count: int = 0
    first_attempt_success: bool = False

    @property
    def merged(self) -> bool:
        return self.status == "merged"


@dataclass
class SimResult:
    final_queue: LandingQueue
    downwind_records: list[DownwindRecord]
    landed_count: int
    horizon: float
    seed_path: tuple[int, tuple[int, ...]] | None = None

    @property
    def merged_count(self) -> int:
        return sum(r.merged for r in self.downwind_records)


class _DrawStream:
    """Lazily extended sequence of draws from one generator.

    Numpy draws values one after another, so extending in any pattern of
    chunk sizes reproduces the same sequence; value ``n`` is fixed by the seed.
    """

    __slots__ = ("_rng", "_draw", "_buf", "_pos")

    def __init__(self, rng: RngStream, draw):
        self._rng = rng
        self._draw = draw
        self._buf = np.empty(0)
        self._pos = 0

    def peek(self, n: int) -> np.ndarray:
        have = len(self._buf) - self._pos
        if have < n:
            fresh = [self._buf[self._pos :]]
            while have < n:
                more = self._draw(self._rng.generator, max(n - have, _DRAW_CHUNK))
                fresh.append(more)
                have += len(more)
            self._buf = np.concatenate(fresh)
            self._pos = 0
        return self._buf[self._pos : self._pos + n]

    def consume(self, n: int) -> None:
        self._pos += n


def _trunc_normal_draw(params: TruncNormalParams):
    accept = trunc_normal_acceptance(params)

    def draw(gen, m):
        # keep every accepted value so the accepted sequence stays fixed
        z = gen.normal(params.mu, params.sigma, size=int(m / accept) + 8)
        return z[(z >= params.lower) & (z <= params.upper)]

    return draw


class _AttemptDraws:
    """Per-aircraft draws of (tau_msg, eps, eta); entry ``n`` belongs to attempt ``n``."""

    __slots__ = ("_streams",)

    def __init__(self, rng: RngStream, unc: UncertaintyConfig, voice: bool):
        streams = []
        if voice and unc.transaction is not None:
            streams.append(_DrawStream(rng.child(0), _trunc_normal_draw(unc.transaction)))
        else:
            streams.append(None)
        lat = unc.latency
        if lat.mode == "distribution":
            g = lat.params
            streams.append(_DrawStream(rng.child(1), lambda gen, m: gen.gamma(g.shape, g.scale, m)))
        else:
            streams.append(float(lat.value))
        pr = unc.pilot_response
        if pr is not None:
            streams.append(_DrawStream(rng.child(2), lambda gen, m: gen.gamma(pr.shape, pr.scale, m)))
        else:
            streams.append(0.0)
        self._streams = streams

    def peek(self, n: int):
        out = []
        for s in self._streams:
            if s is None:
                out.append(np.zeros(n))
            elif isinstance(s, float):
                out.append(np.full(n, s))
            else:
                out.append(s.peek(n))
        return out

    def consume(self, n: int) -> None:
        for s in self._streams:
            if isinstance(s, _DrawStream):
                s.consume(n)


class _ConstantDraws:
    """Attempt draws when every delay is deterministic; consumes no randomness."""

    __slots__ = ("_eps",)

    def __init__(self, eps: float):
        self._eps = eps

    def peek(self, n: int):
        z = np.zeros(n)
        return z, np.full(n, self._eps), z

    def consume(self, n: int) -> None:
        pass


def _is_deterministic(unc: UncertaintyConfig, voice: bool) -> bool:
    no_exchange = not voice or unc.transaction is None
    return no_exchange and unc.pilot_response is None and unc.latency.mode == "deterministic"


def _always_on(trace: CommTrace) -> bool:
    return len(trace) == 1 and bool(trace.on[0])


def _scan_batch(queue, trace, draws, a, n, dt, t, bound, t_base, max_batch):
    """Test steps ``n, n+1, ...`` below ``bound`` in one numpy pass.

    Returns ``(hit, steps, t_turn, t_merge)``; ``hit`` is -1 when no step
    succeeds, in which case ``steps`` were used up.
    """
    k_est = min(int((bound - t) / dt) + 2, max_batch)
    ts = a + (n + np.arange(k_est)) * dt
    k = max(1, int(np.searchsorted(ts, bound, side="left")))
    ts = ts[:k]
    tau, eps, eta = draws.peek(k)
    t_turn = ts + eps + eta
    t_merge = t_turn + t_base
    ok = trace.available_mask(ts, tau)
    ok &= queue.feasible(t_merge)
    if not ok.any():
        draws.consume(k)
        return -1, k, math.nan, math.nan
    hit = int(np.argmax(ok))
    draws.consume(hit + 1)
    return hit, k, float(t_turn[hit]), float(t_merge[hit])


def _scan_constant(queue, a, n, dt, bound, eps, t_base):
    """Scalar twin of :func:`_scan_batch` for fixed delays on a perfect link.

    Jumps straight to the next point that could clear the blocking neighbour
    instead of testing every step; the arithmetic per step is identical.
    """
    times, t_sep = queue._times, queue.t_sep
    size = len(times)
    lead = eps + t_base
    j = 0
    while True:
        t = a + (n + j) * dt
        if t >= bound:
            return -1, max(j, 1)
        tm = ((t + eps) + 0.0) + t_base
        k = bisect.bisect_right(times, tm)
        if k > 0 and tm - times[k - 1] < t_sep:
            target = times[k - 1] + t_sep
        elif k < size and times[k] - tm < t_sep:
            target = times[k] + t_sep
        else:
            return j, j + 1
        # one step of slack absorbs rounding in the jump estimate
        jump = math.ceil((target - lead - a) / dt) - n - 1
        if jump > j + 1:
            below = _steps_below(a, n, dt, bound, j + 1)
            if jump >= below:
                return -1, below
            j = jump
        else:
            j += 1


def _steps_below(a, n, dt, bound, lo):
    """Smallest ``j >= lo`` whose step time reaches ``bound``."""
    j = max(lo, math.ceil((bound - a) / dt) - n - 1)
    while j > lo and a + (n + j - 1) * dt >= bound:
        j -= 1
    while a + (n + j) * dt < bound:
        j += 1
    return j


def run_simulation(
    streams: ArrivalStreams,
    sim: SimParams,
    unc: UncertaintyConfig,
    trace: CommTrace,
    rng: RngStream | None,
    *,
    max_batch: int = _MAX_BATCH,
    force_batch: bool = False,
) -> SimResult:
    """Merge every downwind entry of ``streams`` into the straight-in schedule.

    ``rng`` feeds the per-aircraft attempt draws (aircraft ``i`` uses
    ``rng.child(i)``); it may be ``None`` when all delays are deterministic.
    ``max_batch`` only bounds memory per numpy step and ``force_batch``
    disables the scalar fast path; neither alters the output.
    """
    if trace.horizon < sim.horizon:
        raise ValueError("communication trace must cover the simulation horizon")
    if max_batch < 1:
        raise ValueError("max_batch must be >= 1")
    voice = sim.scenario == "voice"
    deterministic = _is_deterministic(unc, voice)
    if not deterministic and rng is None:
        raise ValueError("stochastic delays need an RngStream")

    dt, t_base, horizon = sim.dt, sim.t_base, sim.horizon
    queue = LandingQueue.from_times(streams.straight_in_entries, sim.t_sep)
    entries = [float(e) for e in streams.downwind_entries]
    records = [DownwindRecord(entry_time=e) for e in entries]
    eps_const = float(unc.latency.value)
    fast = deterministic and _always_on(trace) and not force_batch
    if deterministic:
        shared = _ConstantDraws(eps_const)
        draws = [shared] * len(entries)
    else:
        draws = [_AttemptDraws(rng.child(i), unc, voice) for i in range(len(entries))]

    anchor = list(entries)
    step = [0] * len(entries)
    pending_turn: list[float] = [math.nan] * len(entries)
    verify_times: list[float] = []
    heap: list[tuple[float, int, int]] = []
    for i, e in enumerate(entries):
        heap.append((e, _EVALUATE, i))
    heapq.heapify(heap)

    while heap:
        t, kind, i = heapq.heappop(heap)
        rec = records[i]
        if kind == _VERIFY:
            heapq.heappop(verify_times)
            t_turn = pending_turn[i]
            if queue.find_gap(t) is not None:
                queue.insert(t, "downwind")
                rec.status = "merged"
                rec.turn_time = t_turn
                rec.merge_time = t
                rec.hold_time = t_turn - rec.entry_time
                rec.first_attempt_success = rec.evaluation_count == 1
            else:
                anchor[i], step[i] = t_turn, 0
                heapq.heappush(heap, (t_turn, _EVALUATE, i))
            continue

        if t >= horizon:
            continue
        # queue is frozen until the next landing check, and no new check can
        # be scheduled earlier than t + t_base
        bound = min(t + t_base, horizon)
        if verify_times:
            bound = min(bound, verify_times[0])
        a, n = anchor[i], step[i]
        if fast:
            hit, k = _scan_constant(queue, a, n, dt, bound, eps_const, t_base)
            if hit >= 0:
                t_turn = (a + (n + hit) * dt + eps_const) + 0.0
                tm = t_turn + t_base
        else:
            hit, k, t_turn, tm = _scan_batch(
                queue, trace, draws[i], a, n, dt, t, bound, t_base, max_batch
            )
        if hit < 0:
            rec.evaluation_count += k
            step[i] = n + k
            heapq.heappush(heap, (a + (n + k) * dt, _EVALUATE, i))
            continue
        rec.evaluation_count += hit + 1
        pending_turn[i] = t_turn
        heapq.heappush(heap, (tm, _VERIFY, i))
        heapq.heappush(verify_times, tm)

    landed = int(np.count_nonzero(queue.times <= horizon))
    seed_path = None if rng is None else (rng.master_seed, rng.stream_path)
    return SimResult(queue, records, landed, horizon, seed_path)
