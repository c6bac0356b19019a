from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from runway_merge.commlink import (
    CommLinkParams,
    CommTrace,
    LatencySpec,
    availability_of,
    continuity_of,
    generate_trace,
    is_continuously_available,
    params_from_availability,
)
from runway_merge.uncertainty import GammaParams, RngStream


def test_availability_and_continuity_closed_forms():
    p = CommLinkParams(rate_to_on=0.1, rate_to_off=0.04)
    assert availability_of(p) == pytest.approx(0.1 / 0.14)
    assert continuity_of(p, 10.0) == pytest.approx(math.exp(-0.4))
    assert continuity_of(p, 0.0) == 1.0


def test_params_from_availability():
    p = params_from_availability(0.7, 10.0)
    assert p.rate_to_on == pytest.approx(0.1)
    assert p.rate_to_off == pytest.approx(0.1 * 3 / 7)
    assert p.availability == pytest.approx(0.7)
    assert params_from_availability(1.0).rate_to_off == 0.0
    for bad in (0.0, -0.1, 1.01):
        with pytest.raises(ValueError):
            params_from_availability(bad)


def test_rate_validation():
    with pytest.raises(ValueError):
        CommLinkParams(0.0, 0.1)
    with pytest.raises(ValueError):
        CommLinkParams(0.1, -0.1)


def test_latency_spec():
    assert LatencySpec().sample(RngStream(0)) == 0.5
    np.testing.assert_array_equal(LatencySpec("deterministic", 0.2).sample(RngStream(0), 3), [0.2] * 3)
    d = LatencySpec("distribution", params=GammaParams(2.0, 0.25))
    assert d.sample(RngStream(1), 50_000).mean() == pytest.approx(0.5, rel=0.02)
    with pytest.raises(ValueError):
        LatencySpec("distribution")
    with pytest.raises(ValueError):
        LatencySpec("deterministic", -1.0)


class TestCommTrace:
    trace = CommTrace([(0, 10, "on"), (10, 12, "off"), (12, 30, "on")])

    def test_window_inside_on_segment(self):
        assert is_continuously_available(self.trace, 0.0, 10.0)
        assert is_continuously_available(self.trace, 12.0, 18.0)

    def test_window_touching_outage(self):
        assert not is_continuously_available(self.trace, 9.0, 2.0)
        assert not is_continuously_available(self.trace, 10.0, 0.0)
        assert not is_continuously_available(self.trace, 11.9, 0.5)

    def test_zero_duration_reduces_to_state(self):
        assert is_continuously_available(self.trace, 5.0, 0.0)
        assert not is_continuously_available(self.trace, 11.0, 0.0)

    def test_out_of_range_query_raises(self):
        with pytest.raises(ValueError):
            is_continuously_available(self.trace, 25.0, 10.0)
        with pytest.raises(ValueError):
            is_continuously_available(self.trace, -1.0, 1.0)

    def test_mask_treats_past_horizon_as_unavailable(self):
        m = self.trace.available_mask(np.array([1.0, 11.0, 25.0, 29.0]), 3.0)
        np.testing.assert_array_equal(m, [True, False, True, False])

    def test_on_fraction(self):
        assert self.trace.on_fraction() == pytest.approx(28 / 30)

    def test_invalid_tilings(self):
        with pytest.raises(ValueError):
            CommTrace([(0, 5, "on"), (6, 10, "off")])
        with pytest.raises(ValueError):
            CommTrace([(0, 5, "on"), (5, 10, "on")])
        with pytest.raises(ValueError):
            CommTrace([(1, 5, "on")])
        with pytest.raises(ValueError):
            CommTrace([(0, 5, "maybe")])

    def test_segments_round_trip(self):
        again = CommTrace(self.trace.segments)
        assert again.segments == self.trace.segments


class TestGenerateTrace:
    def test_perfect_link_is_one_segment(self):
        t = generate_trace(params_from_availability(1.0), 3600.0, RngStream(0))
        assert len(t) == 1 and t.on[0]

    def test_always_on_rule_starts_on(self):
        p = params_from_availability(0.3)
        for seed in range(20):
            assert generate_trace(p, 100.0, RngStream(seed), "always_on").on[0]

    def test_stationary_start_frequency(self):
        p = params_from_availability(0.6)
        starts = [generate_trace(p, 1.0, RngStream(s)).on[0] for s in range(2000)]
        assert np.mean(starts) == pytest.approx(0.6, abs=0.04)

    def test_long_run_on_fraction(self):
        for p_a in (0.5, 0.7, 0.9):
            t = generate_trace(params_from_availability(p_a), 1e6, RngStream(11))
            assert t.on_fraction() == pytest.approx(p_a, abs=0.01)

    def test_mean_segment_durations(self):
        p = params_from_availability(0.7, 10.0)
        t = generate_trace(p, 1e6, RngStream(5))
        d = (t.ends - t.starts)[1:-1]
        on = t.on[1:-1]
        assert d[~on].mean() == pytest.approx(10.0, rel=0.03)
        assert d[on].mean() == pytest.approx(1 / p.rate_to_off, rel=0.03)

    def test_continuity_matches_closed_form(self):
        p = params_from_availability(0.7, 10.0)
        t = generate_trace(p, 2e5, RngStream(6), "always_on")
        starts = t.starts[t.on]
        lengths = (t.ends - t.starts)[t.on]
        interior = starts + lengths < t.horizon
        assert np.mean(lengths[interior] > 5.0) == pytest.approx(continuity_of(p, 5.0), abs=0.02)

    def test_reproducible(self):
        p = params_from_availability(0.5)
        a = generate_trace(p, 3600.0, RngStream(4, (2,)))
        b = generate_trace(p, 3600.0, RngStream(4, (2,)))
        assert a.segments == b.segments


@settings(max_examples=60, deadline=None)
@given(
    p_a=st.floats(0.05, 1.0),
    outage=st.floats(0.5, 100.0),
    horizon=st.floats(1.0, 5000.0),
    seed=st.integers(0, 2**32),
    rule=st.sampled_from(["stationary", "always_on"]),
)
def test_generated_trace_tiles_horizon(p_a, outage, horizon, seed, rule):
    t = generate_trace(params_from_availability(p_a, outage), horizon, RngStream(seed), rule)
    assert t.starts[0] == 0.0 and t.ends[-1] == horizon
    np.testing.assert_array_equal(t.starts[1:], t.ends[:-1])
    assert np.all(t.on[1:] != t.on[:-1])
    assert 0.0 <= t.on_fraction() <= 1.0 + 1e-12
