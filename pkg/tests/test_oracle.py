from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from runway_merge.arrivals import InfeasibleRateError, lambda_of_beta
from runway_merge.oracle import (
    OracleInput,
    beta_max,
    expected_gap_capacity,
    gap_capacity,
    oracle_grid,
    theoretical_throughput,
)
from runway_merge.uncertainty import RngStream


def test_gap_capacity():
    assert gap_capacity(0.0) == 1
    assert gap_capacity(63.9) == 1
    assert gap_capacity(64.0) == 2
    assert gap_capacity(200.0) == 4
    with pytest.raises(ValueError):
        gap_capacity(-1.0)


def test_expected_gap_capacity_closed_form():
    assert expected_gap_capacity(1 / 64) == pytest.approx(1 / (1 - math.exp(-1)))
    assert expected_gap_capacity(1 / 64) == pytest.approx(1.581977, abs=1e-6)


def test_expected_gap_capacity_by_brute_force():
    # independent check: average floor(X / t_sep) over a million draws
    for lam in (1 / 64, 1 / 200, 1 / 20):
        x = RngStream(17).generator.exponential(1 / lam, size=1_000_000)
        mc = np.mean(1 + np.floor(x / 64.0))
        assert mc == pytest.approx(expected_gap_capacity(lam), abs=0.005 * expected_gap_capacity(lam))


def test_beta_max_reference_values():
    assert beta_max(30.0) == pytest.approx(44.0468, abs=1e-4)
    assert beta_max(5.0) == pytest.approx(53.7906, abs=1e-4)
    assert beta_max(25.0) == pytest.approx(45.399, abs=1e-3)
    assert beta_max(50.0) == pytest.approx(50.0168, abs=1e-4)


def test_beta_max_matches_lambda_form():
    for b in (1.0, 12.0, 40.0, 55.0):
        lam = lambda_of_beta(b, 64.0)
        assert beta_max(b) == pytest.approx(b * expected_gap_capacity(lam))


def test_throughput_is_min_of_demand_and_ceiling():
    assert theoretical_throughput(OracleInput(5.0, 5.0)) == 10.0
    assert theoretical_throughput(OracleInput(30.0, 50.0)) == pytest.approx(beta_max(30.0))
    assert theoretical_throughput(OracleInput(10.0, 0.0)) == 10.0


def test_limits():
    # no straight-in traffic leaves the full runway, a saturated stream leaves none
    assert beta_max(1e-3) == pytest.approx(3600 / 64, rel=1e-3)
    assert beta_max(56.2) == pytest.approx(56.2, rel=1e-3)
    with pytest.raises(InfeasibleRateError):
        beta_max(56.25)
    with pytest.raises(InfeasibleRateError):
        OracleInput(60.0, 5.0)


def test_grid_rows():
    rows = oracle_grid([5, 10], [5, 10, 15])
    assert len(rows) == 6
    assert rows[0] == (5.0, 5.0, 10.0)
    for bs, bd, v in rows:
        assert v == theoretical_throughput(OracleInput(bs, bd))


@settings(max_examples=100, deadline=None)
@given(beta_si=st.floats(0.01, 56.2), beta_dw=st.floats(0, 200))
def test_throughput_bounds(beta_si, beta_dw):
    v = theoretical_throughput(OracleInput(beta_si, beta_dw))
    assert v <= 3600 / 64 + 1e-9
    assert v >= beta_si - 1e-9
    assert v <= beta_si + beta_dw + 1e-9


def test_ceiling_dips_between_the_extremes():
    # sparse straight-in traffic leaves big gaps, dense traffic fills the
    # runway itself; in between the gap rounding loss is largest
    assert beta_max(25.0) < beta_max(5.0)
    assert beta_max(25.0) < beta_max(50.0)
