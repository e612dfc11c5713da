import math

import numpy as np
import pytest

import brute_force
from spinmr.formulas import (
    CROSS_VALIDATION_TOL,
    compare,
    cross_validate,
    k_lgi_closed,
    match_fractions,
    p12_plus_minus_closed,
)
from spinmr.povm import MeasurementParams
from spinmr.protocol import ProtocolSpec, evaluate_mr
from spinmr.spin import SpinSystem


def test_p12_zero_sharpness_keeps_first_term_only():
    sys = SpinSystem(8)
    j, gam = sys.j, 0.15
    expected = -(-2.0 - gam) * j * (1.0 - j * gam) / (1.0 + 2.0 * j) ** 2
    assert p12_plus_minus_closed(sys, MeasurementParams(0.0, gam)) == pytest.approx(
        expected, abs=1e-15)


def test_p12_matches_simulator_at_large_spin():
    report = compare("pair12-plus-minus", SpinSystem(30), MeasurementParams(0.5, 0.0))
    assert report.matches
    assert report.discrepancy == abs(report.closed_form_value - report.simulator_value)


def test_p12_flags_small_spin_gap():
    # At j = 1, sharpness 1: the dense 3x3 oracle puts P(Q1+, Q2-) at 1/4
    # while the typeset expression collapses to 0; the dropped term is
    # exactly sharpness * 4^(-j).
    sys = SpinSystem(2)
    params = MeasurementParams(1.0, 0.0)
    oracle_value = brute_force.joint_table(2, 1.0, 0.0, (1, 2))[(+1, -1)]
    assert oracle_value == pytest.approx(0.25, abs=1e-12)
    report = compare("pair12-plus-minus", sys, params)
    assert report.simulator_value == pytest.approx(oracle_value, abs=1e-12)
    assert not report.matches
    assert report.discrepancy == pytest.approx(0.25, abs=1e-9)


@pytest.mark.parametrize("two_j", [2, 5, 10, 31])
def test_k_lgi_zero_sharpness_factorizes(two_j):
    # With trivial measurements K_LGI collapses to <Q>^2.
    sys = SpinSystem(two_j)
    expectation = 1.0 - 2.0 / sys.dim
    closed = k_lgi_closed(sys, MeasurementParams(0.0, 0.0))
    assert closed == pytest.approx(expectation**2, abs=1e-12)
    simulated = evaluate_mr(ProtocolSpec(sys, MeasurementParams(0.0, 0.0))).k_lgi
    assert closed == pytest.approx(simulated, abs=1e-12)


def test_k_lgi_reference_point_j15():
    value = k_lgi_closed(SpinSystem(30), MeasurementParams(0.5, 0.0))
    assert value == pytest.approx(1.2504, abs=1e-4)


@pytest.mark.parametrize("two_j", [30, 40, 50])
def test_k_lgi_tracks_simulator_at_large_spin(two_j):
    rng = np.random.default_rng(two_j)
    for _ in range(5):
        lam, gam = brute_force.random_valid_params(two_j, rng)
        params = MeasurementParams(lam, gam)
        report = compare("k-lgi", SpinSystem(two_j), params)
        assert report.matches, (two_j, lam, gam, report.discrepancy)


def test_cross_validate_grid_is_reported_not_asserted():
    reports = cross_validate()
    assert len(reports) == 5 * 11 * 2  # five systems, 10 random + 1 anchor, 2 formulas
    for report in reports:
        assert math.isfinite(report.closed_form_value)
        assert math.isfinite(report.simulator_value)
        assert report.discrepancy >= 0.0
        assert report.matches == (report.discrepancy <= CROSS_VALIDATION_TOL)
    fractions = match_fractions(reports)
    assert set(fractions) == {"pair12-plus-minus", "k-lgi"}
    # Dropped 4^(-j)-scale terms are visible across the small-spin grid.
    assert fractions["pair12-plus-minus"] < 1.0
    assert fractions["k-lgi"] < 1.0


def test_cross_validate_is_deterministic():
    assert cross_validate() == cross_validate()


@pytest.mark.parametrize("two_j", [100, 200])
def test_closed_forms_finite_at_large_spin(two_j):
    params = MeasurementParams(0.4, 0.5 / (two_j / 2.0))
    assert math.isfinite(k_lgi_closed(SpinSystem(two_j), params))
    assert math.isfinite(p12_plus_minus_closed(SpinSystem(two_j), params))


def test_closed_forms_reject_invalid_params():
    with pytest.raises(ValueError):
        p12_plus_minus_closed(SpinSystem(30), MeasurementParams(0.9, 0.05))
    with pytest.raises(ValueError):
        k_lgi_closed(SpinSystem(30), MeasurementParams(0.1, 0.5))
