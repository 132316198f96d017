import math

import numpy as np
import pytest

from app.exceptions import DomainError
from app.physics.coupling import FennecPoint, arm_strength
from app.physics.nonlinear import (
    ChargeInversion,
    SeriesCoefficients,
    binom_half,
    charge_inversion,
    error_hamiltonian_report,
    leading_coupling,
    newton_inversion,
    power_derivatives,
    series_coefficients,
    series_terms,
    sin_power_series,
)

CAPACITANCE = np.array([[1.0, -0.05], [-0.05, 1.2]])
OFFSET = np.array([0.1, -0.2])
CHARGE = np.array([0.8, 0.5])
COUPLINGS = {2: (0.3, -0.2), 3: (0.1, 0.15), 4: (-0.05, 0.08)}


def test_binom_half_values():
    assert binom_half(0) == 1.0
    assert binom_half(1) == 0.5
    assert binom_half(2) == pytest.approx(-0.125)
    assert binom_half(3) == pytest.approx(0.0625)


@pytest.mark.parametrize("m", range(1, 7))
def test_sin_power_series(m):
    x = np.linspace(-np.pi, np.pi, 41)
    np.testing.assert_allclose(sin_power_series(m, x), np.sin(x / 2.0) ** (2 * m), atol=1e-12)


def test_power_derivatives_of_linear_transmission():
    a, b = 0.4, 0.7
    table = power_derivatives([a, b, 0.0, 0.0, 0.0], 6)
    for n in range(5):
        for m in range(7):
            expected = math.perm(m, n) * a ** max(m - n, 0) * b**n if n <= m else 0.0
            assert table[n, m] == pytest.approx(expected, abs=1e-14)


def test_power_derivatives_second_order():
    t = [0.3, 0.5, -0.2]
    table = power_derivatives(t, 3)
    # ∂²(T³) = 6T(∂T)² + 3T²∂²T
    assert table[2, 3] == pytest.approx(6 * 0.3 * 0.25 + 3 * 0.09 * -0.2)


def test_power_derivatives_order_limit():
    with pytest.raises(DomainError):
        power_derivatives([0.1] * 6, 2)


def test_zero_table_gives_zero_series():
    coefs = series_coefficients(np.zeros((2, 5, 7)), gaps=(1.0, 1.0))
    assert not coefs.lam.any()
    assert not coefs.xi.any()
    report = error_hamiltonian_report(coefs, np.diag([1e-13, 1e-13]), (50.0, 50.0))
    assert report.terms == []
    assert report.all_satisfied


def test_first_power_term_by_hand():
    table = np.zeros((2, 2, 2))
    table[1, 1, 1] = 0.7
    coefs = series_coefficients(table, gaps=(2.0, 3.0))
    assert coefs.lam[0, 1, 1] == pytest.approx(-(3.0 / 4.0) * 0.7)
    assert not coefs.lam[1].any()
    # coupling table stays indexed by junction
    assert coefs.g[1, 1, 1] == pytest.approx(-0.5 * 3.0 * 0.7)
    assert not coefs.g[0].any()


def test_series_table_shape_checked():
    with pytest.raises(DomainError):
        series_coefficients(np.zeros((3, 2, 2)), gaps=(1.0, 1.0))
    with pytest.raises(DomainError):
        series_coefficients(np.zeros((2, 2, 2)), gaps=(1.0, 1.0), n_max=3)


def _residual(order: int, lam: float) -> float:
    ci = ChargeInversion(CAPACITANCE, OFFSET, COUPLINGS, order=order).scaled(lam)
    return ci.residual(CHARGE, charge_inversion(ci, CHARGE))


@pytest.mark.parametrize("order", [1, 2, 3])
def test_inversion_residual_scaling(order):
    slope = np.log2(_residual(order, 0.05) / _residual(order, 0.025))
    assert slope == pytest.approx(order + 1, abs=0.3)


def test_linear_inversion_is_exact():
    ci = ChargeInversion(CAPACITANCE, OFFSET)
    velocity = charge_inversion(ci, CHARGE)
    assert ci.residual(CHARGE, velocity) < 1e-14
    np.testing.assert_allclose(velocity, np.linalg.solve(CAPACITANCE, CHARGE - OFFSET))


def test_series_approaches_newton():
    ci = ChargeInversion(CAPACITANCE, OFFSET, COUPLINGS, order=3).scaled(0.05)
    exact = newton_inversion(ci, CHARGE)
    assert ci.residual(CHARGE, exact) < 1e-12
    assert np.max(np.abs(charge_inversion(ci, CHARGE) - exact)) < 1e-4
    assert len(series_terms(ci, CHARGE)) == 4


def test_inversion_validation():
    with pytest.raises(DomainError):
        ChargeInversion(CAPACITANCE, OFFSET, {1: (0.1, 0.1)})
    with pytest.raises(DomainError):
        ChargeInversion(np.ones((2, 2)), OFFSET)
    with pytest.raises(DomainError):
        ChargeInversion(CAPACITANCE, OFFSET, order=5)


def test_leading_coupling_is_arm_strength():
    assert leading_coupling(2.5) == pytest.approx(arm_strength(FennecPoint(ej_prime=2.5)), rel=1e-12)


def _single_term(value: float) -> SeriesCoefficients:
    lam = np.zeros((2, 3, 2))
    lam[0, 2, 1] = value
    return SeriesCoefficients(lam=lam, xi=np.zeros((2, 3)), g=np.zeros((2, 3, 2)), n_max=2, m_max=1)


def test_report_threshold_flips_with_magnitude():
    c = np.diag([1e-13, 1e-13])
    ok = error_hamiltonian_report(_single_term(1e-15), c, (50.0, 50.0))
    bad = error_hamiltonian_report(_single_term(1e-13), c, (50.0, 50.0))
    assert len(ok.terms) == 1 and ok.terms[0].kind == "charge_power"
    assert ok.all_satisfied
    assert not bad.all_satisfied
    assert bad.violations[0].margin < 0


def test_report_includes_cross_capacitance():
    c = np.array([[1e-13, -1e-15], [-1e-15, 1e-13]])
    report = error_hamiltonian_report(_single_term(0.0), c, (50.0, 50.0))
    assert [t.kind for t in report.terms] == ["cross_charge"]
    assert report.to_dict()["terms"][0]["coefficient"] == pytest.approx(1e-15 / 1e-26)


def test_report_rejects_nonpositive_impedance():
    with pytest.raises(DomainError):
        error_hamiltonian_report(_single_term(1e-15), np.diag([1e-13, 1e-13]), (50.0, 0.0))
