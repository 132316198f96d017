import logging

import numpy as np
import pytest

from app.exceptions import DomainError
from app.physics.constants import R_Q
from app.physics.coupling import (
    FennecPoint,
    GyratorOperatingPoint,
    arm_strength,
    charge_noise_dG,
    compression_factor,
    fennec_strength,
    flux_noise_dG,
    g_max,
    gate_voltage_resolution,
    gyrator_arms,
    gyrator_conductance,
    self_consistent_conductance,
    strength_from_junction,
)
from app.physics.junction import JunctionSpec, LogisticTransmission, ej_of_voltage

EJ_PRIME = 2.5  # GHz/V
Z0 = 50.0


def test_fennec_strength_at_quarter_flux_is_gmax():
    p = FennecPoint(ej_prime=EJ_PRIME)
    assert fennec_strength(p) == pytest.approx(g_max(EJ_PRIME), rel=1e-12)
    assert arm_strength(p) == pytest.approx(0.5 * g_max(EJ_PRIME), rel=1e-12)


def test_fennec_strength_vanishes_without_flux_bias():
    assert fennec_strength(FennecPoint(ej_prime=EJ_PRIME, flux_bias=0.0)) == 0.0


def test_gmax_resistance_scale():
    # E_J' = 1 eV/V
    assert g_max(1.0, "eV") * R_Q == pytest.approx(2.0 * np.pi, rel=1e-12)


def test_symmetric_arms_add_up():
    op = GyratorOperatingPoint.symmetric(EJ_PRIME, Z0)
    arms = gyrator_arms(op)
    assert arms["G_minus"] == pytest.approx(g_max(EJ_PRIME), rel=1e-12)
    assert arms["G_plus"] == pytest.approx(0.0, abs=1e-12 * g_max(EJ_PRIME))


def test_compression_halves_conductance():
    n = R_Q / (np.pi * Z0)
    assert compression_factor(Z0, n) == pytest.approx(0.5)
    result = gyrator_conductance(GyratorOperatingPoint.symmetric(EJ_PRIME, Z0, n))
    assert result.g == pytest.approx(0.5 * g_max(EJ_PRIME), rel=1e-12)
    assert not result.flags["beyond_validity"]


def test_compression_beyond_validity_is_flagged(caplog):
    n = 3.0 * R_Q / (np.pi * Z0)
    with caplog.at_level(logging.WARNING, logger="app.physics.coupling"):
        result = gyrator_conductance(GyratorOperatingPoint.symmetric(EJ_PRIME, Z0, n))
    assert result.flags["beyond_validity"]
    assert result.g < 0
    assert "past zero" in caplog.text


def test_negative_photon_number_rejected():
    with pytest.raises(DomainError):
        GyratorOperatingPoint.symmetric(EJ_PRIME, Z0, -1.0)


def test_fixed_point_without_photons_is_immediate():
    op = GyratorOperatingPoint.symmetric(EJ_PRIME, Z0)
    result = self_consistent_conductance(op, lambda g: (0.0, 0.0))
    assert result.converged
    assert result.iterations == 1
    assert result.g == pytest.approx(g_max(EJ_PRIME))


def test_fixed_point_with_linear_feedback():
    op = GyratorOperatingPoint.symmetric(EJ_PRIME, Z0)
    gmax = g_max(EJ_PRIME)
    n0 = R_Q / (np.pi * Z0)  # x = 1/2 at G = G_max

    def photons(g):
        n = n0 * g / gmax
        return n, n

    result = self_consistent_conductance(op, photons)
    assert result.converged
    assert result.g == pytest.approx(2.0 * gmax / 3.0, rel=1e-8)


def test_noise_sensitivities_at_bias_point():
    p = FennecPoint(ej_prime=EJ_PRIME, ej_second=0.0)
    assert charge_noise_dG(p, 1e-3) == 0.0
    assert flux_noise_dG(p, 1e-3) == pytest.approx(0.0, abs=1e-12 * g_max(EJ_PRIME))
    resolution = gate_voltage_resolution(p)
    assert resolution["absolute"] == np.inf
    assert resolution["relative"] == np.inf


def test_flux_noise_is_maximal_without_bias():
    p = FennecPoint(ej_prime=EJ_PRIME, flux_bias=0.0)
    dphi = 1e-6
    shifted = FennecPoint(ej_prime=EJ_PRIME, flux_bias=-dphi)
    assert flux_noise_dG(p, dphi) == pytest.approx(fennec_strength(shifted), rel=1e-6)


def test_charge_noise_finite_resolution():
    p = FennecPoint(ej_prime=EJ_PRIME, ej_second=4.0)
    resolution = gate_voltage_resolution(p)
    assert resolution["relative"] == pytest.approx(EJ_PRIME / 4.0)
    assert np.isfinite(resolution["absolute"])
    assert charge_noise_dG(p, 1e-3) != 0.0


def test_strength_from_parametric_junction():
    spec = JunctionSpec(gap=45.0, channels=(LogisticTransmission(0.05, 0.0, 0.1),), external_flux=0.25)
    expected = g_max(float(ej_of_voltage(spec, 0.02, 1)))
    assert strength_from_junction(spec, 0.02) == pytest.approx(expected, rel=1e-12)


def test_operating_point_must_be_finite():
    with pytest.raises(DomainError):
        FennecPoint(ej_prime=np.nan)
