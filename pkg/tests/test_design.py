import numpy as np
import pytest

from app.exceptions import ConvergenceError, DomainError, SingularityError
from app.physics.constants import R_Q
from app.physics.coupling import compression_factor
from app.physics.design import (
    bandwidth,
    bandwidth_estimates,
    central_frequency,
    central_residual,
    compression_curve,
    compression_threshold_x,
    disorder_deviation,
    disorder_first_order,
    disorder_tolerance,
    matched,
    matched_point_dS,
    mixing_matrices,
    optimal_conductance,
)
from app.physics.network import DISORDER_FIELDS, Disorder, pauli_angle, scattering

from tests.conftest import Z_TL, build_circuit


# ------------------------------------------------------------------ conductance

def test_optimal_conductance_without_coupling_inductance(ideal_circuit):
    assert optimal_conductance(ideal_circuit) == pytest.approx(1.0 / Z_TL, rel=1e-9)


def test_optimal_conductance_large_inductance():
    circ = build_circuit(lc=50.0, z0=1.0)
    assert optimal_conductance(circ) * circ.lc * circ.omega0 == pytest.approx(1.0, rel=0.02)


def test_optimal_conductance_branches_agree():
    below = optimal_conductance(build_circuit(lc=0.999e-6, g=0.0)) * Z_TL
    above = optimal_conductance(build_circuit(lc=1e-5, g=0.0)) * Z_TL
    x = np.sqrt(2.0) * 1e-5
    assert above == pytest.approx(1.0 - x**2 / 2.0, rel=1e-12)
    assert below == pytest.approx(1.0, rel=1e-11)


def test_optimal_conductance_decreases_with_inductance():
    values = [optimal_conductance(build_circuit(lc=lc, g=0.0)) for lc in np.linspace(0.0, 20.0, 50)]
    assert np.all(np.diff(values) < 0)


# ------------------------------------------------------------- central frequency

def test_central_frequency_without_coupling_inductance(ideal_circuit):
    w = central_frequency(ideal_circuit)
    assert w == pytest.approx(ideal_circuit.omega0, rel=1e-6)


def test_central_frequency_large_inductance():
    circ = build_circuit(lc=5.0, z0=10.0)
    w = central_frequency(circ)
    assert abs(w / circ.omega0 - 1.0) <= 0.1
    assert central_residual(circ, w) == pytest.approx(0.0, abs=1e-9)


def test_central_frequency_is_scale_free():
    si = build_circuit(lc=5.0, z0=10.0)
    unit = build_circuit(lc=5.0, z0=10.0, omega0=1.0)
    assert central_frequency(si) / si.omega0 == pytest.approx(central_frequency(unit), rel=1e-9)


# -------------------------------------------------------------------- bandwidth

def _exact_edges(z0: float):
    eps_z0 = z0 / np.sqrt(2.0)
    root = np.sqrt(1.0 + eps_z0**2)
    return root - eps_z0, root + eps_z0


def test_bandwidth_without_coupling_inductance(ideal_circuit):
    band = bandwidth(ideal_circuit)
    w0 = ideal_circuit.omega0
    lo, hi = _exact_edges(0.1)
    assert band.omega_minus / w0 == pytest.approx(lo, rel=1e-9)
    assert band.omega_plus / w0 == pytest.approx(hi, rel=1e-9)
    assert band.omega_minus < w0 < band.omega_plus
    assert max(band.residuals) <= 1e-8
    assert band.notches == []
    assert band.delta == pytest.approx(band.estimates["lc_zero"], rel=0.05)


def test_bandwidth_edges_satisfy_unit_tangent():
    circ = build_circuit(lc=0.5, z0=0.3)
    band = bandwidth(circ)
    for w in (band.omega_minus, band.omega_plus):
        assert abs(pauli_angle(circ, w).tan2theta) == pytest.approx(1.0, abs=1e-8)


def test_bandwidth_large_inductance_estimate():
    circ = build_circuit(lc=10.0, z0=1.0)
    band = bandwidth(circ)
    assert band.delta == pytest.approx(band.estimates["large_lc"], rel=0.1)
    for lo, hi in band.notches:
        assert band.omega_minus < lo < hi < band.omega_plus


@pytest.mark.parametrize("lc", [5.0, 10.0, 20.0])
def test_bandwidth_follows_linearized_estimate(lc):
    band = bandwidth(build_circuit(lc=lc, z0=10.0))
    assert band.delta == pytest.approx(band.estimates["linearized"], rel=0.1)


def test_bandwidth_approaches_large_inductance_limit():
    # δ/(Z0 Z_TL/L_c²ω0) ≈ x/(1 + x) with x = 2ℓ/z0
    ratios = []
    for lc in (5.0, 10.0, 20.0):
        band = bandwidth(build_circuit(lc=lc, z0=10.0))
        ratios.append(band.delta / band.estimates["large_lc"])
    assert ratios[0] < ratios[1] < ratios[2] < 1.0
    assert ratios[0] < 0.6

    band = bandwidth(build_circuit(lc=20.0, z0=1.0))
    assert band.delta / band.estimates["large_lc"] == pytest.approx(1.0, abs=0.05)


def test_bandwidth_scales_inverse_square():
    narrow = bandwidth(build_circuit(lc=20.0, z0=1.0)).delta
    wide = bandwidth(build_circuit(lc=10.0, z0=1.0)).delta
    assert 3.5 <= wide / narrow <= 4.5


def test_bandwidth_needs_a_passband():
    with pytest.raises(ConvergenceError):
        bandwidth(build_circuit(lc=0.0, z0=0.1, g=0.05))


def test_bandwidth_estimates_without_coupling_inductance(ideal_circuit):
    estimates = bandwidth_estimates(ideal_circuit)
    assert estimates["large_lc"] is None
    assert estimates["lc_zero"] == pytest.approx(np.sqrt(2.0) * 0.1 * ideal_circuit.omega0)


# ------------------------------------------------------------------ compression

def test_compression_threshold_solves_one_db():
    x = compression_threshold_x(1.0)
    g = 1.0 - x
    assert 0.50 <= x <= 0.51
    assert 2.0 * g / (1.0 + g**2) == pytest.approx(10.0 ** (-0.1), rel=1e-9)


def test_one_db_photon_number_at_fifty_ohm():
    circ = build_circuit(z0=1.0)
    reference = R_Q / (np.pi * circ.z0)
    curve = compression_curve(circ, np.linspace(0.0, 1.5 * reference, 3001))
    assert curve.n_1db == pytest.approx(41.0, rel=0.05)
    assert compression_factor(circ.z0, curve.n_1db) == pytest.approx(compression_threshold_x(), rel=1e-3)


@pytest.mark.parametrize("z0_ohm", [10.0, 50.0, 200.0, 1000.0])
def test_one_db_photon_number_scales_with_impedance(z0_ohm):
    circ = build_circuit(z0=z0_ohm / Z_TL)
    reference = R_Q / (np.pi * circ.z0)
    curve = compression_curve(circ, np.linspace(0.0, 1.5 * reference, 3001))
    assert curve.n_1db / reference == pytest.approx(1.0, rel=0.05)
    assert curve.reference == pytest.approx(reference)


def test_compression_curve_is_monotone(ideal_circuit):
    reference = R_Q / (np.pi * ideal_circuit.z0)
    curve = compression_curve(ideal_circuit, np.linspace(0.0, 1.5 * reference, 200))
    assert np.all(np.diff(curve.transmission) < 0)
    assert curve.transmission[0] == pytest.approx(1.0, abs=1e-9)


def test_compression_curve_grid_errors(ideal_circuit):
    reference = R_Q / (np.pi * ideal_circuit.z0)
    with pytest.raises(DomainError):
        compression_curve(ideal_circuit, np.linspace(1.0, reference, 50))
    with pytest.raises(ConvergenceError):
        compression_curve(ideal_circuit, np.linspace(0.0, 0.1 * reference, 11))


# --------------------------------------------------------------------- disorder

def test_no_disorder_no_deviation(ideal_circuit):
    dev = disorder_first_order(ideal_circuit, ideal_circuit.omega0)
    assert np.all(dev.dS == 0)
    assert dev.residual == 0.0


def test_first_order_matches_matched_point_formula(ideal_circuit):
    d = Disorder(
        d_lc=1e-3 * Z_TL / ideal_circuit.omega0,
        d_c0=1e-3 * ideal_circuit.c0,
        d_l0=-2e-3 * ideal_circuit.l0,
        c12=5e-4 * ideal_circuit.c0,
        l12=1e-3 * ideal_circuit.l0,
    )
    dev = disorder_first_order(ideal_circuit.with_disorder(d), ideal_circuit.omega0)
    np.testing.assert_allclose(dev.dS, matched_point_dS(ideal_circuit, d), atol=1e-10)
    assert abs(np.trace(dev.dS)) < 1e-12


@pytest.mark.parametrize("name", DISORDER_FIELDS)
def test_first_order_residual_is_quadratic(name, inductive_circuit):
    circ = matched(inductive_circuit)
    scale = {"d_lc": circ.lc, "d_c0": circ.c0, "d_l0": circ.l0, "c12": circ.c0, "l12": circ.l0}[name]

    def residual(fraction):
        disordered = circ.with_disorder(Disorder(**{name: fraction * scale}))
        return disorder_first_order(disordered, circ.omega0).residual

    ratio = residual(1e-3) / residual(5e-4)
    assert 3.5 <= ratio <= 4.5


def test_tolerance_grows_with_budget():
    circ = build_circuit(lc=0.5, z0=1.0)
    small = disorder_tolerance(circ, "d_c0", 0.001)
    large = disorder_tolerance(circ, "d_c0", 0.01)
    assert 0 < small < large


def test_tolerance_is_linear_for_small_budgets():
    circ = build_circuit(lc=0.5, z0=1.0)
    ratio = disorder_tolerance(circ, "d_l0", 0.01) / disorder_tolerance(circ, "d_l0", 0.005)
    assert 1.9 <= ratio <= 2.1


def test_tolerance_reproduces_budget():
    circ = build_circuit(lc=0.5, z0=1.0)
    t = disorder_tolerance(circ, "c12", 0.01)
    assert disorder_deviation(circ, "c12", t) == pytest.approx(0.01, abs=1e-3)


def test_tolerance_larger_with_larger_conductance():
    strong = disorder_tolerance(build_circuit(lc=0.05, z0=1.0), "d_c0", 0.01)
    weak = disorder_tolerance(build_circuit(lc=5.0, z0=1.0), "d_c0", 0.01)
    assert strong / weak > 3.0


def test_tolerance_rejects_bad_input(ideal_circuit):
    with pytest.raises(DomainError):
        disorder_tolerance(ideal_circuit, "d_r", 0.01)
    with pytest.raises(DomainError):
        disorder_tolerance(ideal_circuit, "d_c0", 0.5)


# ----------------------------------------------------------------------- mixing

def _photons(circ, x):
    return 2.0 * R_Q * x / (np.pi * circ.z0)


def test_zero_drive_no_mixing(ideal_circuit):
    mix = mixing_matrices(ideal_circuit, [0j, 0j])
    for block in mix.blocks.values():
        assert np.all(block == 0)
    assert mix.harmonic_map.shape == (8, 4)


def test_static_mixing_is_the_compression(ideal_circuit):
    n = _photons(ideal_circuit, 1e-3)
    mix = mixing_matrices(ideal_circuit, [np.sqrt(n), 0j])
    x = compression_factor(ideal_circuit.z0, n)
    assert mix.dg[0].real == pytest.approx(-ideal_circuit.g * x, rel=1e-9)


def test_mixing_scales_with_power(inductive_circuit):
    single = mixing_matrices(inductive_circuit, [0.3 + 0.1j, -0.2j])
    double = mixing_matrices(inductive_circuit, [0.6 + 0.2j, -0.4j])
    for key, block in single.blocks.items():
        np.testing.assert_allclose(double.blocks[key], 4.0 * block, rtol=1e-10, atol=1e-300)


def test_static_block_is_first_order_compression(ideal_circuit):
    w0 = ideal_circuit.omega0
    s0 = scattering(ideal_circuit, w0)

    def residual(x):
        mix = mixing_matrices(ideal_circuit, [np.sqrt(_photons(ideal_circuit, x)), 0j])
        compressed = scattering(ideal_circuit.with_conductance(ideal_circuit.g + mix.dg[0].real), w0)
        return np.max(np.abs(compressed - s0 - mix.block(1, 1)))

    assert 3.5 <= residual(1e-3) / residual(5e-4) <= 4.5


def test_missing_blocks_are_zero(ideal_circuit):
    mix = mixing_matrices(ideal_circuit, [1.0, 1.0])
    assert np.all(mix.block(3, -1) == 0)
    assert mix.block(3, 1).shape == (2, 2)


def test_mixing_drive_shape(ideal_circuit):
    with pytest.raises(DomainError):
        mixing_matrices(ideal_circuit, [1.0, 0.0, 0.0])


def test_singular_response_is_reported(ideal_circuit, monkeypatch):
    def singular(a, b):
        raise np.linalg.LinAlgError("Singular matrix")

    monkeypatch.setattr(np.linalg, "solve", singular)
    with pytest.raises(SingularityError):
        mixing_matrices(ideal_circuit, [1.0, 0.0])


def test_unbracketed_threshold_is_a_convergence_error():
    # |S12| never falls 400 dB inside (0, 1)
    with pytest.raises(ConvergenceError) as info:
        compression_threshold_x(400.0)
    assert info.value.bracket is not None
