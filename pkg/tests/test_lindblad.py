import numpy as np
import pytest
from scipy.integrate import solve_ivp

from app.exceptions import DomainError
from app.physics.design import matched
from app.physics.lindblad import (
    TIME_UNIT,
    FockSystem,
    QuantumGyratorConfig,
    build_hamiltonian,
    circuit_from_quantum,
    drive_port,
    driven_model,
    induced_trace_norm,
    liouvillian,
    period_propagator,
    quantum_from_circuit,
    simulate,
    single_mode_reflection,
    steady_state,
    unvec,
    vec,
)
from app.physics.network import scattering


def _omega_m(e_c, e_l):
    """√(8E_C E_L) in rad/s for energies in GHz"""
    return 2.0 * np.pi * 1e9 * np.sqrt(8.0 * e_c * e_l)


def small_config(**overrides):
    omega_m = _omega_m(0.2, 20.0)
    params = dict(e_c=0.2, e_l=20.0, g=0.1, kappa=0.02 * omega_m, omega_s=omega_m,
                  levels_per_mode=3, excitation_cap=2, sin_order=3)
    params.update(overrides)
    return QuantumGyratorConfig(**params)


def _trace_distance(a, b):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


# ---------------------------------------------------------------- Fock system

def test_operators_are_hermitian():
    h = build_hamiltonian(small_config())
    system = h.system
    assert np.allclose(h.matrix, h.matrix.conj().T)
    for op in (system.phi1, system.phi2, system.n1, system.n2):
        assert np.allclose(op, op.conj().T)


def test_basis_respects_excitation_cap():
    system = FockSystem.build(levels=4, cap=3, eta=0.3)
    assert all(n1 + n2 <= 3 for n1, n2 in system.basis)
    assert system.dim == 10
    assert system.commutator_defect() < 1e-12


def test_uncoupled_splitting_is_plasma_frequency():
    cfg = small_config(g=0.0, sin_order=1)
    energies = build_hamiltonian(cfg).energies
    assert energies[1] - energies[0] == pytest.approx(cfg.rate(np.sqrt(8.0 * 0.2 * 20.0)), rel=1e-10)


def test_swap_symmetry():
    h = build_hamiltonian(small_config(levels_per_mode=4, excitation_cap=3))
    u = h.system.swap_parity()
    np.testing.assert_allclose(u @ h.system.b1 @ u.T, h.system.b2, atol=1e-12)
    np.testing.assert_allclose(u @ h.matrix @ u.T, h.matrix, atol=1e-9 * np.max(np.abs(h.matrix)))


def test_quadratic_normal_modes():
    e_c, e_l, g = 0.1, 40.0, 0.05
    cfg = QuantumGyratorConfig(e_c=e_c, e_l=e_l, g=g, kappa=1e6, omega_s=_omega_m(e_c, e_l),
                               sin_order=1, levels_per_mode=6, excitation_cap=5)
    energies = build_hamiltonian(cfg).energies
    omega_m = np.sqrt(8.0 * e_c * e_l)
    lower = np.sqrt(omega_m**2 + g**2) - g
    assert energies[1] - energies[0] == pytest.approx(cfg.rate(lower), rel=1e-5)
    assert energies[2] - energies[1] == pytest.approx(cfg.rate(2.0 * g), rel=1e-3)


def test_invalid_truncation_rejected():
    with pytest.raises(DomainError):
        small_config(sin_order=2)
    with pytest.raises(DomainError):
        small_config(levels_per_mode=2, excitation_cap=2)


# ---------------------------------------------------------------- Liouvillian

def test_liouvillian_preserves_trace():
    cfg = small_config(betas=(0.05 + 0.02j, -0.03j))
    dim = driven_model(cfg).dim
    trace_row = vec(np.eye(dim))
    for t in (0.0, 0.3 * cfg.period_internal):
        lv = liouvillian(cfg, t, [1e4, 2e4j])
        assert np.max(np.abs(trace_row @ lv)) < 1e-9 * np.max(np.abs(lv))


def test_closed_system_stays_pure():
    cfg = small_config(kappa=0.0)
    prop = period_propagator(cfg, substeps=64, betas=[0j, 0j])
    dim = driven_model(cfg).dim
    psi = np.zeros(dim, dtype=complex)
    psi[0] = psi[1] = 1.0 / np.sqrt(2.0)
    rho = unvec(prop.matrix @ vec(np.outer(psi, psi.conj())))
    assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-10)


def test_propagator_conserves_trace():
    cfg = small_config()
    beta = 0.05 * np.sqrt(cfg.kappa)
    prop = period_propagator(cfg, substeps=64, betas=[beta, 0j])
    dim = driven_model(cfg).dim
    rho0 = np.eye(dim) / dim
    assert np.trace(unvec(prop.matrix @ vec(rho0))).real == pytest.approx(1.0, abs=1e-10)
    assert prop.spectral_radius <= 1.0 + 1e-6
    assert prop.trace_norm == pytest.approx(1.0, abs=1e-9)


def test_induced_trace_norm_of_a_kraus_map():
    # X ↦ K X K† with K = diag(1.5, 0.5) has ‖K†K‖ = 2.25
    k = np.diag([1.5, 0.5]).astype(complex)
    v = np.kron(k.conj(), k)
    assert induced_trace_norm(v) == pytest.approx(2.25, rel=1e-12)
    assert induced_trace_norm(np.eye(4)) == pytest.approx(1.0)
    assert induced_trace_norm(2.0 * v) == pytest.approx(4.5, rel=1e-12)


def test_propagator_matches_direct_integration():
    cfg = small_config()
    betas = [0.05 * np.sqrt(cfg.kappa), 0j]
    prop = period_propagator(cfg, substeps=2048, betas=betas)
    model = driven_model(cfg)
    rho0 = np.zeros((model.dim, model.dim), dtype=complex)
    rho0[0, 0] = 1.0
    internal = cfg.betas_internal(betas)

    def rhs(t, y):
        return (model.static + model.drive(t, internal)) @ y

    sol = solve_ivp(rhs, (0.0, cfg.period_internal), vec(rho0), method="DOP853", rtol=1e-11, atol=1e-13)
    direct = unvec(sol.y[:, -1])
    stepped = unvec(prop.matrix @ vec(rho0))
    assert _trace_distance(direct, stepped) <= 1e-7


def test_propagator_converges_at_second_order():
    cfg = small_config(betas=(0.2 * np.sqrt(small_config().kappa), 0j))
    coarse, mid, fine = (period_propagator(cfg, n).matrix for n in (256, 512, 1024))
    ratio = np.max(np.abs(mid - fine)) / np.max(np.abs(coarse - mid))
    assert 0.2 <= ratio <= 0.3


def test_too_few_substeps_rejected():
    with pytest.raises(DomainError):
        period_propagator(small_config(), substeps=8)


# -------------------------------------------------------- steady state and S

def test_undriven_steady_state_is_ground():
    cfg = small_config()
    rho = steady_state(period_propagator(cfg, 64, [0j, 0j]).matrix)
    assert np.trace(rho).real == pytest.approx(1.0)
    assert rho[0, 0].real >= 0.999


def test_driven_steady_state_is_a_fixed_point():
    cfg = small_config(betas=(0.05 * np.sqrt(small_config().kappa), 0j))
    column = drive_port(cfg, 0, substeps=128)
    assert column.fixed_point_residual <= 1e-10
    assert column.gap > 0
    assert min(np.linalg.eigvalsh(column.rho)) > -1e-8


def test_drive_port_needs_amplitude():
    with pytest.raises(DomainError):
        drive_port(small_config(), 1, substeps=64)


def test_single_mode_reflection_formula():
    assert single_mode_reflection(1.01, 1.0, 0.02) == pytest.approx(1j)
    assert abs(single_mode_reflection(1.3, 1.0, 0.02)) == pytest.approx(1.0)


def test_uncoupled_modes_reflect_like_single_modes():
    omega_m = _omega_m(0.2, 20.0)
    kappa = 0.02 * omega_m
    beta = 0.05 * np.sqrt(kappa)
    cfg = small_config(g=0.0, sin_order=1, kappa=kappa, omega_s=omega_m + 0.5 * kappa, betas=(beta, beta))
    s = simulate(cfg, substeps=128).matrix
    expected = single_mode_reflection(cfg.omega_s, omega_m, kappa)
    assert expected == pytest.approx(1j)
    assert s[0, 0] == pytest.approx(expected, abs=5e-3)
    assert s[1, 1] == pytest.approx(expected, abs=5e-3)
    assert abs(s[0, 1]) < 5e-3


def _matched_quantum(betas_scale=0.1, e_c=0.02, **truncation):
    # E_C E_L = 3.125 GHz² keeps ω_m fixed while the zero-point spread η = (2E_C/E_L)^¼ varies
    e_l = 3.125 / e_c
    omega_m = _omega_m(e_c, e_l)
    base = QuantumGyratorConfig(e_c=e_c, e_l=e_l, g=0.0, kappa=0.02 * omega_m, omega_s=omega_m,
                                sin_order=3, levels_per_mode=4, excitation_cap=3)
    circ = matched(circuit_from_quantum(base))
    beta = betas_scale * np.sqrt(base.kappa)
    params = dict(sin_order=3, levels_per_mode=4, excitation_cap=3)
    params.update(truncation)
    return circ, quantum_from_circuit(circ, circ.omega0, betas=(beta, beta), **params)


def test_circuit_mapping_round_trip():
    circ, cfg = _matched_quantum()
    back = circuit_from_quantum(cfg)
    assert back.l0 == pytest.approx(circ.l0, rel=1e-12)
    assert back.c0 == pytest.approx(circ.c0, rel=1e-12)
    assert back.z_tl == pytest.approx(circ.z_tl, rel=1e-12)
    assert back.g == pytest.approx(circ.g, rel=1e-12)
    # matched conductance is g = ħκ/2
    assert cfg.rate(cfg.g) == pytest.approx(0.5 * cfg.kappa * TIME_UNIT, rel=1e-9)


@pytest.mark.parametrize("e_c, atol", [(0.005, 0.02), (0.02, 0.02), (0.05, 0.05)])
def test_weak_drive_agrees_with_network(e_c, atol):
    circ, cfg = _matched_quantum(e_c=e_c)
    result = simulate(cfg, substeps=128)
    assert max(max(n) for n in result.photon_numbers) <= 0.05
    np.testing.assert_allclose(result.matrix, scattering(circ, circ.omega0), atol=atol)


def test_drive_phase_on_the_grid_is_a_time_shift():
    _, cfg = _matched_quantum()
    rotated = cfg.with_betas([1j * b for b in cfg.betas])
    np.testing.assert_allclose(simulate(rotated, substeps=128).matrix, simulate(cfg, substeps=128).matrix, atol=1e-8)


def test_weak_drive_is_linear():
    _, strong = _matched_quantum(0.1)
    _, weak = _matched_quantum(0.05)
    np.testing.assert_allclose(simulate(weak, substeps=128).matrix, simulate(strong, substeps=128).matrix, atol=1e-3)
