"""
Driven, damped two-mode quantum model of the FENNEC gyrator.

The Hamiltonian
    H_g = Σ_i 4E_C (n_i - (-1)^i g/(8E_C) sin φ_j)² + E_L φ_i²/2
is built in a Fock basis capped in total excitation number, evolved with a
column-stacked Lindblad superoperator over one drive period and the
scattering matrix is read off the periodic steady state.

Internally ħ = 1 and time is measured in nanoseconds.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh, expm

from app.config import settings
from app.exceptions import ConvergenceError, DomainError
from app.physics.constants import DEFAULT_ENERGY_UNIT, E_CHARGE, HBAR, PHI0, R_Q, from_joules, to_joules
from app.physics.network import GyratorCircuit

logger = logging.getLogger(__name__)

TIME_UNIT = 1e-9


@dataclass(frozen=True)
class QuantumGyratorConfig:
    """
    Energies in `energy_unit`; κ in 1/s, ω_s in rad/s and drive amplitudes
    β_i in √(1/s) (incoming photon-flux amplitudes).
    """

    e_c: float
    e_l: float
    g: float
    kappa: float
    omega_s: float
    betas: Tuple[complex, complex] = (0j, 0j)
    sin_order: int = field(default_factory=lambda: settings.sin_order)
    levels_per_mode: int = field(default_factory=lambda: settings.levels_per_mode)
    excitation_cap: int = field(default_factory=lambda: settings.excitation_cap)
    energy_unit: str = DEFAULT_ENERGY_UNIT

    def __post_init__(self):
        if not (self.e_c > 0 and self.e_l > 0):
            raise DomainError("E_C and E_L must be positive")
        if not (self.kappa >= 0 and self.omega_s > 0):
            raise DomainError("κ must be non-negative and ω_s positive")
        if len(self.betas) != 2:
            raise DomainError("one drive amplitude per port is required")
        object.__setattr__(self, "betas", tuple(complex(b) for b in self.betas))
        if self.sin_order < 1 or self.sin_order % 2 == 0:
            raise DomainError("sin truncation order must be a positive odd integer")
        if self.excitation_cap < 1:
            raise DomainError("excitation cap must be at least 1")
        if self.levels_per_mode < self.excitation_cap + 1:
            raise DomainError("levels per mode must be at least excitation cap + 1")
        if self.eta > settings.eta_warn:
            logger.warning("zero-point parameter η=%.3f is not small; Fock truncation may be inaccurate", self.eta)

    @property
    def eta(self) -> float:
        """(2E_C/(E_L + g²/(16E_C)))^(1/4)"""
        return (2.0 * self.e_c / (self.e_l + self.g**2 / (16.0 * self.e_c))) ** 0.25

    def rate(self, energy: float) -> float:
        """Energy in `energy_unit` as an angular frequency in rad/ns"""
        return to_joules(energy, self.energy_unit) / HBAR * TIME_UNIT

    @property
    def kappa_internal(self) -> float:
        return self.kappa * TIME_UNIT

    @property
    def omega_internal(self) -> float:
        return self.omega_s * TIME_UNIT

    @property
    def period_internal(self) -> float:
        return 2.0 * np.pi / self.omega_internal

    def betas_internal(self, betas: Optional[Sequence[complex]] = None) -> np.ndarray:
        return np.asarray(self.betas if betas is None else betas, dtype=complex) * np.sqrt(TIME_UNIT)

    def with_betas(self, betas: Sequence[complex]) -> "QuantumGyratorConfig":
        return replace(self, betas=tuple(betas))


@dataclass(frozen=True, eq=False)
class FockSystem:
    """
    Two modes in the basis {(n1, n2): n_i < levels, n1 + n2 ≤ cap}. Operators
    are projections of operators built in a padded tensor-product space.
    """

    basis: Tuple[Tuple[int, int], ...]
    eta: float
    b1: np.ndarray
    b2: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    full_index: np.ndarray
    padded_levels: int

    @classmethod
    def build(cls, levels: int, cap: int, eta: float, padding: int = 0) -> "FockSystem":
        m = levels + padding
        basis = tuple(
            sorted(((i, j) for i in range(levels) for j in range(levels) if i + j <= cap),
                   key=lambda s: (s[0] + s[1], s[0]))
        )
        full_index = np.array([i * m + j for i, j in basis])
        ops = padded_operators(m, eta)
        sel = np.ix_(full_index, full_index)
        return cls(
            basis=basis,
            eta=eta,
            full_index=full_index,
            padded_levels=m,
            **{name: op[sel] for name, op in ops.items()},
        )

    @property
    def dim(self) -> int:
        return len(self.basis)

    def project(self, full_operator: np.ndarray) -> np.ndarray:
        return full_operator[np.ix_(self.full_index, self.full_index)]

    def commutator_defect(self) -> float:
        """max |[b, b†] - 1| over states below the top excitation shell"""
        cap = max(n1 + n2 for n1, n2 in self.basis)
        inner = [k for k, (n1, n2) in enumerate(self.basis) if n1 + n2 <= cap - 1]
        sel = np.ix_(inner, inner)
        eye = np.eye(len(inner))
        return max(
            float(np.max(np.abs((b @ b.conj().T - b.conj().T @ b)[sel] - eye))) for b in (self.b1, self.b2)
        )

    def swap_parity(self) -> np.ndarray:
        """U|n1, n2⟩ = (-1)^n2 |n2, n1⟩, mapping b1 → b2 and b2 → -b1"""
        index = {state: k for k, state in enumerate(self.basis)}
        u = np.zeros((self.dim, self.dim))
        for k, (n1, n2) in enumerate(self.basis):
            u[index[(n2, n1)], k] = (-1.0) ** n2
        return u


def padded_operators(levels: int, eta: float) -> Dict[str, np.ndarray]:
    a = np.diag(np.sqrt(np.arange(1, levels, dtype=float)), 1).astype(complex)
    eye = np.eye(levels)
    b1, b2 = np.kron(a, eye), np.kron(eye, a)
    out = {"b1": b1, "b2": b2}
    for k, b in (("1", b1), ("2", b2)):
        out["phi" + k] = eta * (b + b.conj().T)
        out["n" + k] = (b - b.conj().T) / (2j * eta)
    return out


def sin_polynomial(x: np.ndarray, order: int) -> np.ndarray:
    """Odd Taylor polynomial of sin for a square matrix argument"""
    out = np.zeros_like(x)
    power = x.copy()
    x2 = x @ x
    for p in range(1, order + 1, 2):
        out = out + ((-1) ** ((p - 1) // 2) / math.factorial(p)) * power
        power = power @ x2
    return out


@dataclass(frozen=True, eq=False)
class GyratorHamiltonian:
    matrix: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray
    system: FockSystem

    def in_eigenbasis(self, op: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ op @ self.vectors


def build_hamiltonian(cfg: QuantumGyratorConfig) -> GyratorHamiltonian:
    """H_g in rad/ns on the capped basis, with its eigendecomposition"""
    eta = cfg.eta
    system = FockSystem.build(cfg.levels_per_mode, cfg.excitation_cap, eta, padding=2 * cfg.sin_order + 2)
    ops = padded_operators(system.padded_levels, eta)
    e_c, e_l, g = cfg.rate(cfg.e_c), cfg.rate(cfg.e_l), cfg.rate(cfg.g)
    c = g / (8.0 * e_c)
    x1 = ops["n1"] + c * sin_polynomial(ops["phi2"], cfg.sin_order)
    x2 = ops["n2"] - c * sin_polynomial(ops["phi1"], cfg.sin_order)
    h_full = 4.0 * e_c * (x1 @ x1 + x2 @ x2) + 0.5 * e_l * (ops["phi1"] @ ops["phi1"] + ops["phi2"] @ ops["phi2"])
    h = system.project(h_full)
    defect = float(np.max(np.abs(h - h.conj().T)))
    if defect > 1e-12 * max(1.0, float(np.max(np.abs(h)))):
        raise DomainError(f"Hamiltonian is not Hermitian (defect {defect:.3e})")
    h = 0.5 * (h + h.conj().T)
    energies, vectors = eigh(h)
    return GyratorHamiltonian(matrix=h, energies=energies, vectors=vectors, system=system)


# --------------------------------------------------------------- superoperators

def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    n = int(round(np.sqrt(v.size)))
    return np.asarray(v).reshape(n, n, order="F")


def commutator_super(a: np.ndarray) -> np.ndarray:
    """-i[A, ·]"""
    eye = np.eye(a.shape[0])
    return -1j * (np.kron(eye, a) - np.kron(a.T, eye))


def dissipator_super(b: np.ndarray, rate: float) -> np.ndarray:
    """rate·(bρb† - {b†b, ρ}/2)"""
    eye = np.eye(b.shape[0])
    bdb = b.conj().T @ b
    return rate * (np.kron(b.conj(), b) - 0.5 * np.kron(eye, bdb) - 0.5 * np.kron(bdb.T, eye))


class DrivenGyrator:
    """
    Superoperators of the driven model in the eigenbasis of H_g. The static
    part is assembled once; the drive enters as e^{∓iω_s t} multiples of the
    commutators with b_i† and b_i.
    """

    def __init__(self, cfg: QuantumGyratorConfig):
        self.cfg = cfg
        self.hamiltonian = build_hamiltonian(cfg)
        hb = self.hamiltonian
        self.b = [hb.in_eigenbasis(hb.system.b1), hb.in_eigenbasis(hb.system.b2)]
        self.dim = hb.system.dim
        kappa = cfg.kappa_internal
        self.static = commutator_super(np.diag(hb.energies).astype(complex))
        for b in self.b:
            self.static = self.static + dissipator_super(b, kappa)
        self.raise_super = [commutator_super(b.conj().T) for b in self.b]
        self.lower_super = [commutator_super(b) for b in self.b]
        self.amplitude_rows = np.array([b.T.reshape(-1, order="F") for b in self.b])

    def drive(self, t: float, betas: Sequence[complex]) -> np.ndarray:
        """Superoperator of H_d(t) = -Σ (i√κ/2)(β_i e^{-iωt} b_i† - h.c.)"""
        half = 0.5 * np.sqrt(self.cfg.kappa_internal)
        phase = np.exp(-1j * self.cfg.omega_internal * t)
        out = np.zeros_like(self.static)
        for beta, up, down in zip(betas, self.raise_super, self.lower_super):
            if beta == 0:
                continue
            out = out - 1j * half * beta * phase * up + 1j * half * np.conj(beta) * np.conj(phase) * down
        return out

    def liouvillian(self, t: float, betas: Optional[Sequence[complex]] = None) -> np.ndarray:
        return self.static + self.drive(t, self.cfg.betas_internal(betas))


@lru_cache(maxsize=8)
def driven_model(cfg: QuantumGyratorConfig) -> DrivenGyrator:
    return DrivenGyrator(cfg)


def liouvillian(cfg: QuantumGyratorConfig, t: float, betas: Optional[Sequence[complex]] = None) -> np.ndarray:
    """Column-stacked L(t) in 1/ns at internal time t (ns)"""
    return driven_model(cfg).liouvillian(t, betas)


@dataclass(frozen=True, eq=False)
class PeriodPropagator:
    """
    One-period map V(T) together with the functionals
    ρ(0) ↦ (1/T)∫ e^{iω_s t} Tr[b_i ρ(t)] dt (rectangle rule on the substep grid).
    """

    matrix: np.ndarray
    amplitude_functionals: np.ndarray
    substeps: int
    period: float
    spectral_radius: float
    trace_norm: float


def period_propagator(cfg: QuantumGyratorConfig, substeps: Optional[int] = None,
                      betas: Optional[Sequence[complex]] = None) -> PeriodPropagator:
    """
    Time-ordered product of exp(L(t_k + Δt/2)Δt) over T = 2π/ω_s.
    """
    substeps = substeps or settings.lindblad_substeps
    if substeps < settings.lindblad_min_substeps:
        raise DomainError(f"at least {settings.lindblad_min_substeps} substeps per period are required")
    model = driven_model(cfg)
    betas_int = cfg.betas_internal(betas)
    period = cfg.period_internal
    dt = period / substeps
    omega = cfg.omega_internal
    v = np.eye(model.dim**2, dtype=complex)
    functionals = np.zeros((2, model.dim**2), dtype=complex)
    for k in range(substeps):
        t = k * dt
        functionals += np.exp(1j * omega * t) * (model.amplitude_rows @ v)
        step = expm((model.static + model.drive(t + 0.5 * dt, betas_int)) * dt)
        v = step @ v
    functionals /= substeps
    try:
        radius = float(np.max(np.abs(np.linalg.eigvals(v))))
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"period propagator eigenvalues: {e}")
    norm = induced_trace_norm(v)
    if norm > 1.0 + settings.contraction_slack:
        raise ConvergenceError(f"period propagator is not contractive (induced trace norm {norm:.9f})")
    return PeriodPropagator(matrix=v, amplitude_functionals=functionals, substeps=substeps,
                            period=period, spectral_radius=radius, trace_norm=norm)


def induced_trace_norm(v: np.ndarray) -> float:
    """
    sup ‖V(X)‖₁/‖X‖₁ for a completely positive V, evaluated as ‖V†(1)‖_∞.
    Equal to 1 when V is trace preserving.
    """
    n = int(round(np.sqrt(v.shape[0])))
    dual = unvec(v.conj().T @ vec(np.eye(n, dtype=complex)))
    dual = 0.5 * (dual + dual.conj().T)
    return float(np.max(np.abs(np.linalg.eigvalsh(dual))))


def steady_state(v: np.ndarray) -> np.ndarray:
    """Density matrix of the unit-eigenvalue right eigenvector of V"""
    try:
        w, vecs = np.linalg.eig(v)
    except np.linalg.LinAlgError as e:
        raise ConvergenceError(f"period propagator eigenvectors: {e}")
    k = int(np.argmin(np.abs(w - 1.0)))
    others = np.delete(np.abs(w), k)
    if others.size and np.max(others) >= 1.0 - 1e-8:
        raise ConvergenceError(
            f"unit eigenvalue of the period propagator is degenerate (next modulus {np.max(others):.12f})"
        )
    rho = unvec(vecs[:, k])
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    lowest = float(np.min(np.linalg.eigvalsh(rho)))
    if lowest < settings.eigenvalue_floor:
        raise ConvergenceError(f"steady state has a negative eigenvalue {lowest:.3e}")
    return rho


def propagator_gap(v: np.ndarray) -> float:
    """1 - second largest eigenvalue modulus"""
    moduli = np.sort(np.abs(np.linalg.eigvals(v)))[::-1]
    return float(1.0 - moduli[1]) if moduli.size > 1 else 1.0


@dataclass
class DrivenColumn:
    port: int
    beta: complex
    rho: np.ndarray
    amplitudes: np.ndarray
    photon_numbers: Tuple[float, float]
    fixed_point_residual: float
    gap: float


def drive_port(cfg: QuantumGyratorConfig, port: int, substeps: Optional[int] = None) -> DrivenColumn:
    """Periodic steady state with only `port` (0 or 1) driven by its β"""
    beta = cfg.betas[port]
    if beta == 0:
        raise DomainError(f"drive amplitude β{port + 1} is zero; column {port + 1} of S is undefined")
    betas = [0j, 0j]
    betas[port] = beta
    prop = period_propagator(cfg, substeps, betas)
    rho = steady_state(prop.matrix)
    model = driven_model(cfg)
    photons = tuple(float(np.trace(b.conj().T @ b @ rho).real) for b in model.b)
    residual = float(np.max(np.abs(prop.matrix @ vec(rho) - vec(rho))))
    logger.info("port %d driven: photons %s, fixed-point residual %.2e", port + 1, photons, residual)
    return DrivenColumn(
        port=port,
        beta=beta,
        rho=rho,
        amplitudes=prop.amplitude_functionals @ vec(rho),
        photon_numbers=photons,
        fixed_point_residual=residual,
        gap=propagator_gap(prop.matrix),
    )


def extract_scattering(cfg: QuantumGyratorConfig, columns: Sequence[DrivenColumn]) -> np.ndarray:
    """
    S_ij = α_i/β_j - δ_ij with α_i = -2√κ ⟨b_i⟩_ω, the normalization for
    which a single driven damped mode gives (κ/2 + iΔ)/(κ/2 - iΔ).
    """
    s = np.zeros((2, 2), dtype=complex)
    root_kappa = np.sqrt(cfg.kappa_internal)
    for col in columns:
        beta = cfg.betas_internal([col.beta, 0])[0]
        alpha = -2.0 * root_kappa * col.amplitudes
        s[:, col.port] = alpha / beta
        s[col.port, col.port] -= 1.0
    return s


@dataclass
class QuantumScattering:
    matrix: np.ndarray
    photon_numbers: List[Tuple[float, float]]
    gaps: List[float]
    residuals: List[float]
    config: Dict

    def to_dict(self) -> Dict:
        return {
            "S": [[[z.real, z.imag] for z in row] for row in self.matrix],
            "photon_numbers": self.photon_numbers,
            "gap": self.gaps,
            "fixed_point_residual": self.residuals,
            "config": self.config,
        }


def simulate(cfg: QuantumGyratorConfig, substeps: Optional[int] = None) -> QuantumScattering:
    columns = [drive_port(cfg, port, substeps) for port in (0, 1)]
    config = {k: (v if not isinstance(v, tuple) else [[complex(b).real, complex(b).imag] for b in v])
              for k, v in cfg.__dict__.items()}
    return QuantumScattering(
        matrix=extract_scattering(cfg, columns),
        photon_numbers=[c.photon_numbers for c in columns],
        gaps=[c.gap for c in columns],
        residuals=[c.fixed_point_residual for c in columns],
        config=config,
    )


# --------------------------------------------------------------------- mapping

def single_mode_reflection(omega_s: float, omega_m: float, kappa: float) -> complex:
    """Reflection of one driven damped mode, (κ/2 + iΔ)/(κ/2 - iΔ), Δ = ω_s - ω_m"""
    delta = omega_s - omega_m
    return (0.5 * kappa + 1j * delta) / (0.5 * kappa - 1j * delta)


def load_impedance(cfg: QuantumGyratorConfig) -> float:
    """Z0 = √(L0/C0) = (ħ/2e²)√(2E_C/E_L)"""
    return HBAR / (2.0 * E_CHARGE**2) * np.sqrt(2.0 * cfg.e_c / cfg.e_l)


def circuit_from_quantum(cfg: QuantumGyratorConfig) -> GyratorCircuit:
    """
    C0 = e²/2E_C, L0 = (Φ0/2π)²/E_L, Z_TL = 1/(κC0) and G = (4π/R_Q)·g/(8E_C),
    so that g = ħκ/2 corresponds to G = 1/Z_TL.
    """
    if not cfg.kappa > 0:
        raise DomainError("κ must be positive to define a line impedance")
    e_c = to_joules(cfg.e_c, cfg.energy_unit)
    e_l = to_joules(cfg.e_l, cfg.energy_unit)
    c0 = E_CHARGE**2 / (2.0 * e_c)
    l0 = (PHI0 / (2.0 * np.pi)) ** 2 / e_l
    return GyratorCircuit(
        l0=l0,
        c0=c0,
        lc=0.0,
        z_tl=1.0 / (cfg.kappa * c0),
        g=(4.0 * np.pi / R_Q) * cfg.g / (8.0 * cfg.e_c),
    )


def quantum_from_circuit(circ: GyratorCircuit, omega_s: float, betas: Sequence[complex] = (0j, 0j),
                         energy_unit: str = DEFAULT_ENERGY_UNIT, **truncation) -> QuantumGyratorConfig:
    if circ.lc != 0 or not circ.disorder.is_zero:
        raise DomainError("the quantum model covers disorder-free circuits without coupling inductance")
    e_c = from_joules(E_CHARGE**2 / (2.0 * circ.c0), energy_unit)
    e_l = from_joules((PHI0 / (2.0 * np.pi)) ** 2 / circ.l0, energy_unit)
    g = circ.g * 8.0 * e_c * R_Q / (4.0 * np.pi)
    return QuantumGyratorConfig(
        e_c=e_c,
        e_l=e_l,
        g=g,
        kappa=1.0 / (circ.z_tl * circ.c0),
        omega_s=omega_s,
        betas=tuple(betas),
        energy_unit=energy_unit,
        **truncation,
    )
