"""
FENNEC flux-charge coupling: single-junction strength, the two-arm gyrator
combination, mean-field compression and first-order noise sensitivities.

Fluxes are in units of Φ0, voltages in volts, conductances in siemens.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from app.config import settings
from app.exceptions import DomainError
from app.physics.constants import DEFAULT_ENERGY_UNIT, E_CHARGE, PHI0, R_Q, to_joules
from app.physics.junction import JunctionSpec, ej_of_voltage

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FennecPoint:
    ej_prime: float
    ej_second: float = 0.0
    flux_bias: float = 0.25
    mean_flux: float = 0.0
    mean_voltage: float = 0.0
    harmonics: Tuple[complex, ...] = ()
    energy_unit: str = DEFAULT_ENERGY_UNIT

    def __post_init__(self):
        values = [self.ej_prime, self.ej_second, self.flux_bias, self.mean_flux, self.mean_voltage]
        if not np.all(np.isfinite(values)) or not np.all(np.isfinite(np.asarray(self.harmonics, dtype=complex))):
            raise DomainError("FENNEC operating point must be finite")

    @property
    def ej_prime_si(self) -> float:
        """∂E_J/∂V in J/V"""
        return to_joules(self.ej_prime, self.energy_unit)

    @property
    def ej_second_si(self) -> float:
        return to_joules(self.ej_second, self.energy_unit)

    @property
    def photon_number(self) -> float:
        return float(np.sum(np.abs(np.asarray(self.harmonics, dtype=complex)) ** 2))


@dataclass(frozen=True)
class GyratorOperatingPoint:
    arm1: FennecPoint
    arm2: FennecPoint
    z0: float
    n1: float = 0.0
    n2: float = 0.0

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < 0:
            raise DomainError("photon numbers must be non-negative")
        if not self.z0 > 0:
            raise DomainError("load impedance Z0 must be positive")

    @classmethod
    def symmetric(cls, ej_prime: float, z0: float, n: float = 0.0,
                  energy_unit: str = DEFAULT_ENERGY_UNIT) -> "GyratorOperatingPoint":
        """Identical junctions biased at ±Φ0/4"""
        arm1 = FennecPoint(ej_prime=ej_prime, flux_bias=0.25, energy_unit=energy_unit)
        arm2 = FennecPoint(ej_prime=ej_prime, flux_bias=-0.25, energy_unit=energy_unit)
        return cls(arm1=arm1, arm2=arm2, z0=z0, n1=n, n2=n)

    @property
    def photon_number(self) -> float:
        return 0.5 * (self.n1 + self.n2)


@dataclass
class GyratorConductance:
    g: float
    g_max: float
    g_plus: float
    arms: Tuple[float, float]
    compression: float
    flags: Dict[str, bool] = field(default_factory=dict)

    @property
    def resistance(self) -> float:
        return np.inf if self.g == 0 else 1.0 / self.g


def compression_factor(z0: float, n: float) -> float:
    """x = π Z0 N/(2 R_Q)"""
    return np.pi * z0 * n / (2.0 * R_Q)


def fennec_strength(p: FennecPoint) -> float:
    """
    G_21 = (4π/R_Q)(E_J'(V0 + <Φ̇2>)/2e) sin(2π(Φ_ex - <Φ1>)),
    with E_J'(V0 + <Φ̇2>) ≈ E_J'(V0) + E_J''(V0)<Φ̇2>.
    """
    ej_prime = p.ej_prime_si + p.ej_second_si * p.mean_voltage
    return (4.0 * np.pi / R_Q) * (ej_prime / (2.0 * E_CHARGE)) * np.sin(2.0 * np.pi * (p.flux_bias - p.mean_flux))


def g_max(ej_prime: float, energy_unit: str = DEFAULT_ENERGY_UNIT) -> float:
    """G_max = (4π/R_Q)(E_J'/2e)"""
    return (4.0 * np.pi / R_Q) * to_joules(ej_prime, energy_unit) / (2.0 * E_CHARGE)


def arm_strength(p: FennecPoint) -> float:
    """Single-arm gyrator term (2π/R_Q)(E_J'/2e) sin(φ_ex)"""
    return 0.5 * fennec_strength(p)


def gyrator_arms(op: GyratorOperatingPoint) -> Dict[str, float]:
    a1, a2 = arm_strength(op.arm1), arm_strength(op.arm2)
    g_minus = a1 - a2
    return {
        "arm1": a1,
        "arm2": a2,
        "G_plus": a1 + a2,
        "G_minus": g_minus,
        "R": np.inf if g_minus == 0 else 1.0 / g_minus,
    }


def gyrator_conductance(op: GyratorOperatingPoint) -> GyratorConductance:
    """
    Time-averaged mean-field conductance. Each arm is compressed by its own
    photon number, G_- = a1(1 - x1) - a2(1 - x2); for symmetric arms this is
    G_max(1 - πZ0N/(2R_Q)) with N = (N1 + N2)/2.
    """
    a1, a2 = arm_strength(op.arm1), arm_strength(op.arm2)
    x1 = compression_factor(op.z0, op.n1)
    x2 = compression_factor(op.z0, op.n2)
    g = a1 * (1.0 - x1) - a2 * (1.0 - x2)
    g_uncompressed = a1 - a2
    flags = {"beyond_validity": bool(x1 > 1.0 or x2 > 1.0 or g * g_uncompressed < 0)}
    if flags["beyond_validity"]:
        logger.warning("photon number N=%.4g drives the mean-field conductance past zero", op.photon_number)
    return GyratorConductance(
        g=g,
        g_max=g_uncompressed,
        g_plus=a1 * (1.0 - x1) + a2 * (1.0 - x2),
        arms=(a1 * (1.0 - x1), a2 * (1.0 - x2)),
        compression=compression_factor(op.z0, op.photon_number),
        flags=flags,
    )


def charge_noise_dG(p: FennecPoint, dV: float) -> float:
    """δG = (4π/Φ0) E_J'' sin(2πΦ_ex) δV"""
    return (4.0 * np.pi / PHI0) * p.ej_second_si * np.sin(2.0 * np.pi * p.flux_bias) * dV


def flux_noise_dG(p: FennecPoint, dphi: float) -> float:
    """
    Shift of G under Φ_ex -> Φ_ex - δΦ, δΦ in units of Φ0:
    δG = -(4π/Φ0) E_J' 2π cos(2πΦ_ex) δΦ.
    """
    return -(4.0 * np.pi / PHI0) * p.ej_prime_si * 2.0 * np.pi * np.cos(2.0 * np.pi * p.flux_bias) * dphi


def gyrator_flux_noise_dG(op: GyratorOperatingPoint, dphi1: float, dphi2: float) -> float:
    """Two-arm shift of G_- under independent flux noise in each loop"""
    return 0.5 * (flux_noise_dG(op.arm1, dphi1) - flux_noise_dG(op.arm2, dphi2))


def gate_voltage_resolution(p: FennecPoint) -> Dict[str, float]:
    """
    Gate voltage resolution keeping δG negligible. `absolute` bounds δV so that
    δG·R_Q ≪ 1, `relative` so that δG/G ≪ 1.
    """
    slope = (4.0 * np.pi / PHI0) * p.ej_second_si * np.sin(2.0 * np.pi * p.flux_bias)
    absolute = np.inf if slope == 0 else 1.0 / abs(slope * R_Q)
    relative = np.inf if p.ej_second == 0 else abs(p.ej_prime / p.ej_second)
    return {"absolute": absolute, "relative": relative}


def coupling_figures(g: float, g_max_value: float) -> Dict[str, float]:
    return {
        "G_over_Gmax": np.nan if g_max_value == 0 else g / g_max_value,
        "G_times_RQ": g * R_Q,
    }


@dataclass
class FixedPointResult:
    g: float
    iterations: int
    converged: bool
    history: Tuple[float, ...]


def self_consistent_conductance(
    op: GyratorOperatingPoint,
    photon_numbers: Callable[[float], Tuple[float, float]],
    damping: Optional[float] = None,
    tolerance: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> FixedPointResult:
    """
    Damped fixed-point iteration G <- (1-d)G + d·G(N(G)), where
    `photon_numbers(G)` returns the mode photon numbers produced by conductance G.
    """
    damping = settings.mean_field_damping if damping is None else damping
    tolerance = settings.mean_field_tolerance if tolerance is None else tolerance
    max_iter = settings.mean_field_max_iter if max_iter is None else max_iter

    g = gyrator_conductance(op).g_max
    history = [g]
    for iteration in range(1, max_iter + 1):
        n1, n2 = photon_numbers(g)
        trial = GyratorOperatingPoint(arm1=op.arm1, arm2=op.arm2, z0=op.z0, n1=n1, n2=n2)
        g_new = (1.0 - damping) * g + damping * gyrator_conductance(trial).g
        history.append(g_new)
        if abs(g_new - g) <= tolerance * max(abs(g_new), np.finfo(float).tiny):
            return FixedPointResult(g_new, iteration, True, tuple(history))
        g = g_new

    logger.warning("mean-field fixed point not converged after %d iterations", max_iter)
    return FixedPointResult(g, max_iter, False, tuple(history))


@dataclass
class QuadraticCoefficients:
    charge_offset: float
    flux_offset: float
    capacitance_shift: float
    inverse_inductance: float
    conductance: float

    def as_dict(self) -> Dict[str, float]:
        return {
            "alpha": self.charge_offset,
            "beta": self.flux_offset,
            "c": self.capacitance_shift,
            "inv_l": self.inverse_inductance,
            "G": self.conductance,
        }


def quadratic_coefficients(spec: JunctionSpec, V: float) -> Dict[str, Dict[str, float]]:
    """
    Quadratic-order coefficients of the junction Lagrangian at φ1 = 0 for general
    transmission, their weak-transmission forms, and the difference (exact - weak).
    SI units.
    """
    phi_ex = 2.0 * np.pi * spec.external_flux
    s = np.sin(phi_ex / 2.0) ** 2
    gap = spec.gap_joules
    T = spec.transmissions(V)
    T1 = spec.transmissions(V, 1)
    T2 = spec.transmissions(V, 2)
    D = 1.0 - T * s
    if np.any(D <= 0):
        raise DomainError("1 - T sin²(φ_ex/2) must be positive")
    root = np.sqrt(D)
    k = 2.0 * np.pi / PHI0

    exact = QuadraticCoefficients(
        charge_offset=-gap * np.sum(T1 * s / (2.0 * root)),
        flux_offset=k * gap * np.sum(T * np.sin(phi_ex) / (4.0 * root)),
        capacitance_shift=-gap * np.sum(T2 * s / (2.0 * root) + T1**2 * s**2 / (4.0 * D * root)),
        inverse_inductance=k**2 * gap * np.sum(T * (np.cos(phi_ex) + T * s**2) / (4.0 * D * root)),
        conductance=2.0 * k * (gap / 4.0) * np.sum(T1 * np.sin(phi_ex) * (1.0 - T * s / 2.0) / (D * root)),
    )

    ej = gap * np.sum(T) / 4.0
    ej1 = gap * np.sum(T1) / 4.0
    ej2 = gap * np.sum(T2) / 4.0
    weak = QuadraticCoefficients(
        charge_offset=-ej1 * (1.0 - np.cos(phi_ex)),
        flux_offset=k * ej * np.sin(phi_ex),
        capacitance_shift=-(1.0 - np.cos(phi_ex)) * ej2,
        inverse_inductance=k**2 * ej * np.cos(phi_ex),
        conductance=2.0 * k * ej1 * np.sin(phi_ex),
    )
    exact_d, weak_d = exact.as_dict(), weak.as_dict()
    return {
        "exact": exact_d,
        "weak": weak_d,
        "difference": {key: exact_d[key] - weak_d[key] for key in exact_d},
    }


def strength_from_junction(spec: JunctionSpec, V0: float, mean_flux: float = 0.0,
                           mean_voltage: float = 0.0) -> float:
    """fennec_strength with E_J', E_J'' taken from a parametric junction at V0"""
    p = FennecPoint(
        ej_prime=float(ej_of_voltage(spec, V0, 1)),
        ej_second=float(ej_of_voltage(spec, V0, 2)),
        flux_bias=spec.external_flux,
        mean_flux=mean_flux,
        mean_voltage=mean_voltage,
        energy_unit=spec.energy_unit,
    )
    return fennec_strength(p)
