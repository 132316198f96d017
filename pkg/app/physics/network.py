"""
Impedance and scattering matrices of the two-port FENNEC gyrator and the
gyrator-based three-port circulator.
"""

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from app.config import settings
from app.exceptions import DomainError, SingularityError

logger = logging.getLogger(__name__)

ID2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)

DISORDER_FIELDS = ("d_lc", "d_c0", "d_l0", "c12", "l12")


@dataclass(frozen=True)
class Disorder:
    d_lc: float = 0.0
    d_c0: float = 0.0
    d_l0: float = 0.0
    c12: float = 0.0
    l12: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(list(asdict(self).values()))):
            raise DomainError("disorder parameters must be finite")

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in asdict(self).values())

    def scaled(self, factor: float) -> "Disorder":
        return Disorder(**{k: v * factor for k, v in asdict(self).items()})


@dataclass(frozen=True)
class GyratorCircuit:
    l0: float
    c0: float
    lc: float
    z_tl: float
    g: float
    disorder: Disorder = field(default_factory=Disorder)

    def __post_init__(self):
        if not (self.l0 > 0 and self.c0 > 0 and self.z_tl > 0):
            raise DomainError("L0, C0 and Z_TL must be positive")
        if not self.lc >= 0:
            raise DomainError("coupling inductance L_c must be non-negative")
        if not np.isfinite(self.g):
            raise DomainError("conductance G must be finite")

    @property
    def omega0(self) -> float:
        return 1.0 / np.sqrt(self.l0 * self.c0)

    @property
    def z0(self) -> float:
        return np.sqrt(self.l0 / self.c0)

    @classmethod
    def from_normalized(cls, omega0: float, z_tl: float, lc: float, z0: float, g: float,
                        disorder: Optional[Disorder] = None) -> "GyratorCircuit":
        """
        Dimensionless parameters: lc = L_c ω0/Z_TL, z0 = Z0/Z_TL, g = G Z_TL.
        Disorder is given in SI units.
        """
        z0_si = z0 * z_tl
        return cls(
            l0=z0_si / omega0,
            c0=1.0 / (z0_si * omega0),
            lc=lc * z_tl / omega0,
            z_tl=z_tl,
            g=g / z_tl,
            disorder=disorder or Disorder(),
        )

    def normalized(self) -> Dict[str, float]:
        return {
            "omega0": self.omega0,
            "lc": self.lc * self.omega0 / self.z_tl,
            "z0": self.z0 / self.z_tl,
            "g": self.g * self.z_tl,
        }

    def with_conductance(self, g: float) -> "GyratorCircuit":
        return replace(self, g=g)

    def with_disorder(self, disorder: Disorder) -> "GyratorCircuit":
        return replace(self, disorder=disorder)

    def echo(self) -> Dict:
        out = asdict(self)
        out.update({"omega0": self.omega0, "z0": self.z0})
        return out


@dataclass(frozen=True)
class ComplexTwoPort:
    matrix: np.ndarray
    omega: float
    kind: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise DomainError(f"two-port matrix must be 2x2, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise SingularityError(f"non-finite {self.kind} matrix at ω={self.omega}")
        if self.kind not in ("impedance", "scattering"):
            raise DomainError(f"unknown two-port kind '{self.kind}'")
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class PauliAngle:
    tan2theta: float
    z_tl_bar: float
    y0_bar: complex
    numerator: float
    denominator: float
    g: float
    phase: complex = 1.0

    def __post_init__(self):
        recomputed = self.numerator / self.denominator if self.denominator != 0 else np.inf
        if np.isfinite(recomputed):
            expected = 2.0 * self.g * self.z_tl_bar / (
                1.0 - (self.z_tl_bar**2 * self.y0_bar**2).real - self.g**2 * self.z_tl_bar**2
            )
            if not np.isclose(recomputed, expected, rtol=1e-12, atol=0.0):
                raise DomainError("tan(2θ) inconsistent with its defining formula")

    @property
    def z0_bar(self) -> complex:
        return complex(np.inf) if self.y0_bar == 0 else 1.0 / self.y0_bar

    @property
    def theta(self) -> float:
        return 0.5 * np.arctan2(self.numerator, self.denominator)


def _inv2(m: np.ndarray, scale: float, what: str) -> np.ndarray:
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    if abs(det) < settings.singular_det_floor * scale:
        raise SingularityError(f"singular {what}: |det| = {abs(det):.3e}")
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]], dtype=complex) / det


def element_matrices(circ: GyratorCircuit):
    d = circ.disorder
    c = circ.c0 * ID2 + d.d_c0 * SZ - d.c12 * SX
    l = circ.l0 * ID2 + d.d_l0 * SZ - d.l12 * SX
    lc = circ.lc * ID2 + d.d_lc * SZ
    return c, l, lc


def load_admittance(circ: GyratorCircuit, omega: float) -> complex:
    """Y0(ω) = iωC0 + 1/(iωL0); vanishes at resonance"""
    return 1j * omega * circ.c0 + 1.0 / (1j * omega * circ.l0)


def impedance(circ: GyratorCircuit, omega: float) -> ComplexTwoPort:
    """Z_ω = iωL_c + [iωC + (iωL)⁻¹ + iGσy]⁻¹"""
    if not omega > 0:
        raise DomainError("frequency must be positive")
    c, l, lc = element_matrices(circ)
    inv_l = _inv2(1j * omega * l, (omega * circ.l0) ** 2, "inductance matrix")
    inner = 1j * omega * c + inv_l + 1j * circ.g * SY
    scale = (omega * circ.c0) ** 2 + (1.0 / (omega * circ.l0)) ** 2 + circ.g**2
    try:
        z = 1j * omega * lc + _inv2(inner, scale, "admittance matrix")
    except SingularityError:
        raise SingularityError(f"resonance singularity at ω={omega:.6g} (G={circ.g}, no disorder)")
    return ComplexTwoPort(z, omega, "impedance")


def scattering_from_impedance(z: ComplexTwoPort, z_tl: float) -> ComplexTwoPort:
    """S = (Z/Z_TL - 1)⁻¹ (Z/Z_TL + 1)"""
    zn = z.matrix / z_tl
    a = zn - ID2
    scale = max(1.0, float(np.max(np.abs(zn)))) ** 2
    s = _inv2(a, scale, "(Z/Z_TL - 1)") @ (zn + ID2)
    return ComplexTwoPort(s, z.omega, "scattering")


def scattering(circ: GyratorCircuit, omega: float) -> np.ndarray:
    return scattering_from_impedance(impedance(circ, omega), circ.z_tl).matrix


def pauli_angle(circ: GyratorCircuit, omega: float) -> PauliAngle:
    """Renormalized line/load impedances and tan(2θ) for a disorder-free circuit"""
    if not circ.disorder.is_zero:
        raise DomainError("Pauli form requires a disorder-free circuit")
    if not omega > 0:
        raise DomainError("frequency must be positive")
    g = circ.g
    y = load_admittance(circ, omega)
    zc = 1j * omega * circ.lc
    y_bar = y + zc * (y**2 + g**2)
    z_tl_bar = (circ.z_tl / ((1.0 + zc * y) ** 2 + g**2 * zc**2)).real
    num = 2.0 * g * z_tl_bar
    den = (1.0 - z_tl_bar**2 * y_bar**2 - g**2 * z_tl_bar**2).real
    tan2theta = num / den if den != 0 else np.copysign(np.inf, num) if num != 0 else 0.0
    return PauliAngle(tan2theta=tan2theta, z_tl_bar=z_tl_bar, y0_bar=complex(y_bar),
                      numerator=num, denominator=den, g=g)


def pauli_form(circ: GyratorCircuit, omega: float):
    """
    S = e^{iψ}(cos2θ·1 + i sin2θ·σy). The global phase is sqrt(det S) from the
    σy-eigenvalues of Z; the (cos, sin) branch is the one agreeing with the direct path.
    """
    angle = pauli_angle(circ, omega)
    zn = impedance(circ, omega).matrix / circ.z_tl
    a = 0.5 * (zn[0, 0] + zn[1, 1])
    b = 0.5j * (zn[0, 1] - zn[1, 0])
    mu_plus = (a + b + 1.0) / (a + b - 1.0)
    mu_minus = (a - b + 1.0) / (a - b - 1.0)
    phase = np.sqrt(mu_plus * mu_minus)

    norm = np.hypot(angle.numerator, angle.denominator)
    cos2, sin2 = angle.denominator / norm, angle.numerator / norm
    direct = scattering_from_impedance(impedance(circ, omega), circ.z_tl).matrix
    candidates = [sign * phase * (cos2 * ID2 + 1j * sin2 * SY) for sign in (1.0, -1.0)]
    errors = [np.max(np.abs(cand - direct)) for cand in candidates]
    best = int(np.argmin(errors))
    angle = replace(angle, phase=complex(phase * (1.0 if best == 0 else -1.0)))
    return angle, ComplexTwoPort(candidates[best], omega, "scattering")


def circulator_scattering(z_tl: float, r: float, z0: float, omega0: float, omega: float) -> np.ndarray:
    """
    Three-port circulator built from a gyrator of resistance R with LC loads.
    Uses w = 1/Z̃0 with Z̃0 = Z0(-iωω_r)/(ω² - ω_r²), ω_r = ω0, so the
    resonance ω = ω0 is regular.
    """
    if not (z_tl > 0 and z0 > 0 and omega0 > 0 and omega > 0):
        raise DomainError("circulator parameters must be positive")
    w = (omega**2 - omega0**2) / (z0 * (-1j * omega * omega0))
    zw = z_tl * w
    denom = z_tl**2 - r**2 * (zw - 3.0) * (zw + 1.0)
    if abs(denom) < settings.singular_det_floor * max(z_tl, abs(r)) ** 2:
        raise SingularityError("circulator denominator r vanishes")
    m = np.array(
        [
            [r**2 * (zw - 1.0) ** 2 - z_tl**2, 2 * r * ((r + z_tl) - r * zw), 2 * r * (r * (zw + 1.0) - z_tl)],
            [2 * r * (r * (1.0 - zw) - z_tl), r**2 * (zw - 1.0) ** 2 - z_tl**2, -2 * r * (r * (zw + 1.0) + z_tl)],
            [2 * r * (r * (zw + 1.0) + z_tl), -2 * r * (r * (zw + 1.0) - z_tl), r**2 * (zw + 1.0) ** 2 - z_tl**2],
        ],
        dtype=complex,
    )
    return m / denom


def unitarity_error(s: np.ndarray) -> float:
    s = np.asarray(s)
    return float(np.linalg.norm(s.conj().T @ s - np.eye(s.shape[0]), 2))


@dataclass
class ScatteringResult:
    omegas: np.ndarray
    matrices: np.ndarray
    provenance: Dict = field(default_factory=dict)
    reference_omega: float = 1.0

    def to_frame(self) -> pd.DataFrame:
        n = self.matrices.shape[1]
        data = {"omega_norm": self.omegas / self.reference_omega}
        for i in range(n):
            for j in range(n):
                data[f"re_S{i + 1}{j + 1}"] = self.matrices[:, i, j].real
                data[f"im_S{i + 1}{j + 1}"] = self.matrices[:, i, j].imag
        for i in range(n):
            for j in range(n):
                with np.errstate(divide="ignore"):
                    data[f"|S{i + 1}{j + 1}|_dB"] = 20.0 * np.log10(np.abs(self.matrices[:, i, j]))
        return pd.DataFrame(data)

    def to_json(self) -> Dict:
        return {
            "provenance": self.provenance,
            "omega": self.omegas.tolist(),
            "S": [[[[z.real, z.imag] for z in row] for row in m] for m in self.matrices],
        }

    @property
    def max_unitarity_error(self) -> float:
        return max(unitarity_error(m) for m in self.matrices)


def sweep(circ: GyratorCircuit, omegas: Sequence[float], model: str = "direct") -> ScatteringResult:
    """Scattering over a frequency grid; model is 'direct' or 'pauli'"""
    omegas = np.asarray(omegas, dtype=float)
    if model == "direct":
        mats = np.array([scattering(circ, w) for w in omegas])
    elif model == "pauli":
        mats = np.array([pauli_form(circ, w)[1].matrix for w in omegas])
    else:
        raise DomainError(f"unknown scattering model '{model}'")
    result = ScatteringResult(
        omegas=omegas,
        matrices=mats,
        provenance={"model": f"gyrator/{model}", "circuit": circ.echo()},
        reference_omega=circ.omega0,
    )
    err = result.max_unitarity_error
    if circ.disorder.is_zero and err > 1e-10:
        logger.warning("lossless sweep deviates from unitarity by %.3e", err)
    return result


def circulator_sweep(z_tl: float, r: float, z0: float, omega0: float, omegas: Sequence[float]) -> ScatteringResult:
    omegas = np.asarray(omegas, dtype=float)
    mats = np.array([circulator_scattering(z_tl, r, z0, omega0, w) for w in omegas])
    return ScatteringResult(
        omegas=omegas,
        matrices=mats,
        provenance={"model": "circulator", "z_tl": z_tl, "r": r, "z0": z0, "omega0": omega0},
        reference_omega=omega0,
    )
