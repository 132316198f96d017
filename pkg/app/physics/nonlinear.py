"""
Higher-order FENNEC terms: the Λ/ξ coefficient series built from derivatives
of the junction transmission with respect to the other mode's voltage, the
perturbative inversion of the nonlinear canonical charge and the report of
the error Hamiltonian left over once the leading coupling is kept.

Bias convention: the leading Hamiltonian is (q_i - q0_i + g_i cos(φ_j - φ_ex,j))²/2C_i,
so φ_ex,j = +π/2 (flux bias Φ0/4) turns the cosine into +sin φ_j.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import root
from scipy.special import binom

from app.config import settings
from app.exceptions import ConvergenceError, DomainError
from app.physics.constants import DEFAULT_ENERGY_UNIT, E_CHARGE, PHI0, R_Q, from_joules, to_joules

logger = logging.getLogger(__name__)


def binom_half(m: int) -> float:
    """Generalized binomial (1/2 choose m) by the product formula"""
    out = 1.0
    for k in range(m):
        out *= (0.5 - k) / (k + 1)
    return out


def sin_power_series(m: int, x):
    """sin^{2m}(x/2) rebuilt from its cosine series"""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for k in range(m):
        acc = acc + 2.0 * (-1) ** k * binom(2 * m, k) * np.cos((m - k) * x)
    return -((-1) ** m / 4.0**m) * (acc - (-1) ** m * binom(2 * m, m))


def _bell(n: int, k: int, t: Sequence[float]) -> float:
    """Partial Bell polynomial B_{n,k}(t_1, ..., t_{n-k+1}); t[i] is the i-th derivative"""
    if n == 0 and k == 0:
        return 1.0
    if n == 0 or k == 0:
        return 0.0
    return sum(math.comb(n - 1, i - 1) * t[i] * _bell(n - i, k - 1, t) for i in range(1, n - k + 2))


def power_derivatives(t_derivatives: Sequence[float], m_max: int) -> np.ndarray:
    """
    ∂ⁿ(T^m) for n ≤ len(t_derivatives) - 1 (at most 4) and m ≤ m_max from
    [T, ∂T, ∂²T, ...] by Faà di Bruno. Row n, column m.
    """
    t = [float(v) for v in t_derivatives]
    n_max = len(t) - 1
    if n_max > 4:
        raise DomainError("power derivatives are provided up to fourth order")
    out = np.zeros((n_max + 1, m_max + 1))
    for m in range(m_max + 1):
        out[0, m] = t[0] ** m
        for n in range(1, n_max + 1):
            out[n, m] = sum(
                math.perm(m, k) * t[0] ** (m - k) * _bell(n, k, t) for k in range(1, min(n, m) + 1)
            )
    return out


@dataclass
class SeriesCoefficients:
    """
    Λ[j, n, ℓ] and ξ[j, n] for modes j = 0, 1 (SI, energy/voltageⁿ).
    Mode j is driven by the other junction, so Λ[0] is built from junction 2.
    The coupling table g[i, n, m] is indexed by junction.
    """

    lam: np.ndarray
    xi: np.ndarray
    g: np.ndarray
    n_max: int
    m_max: int

    @property
    def l_max(self) -> int:
        return self.m_max

    def to_dict(self) -> Dict:
        return {
            "Lambda": self.lam.tolist(),
            "xi": self.xi.tolist(),
            "n_max": self.n_max,
            "m_max": self.m_max,
        }


def series_coefficients(derivatives, gaps: Sequence[float], n_max: Optional[int] = None,
                        m_max: Optional[int] = None, energy_unit: str = "J") -> SeriesCoefficients:
    """
    derivatives[i][n][m] = ∂ⁿT_i^m/∂V̇ⁿ at the operating point for junction i,
    the derivative taken with respect to the voltage of the mode it couples to.
    gaps are Δ_i in `energy_unit`.
    """
    d = np.asarray(derivatives, dtype=float)
    if d.ndim != 3 or d.shape[0] != 2:
        raise DomainError("derivative table must have shape (2, n_max + 1, m_max + 1)")
    if not np.all(np.isfinite(d)):
        raise DomainError("derivative table must be finite")
    n_max = d.shape[1] - 1 if n_max is None else n_max
    m_max = d.shape[2] - 1 if m_max is None else m_max
    if n_max < 1 or m_max < 1:
        raise DomainError("truncation orders must be at least 1")
    if n_max >= d.shape[1] or m_max >= d.shape[2]:
        raise DomainError("truncation exceeds the supplied derivative table")
    delta = np.array([to_joules(v, energy_unit) for v in gaps], dtype=float)

    g = np.zeros((2, n_max + 1, m_max + 1))
    for i in range(2):
        for m in range(m_max + 1):
            g[i, :, m] = (-1) ** m * binom_half(m) * delta[i] * d[i, : n_max + 1, m]

    lam = np.zeros((2, n_max + 1, m_max + 1))
    xi = np.zeros((2, n_max + 1))
    for j in range(2):
        src = 1 - j
        for n in range(1, n_max + 1):
            for m in range(1, m_max + 1):
                w = binom_half(m) * delta[src] / 4.0 * d[src, n, m]
                for k in range(m):
                    lam[j, n, m - k] -= 2.0 * (-1) ** k / 4.0 ** (m - 1) * binom(2 * m, k) * w
            for m in range(m_max + 1):
                xi[j, n] += (-1) ** m / 4.0 ** (m - 1) * binom_half(m) * binom(2 * m, m) * delta[src] / 4.0 * d[src, n, m]
    return SeriesCoefficients(lam=lam, xi=xi, g=g, n_max=n_max, m_max=m_max)


# ------------------------------------------------------------ charge inversion

@dataclass
class ChargeInversion:
    """
    q = q0 + C·Φ̇ + Σ_{n≥2} g_{n+1} ∘ Φ̇^{∘n}/n!, frozen at one phase point.
    couplings[n] holds the diagonal of g_{n+1} for n = 2, 3, ...
    """

    capacitance: np.ndarray
    offset: np.ndarray
    couplings: Dict[int, np.ndarray] = field(default_factory=dict)
    order: int = field(default_factory=lambda: settings.inversion_order)

    def __post_init__(self):
        self.capacitance = np.asarray(self.capacitance, dtype=float).reshape(2, 2)
        self.offset = np.asarray(self.offset, dtype=float).reshape(2)
        self.couplings = {int(n): np.asarray(v, dtype=float).reshape(2) for n, v in self.couplings.items()}
        if any(n < 2 for n in self.couplings):
            raise DomainError("nonlinear couplings start at n = 2 (g_3)")
        if not 0 <= self.order <= 4:
            raise DomainError("inversion order must be between 0 and 4")
        if abs(np.linalg.det(self.capacitance)) == 0:
            raise DomainError("capacitance matrix is singular")
        self.inverse = np.linalg.inv(self.capacitance)

    @classmethod
    def from_series(cls, coefficients: SeriesCoefficients, base_capacitance, base_offset,
                    phases: Sequence[float], flux_bias: Sequence[float] = (0.25, -0.25),
                    order: Optional[int] = None) -> "ChargeInversion":
        """
        C(φ) = C_base + g_2(φ), q0(φ) = q0_base + g_1(φ) and g_{n+1}(φ) for
        n + 1 ≤ n_max, with g_n(φ) = diag(Σ_m g_{2,n,m} s_2^m, Σ_m g_{1,n,m} s_1^m),
        s_j = sin²((φ_j - φ_ex,j)/2). Flux biases in units of Φ0.
        """
        s = [np.sin(0.5 * (phases[j] - 2.0 * np.pi * flux_bias[j])) ** 2 for j in range(2)]

        def diag(n: int) -> np.ndarray:
            return np.array([
                sum(coefficients.g[1, n, m] * s[1] ** m for m in range(coefficients.m_max + 1)),
                sum(coefficients.g[0, n, m] * s[0] ** m for m in range(coefficients.m_max + 1)),
            ])

        couplings = {n: diag(n + 1) for n in range(2, coefficients.n_max)}
        return cls(
            capacitance=np.asarray(base_capacitance, dtype=float) + np.diag(diag(2)),
            offset=np.asarray(base_offset, dtype=float) + diag(1),
            couplings=couplings,
            order=settings.inversion_order if order is None else order,
        )

    def scaled(self, lam: float) -> "ChargeInversion":
        return ChargeInversion(self.capacitance, self.offset, {n: lam * v for n, v in self.couplings.items()}, self.order)

    def charge(self, velocity) -> np.ndarray:
        v = np.asarray(velocity, dtype=float)
        q = self.offset + self.capacitance @ v
        for n, gn in self.couplings.items():
            q = q + gn * v**n / math.factorial(n)
        return q

    def residual(self, q, velocity) -> float:
        return float(np.max(np.abs(np.asarray(q, dtype=float) - self.charge(velocity))))


def _multiplicities(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """(m_1, ..., m_parts) with Σ j·m_j = total"""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for m_last in range(total // parts + 1):
        for head in _multiplicities(total - parts * m_last, parts - 1):
            yield head + (m_last,)


def series_terms(ci: ChargeInversion, q, order: Optional[int] = None) -> List[np.ndarray]:
    """X_0 ... X_K of the expansion Φ̇ = Σ X_k"""
    order = ci.order if order is None else order
    terms = [ci.inverse @ (np.asarray(q, dtype=float) - ci.offset)]
    for k in range(1, order + 1):
        acc = np.zeros(2)
        for n, gn in ci.couplings.items():
            inner = np.zeros(2)
            for ms in _multiplicities(k - 1, k - 1):
                m0 = n - sum(ms)
                if m0 < 0:
                    continue
                prod = terms[0] ** m0 / math.factorial(m0)
                for j, mj in enumerate(ms, start=1):
                    prod = prod * terms[j] ** mj / math.factorial(mj)
                inner = inner + prod
            acc = acc + gn * inner
        terms.append(-ci.inverse @ acc)
    return terms


def charge_inversion(ci: ChargeInversion, q, order: Optional[int] = None) -> np.ndarray:
    return np.sum(series_terms(ci, q, order), axis=0)


def newton_inversion(ci: ChargeInversion, q, guess=None) -> np.ndarray:
    """Solve the defining relation for Φ̇ numerically"""
    q = np.asarray(q, dtype=float)
    x0 = ci.inverse @ (q - ci.offset) if guess is None else np.asarray(guess, dtype=float)
    sol = root(lambda v: ci.charge(v) - q, x0, method="hybr", options={"xtol": 1e-14})
    if not sol.success:
        raise ConvergenceError(f"charge relation could not be inverted: {sol.message}")
    return sol.x


# ------------------------------------------------------------ error Hamiltonian

@dataclass
class ErrorTerm:
    kind: str
    mode: Optional[int]
    n: int
    ell: Optional[int]
    coefficient: float
    left: float
    right: float

    @property
    def margin(self) -> float:
        return self.right - self.left

    @property
    def satisfied(self) -> bool:
        return self.left < self.right

    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "mode": self.mode,
            "n": self.n,
            "ell": self.ell,
            "coefficient": self.coefficient,
            "left": self.left,
            "right": self.right,
            "margin": self.margin,
            "satisfied": self.satisfied,
        }


@dataclass
class ErrorHamiltonianReport:
    terms: List[ErrorTerm]
    energy_unit: str
    convention: str = "cos(φ_j - φ_ex,j) with φ_ex = +π/2 giving +sin φ_j"

    @property
    def all_satisfied(self) -> bool:
        return all(t.satisfied for t in self.terms)

    @property
    def violations(self) -> List[ErrorTerm]:
        return [t for t in self.terms if not t.satisfied]

    def to_dict(self) -> Dict:
        return {
            "energy_unit": self.energy_unit,
            "convention": self.convention,
            "all_satisfied": self.all_satisfied,
            "terms": [t.to_dict() for t in self.terms],
        }


def error_hamiltonian_report(coefficients: SeriesCoefficients, capacitance, impedances: Sequence[float],
                             energy_unit: str = DEFAULT_ENERGY_UNIT) -> ErrorHamiltonianReport:
    """
    Coefficients of every term class of H_err, expressed per unit of
    ((q - q0)/2e)ⁿ. Each is checked against (4πZ_j/R_Q)^{n/2}, its left side
    being the term's energy scale in `energy_unit`.

      charge_linear  -Λ_{j,1,ℓ}/C_j           ℓ ≥ 2
      charge_power   -Λ_{j,n,ℓ}/(n! C_jⁿ)      n ≥ 2
      pure_charge    -ξ_{j,n}/(n! C_jⁿ)        n ≥ 3
      cross_charge   C_c/(C_1 C_2)
    """
    c = np.asarray(capacitance, dtype=float).reshape(2, 2)
    c_j = np.diag(c)
    c_c = -c[0, 1]
    z = np.asarray(impedances, dtype=float)
    if np.any(c_j <= 0) or np.any(z <= 0):
        raise DomainError("mode capacitances and impedances must be positive")

    terms: List[ErrorTerm] = []

    def add(kind: str, mode: Optional[int], n: int, ell: Optional[int], coef: float, z_ref: float):
        if coef == 0:
            return
        left = abs(from_joules(abs(coef) * (2.0 * E_CHARGE) ** n, energy_unit))
        right = (4.0 * np.pi * z_ref / R_Q) ** (n / 2.0)
        terms.append(ErrorTerm(kind, mode, n, ell, float(coef), float(left), float(right)))

    for j in range(2):
        for n in range(1, coefficients.n_max + 1):
            scale = math.factorial(n) * c_j[j] ** n
            for ell in range(1, coefficients.l_max + 1):
                if n == 1 and ell < 2:
                    continue
                kind = "charge_linear" if n == 1 else "charge_power"
                add(kind, j, n, ell, -coefficients.lam[j, n, ell] / scale, z[j])
            if n >= 3:
                add("pure_charge", j, n, None, -coefficients.xi[j, n] / scale, z[j])
    add("cross_charge", None, 2, None, c_c / (c_j[0] * c_j[1]), float(np.sqrt(z[0] * z[1])))

    report = ErrorHamiltonianReport(terms=terms, energy_unit=energy_unit)
    if not report.all_satisfied:
        logger.warning("%d error-Hamiltonian terms violate their tolerance", len(report.violations))
    return report


def leading_coupling(ej_prime: float, flux_bias: float = 0.25, energy_unit: str = DEFAULT_ENERGY_UNIT) -> float:
    """
    Coefficient of Φ̇_i Φ_j obtained by expanding the cross term
    (q_i - q0_i) g cos(φ_j - φ_ex)/C_i to first order in φ_j, with g = (Δ/4)∂T/∂V̇ = E_J'.
    """
    g = to_joules(ej_prime, energy_unit)
    return g * np.sin(2.0 * np.pi * flux_bias) * 2.0 * np.pi / PHI0
