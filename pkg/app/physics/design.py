"""
Design problems for the FENNEC gyrator: impedance-matched conductance,
central frequency, passband, compression point, disorder sensitivity and
the frequency-mixing blocks of the weakly driven device.

Frequencies are angular (rad/s) unless a name says otherwise.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from app.config import settings
from app.exceptions import ConvergenceError, DomainError, FennecError, SingularityError
from app.physics.constants import E_CHARGE, R_Q
from app.physics.coupling import GyratorOperatingPoint, gyrator_conductance
from app.physics.network import (
    DISORDER_FIELDS,
    ID2,
    SX,
    SY,
    SZ,
    Disorder,
    GyratorCircuit,
    element_matrices,
    impedance,
    load_admittance,
    pauli_angle,
    scattering,
)

logger = logging.getLogger(__name__)

HARMONICS = (-3, -1, 1, 3)


def _root(f, a: float, b: float, xtol: float, what: str) -> float:
    """brentq with scipy failures reported as ConvergenceError"""
    try:
        return brentq(f, a, b, xtol=xtol)
    except FennecError:
        raise
    except (ValueError, RuntimeError) as e:
        raise ConvergenceError(f"{what}: {e}", bracket=(a, b))


def _pairs(m: np.ndarray) -> List:
    return [[[z.real, z.imag] for z in row] for row in m]


# ---------------------------------------------------------------- conductance

def _g0_closed(x: float) -> float:
    """G0·Z_TL for x = √2 L_cω0/Z_TL, rationalized so that x → 0 is regular"""
    return 2.0 / (np.sqrt(1.0 + 2.0 * x**2) + 1.0)


def _g0_series(x: float) -> float:
    return 1.0 - x**2 / 2.0


def optimal_conductance(circ: GyratorCircuit) -> float:
    """
    Impedance-matched conductance
    G0 = [√(1 + 2x²) - 1] / (Z_TL x²),  x = √2 L_cω0/Z_TL,
    which tends to 1/Z_TL for vanishing L_c and to 1/(L_cω0) for large L_c.
    """
    lc_norm = circ.lc * circ.omega0 / circ.z_tl
    x = np.sqrt(2.0) * lc_norm
    if lc_norm < 1e-6:
        return _g0_series(x) / circ.z_tl
    return _g0_closed(x) / circ.z_tl


def matched(circ: GyratorCircuit) -> GyratorCircuit:
    return circ.with_conductance(optimal_conductance(circ))


# ---------------------------------------------------------- renormalized parts

def _renormalized(circ: GyratorCircuit, omega: float) -> Tuple[float, float]:
    """
    Dimensionless (Z_TL/Z̄_TL, Z_TL²·Z̄0⁻²) at ω. Both are finite everywhere,
    unlike tan(2θ) whose numerator and denominator share the poles of Z̄_TL.
    """
    y = load_admittance(circ, omega)
    zc = 1j * omega * circ.lc
    inv_ztl_bar = ((1.0 + zc * y) ** 2 + circ.g**2 * zc**2).real
    y_bar = y + zc * (y**2 + circ.g**2)
    return float(inv_ztl_bar), float((circ.z_tl**2 * y_bar**2).real)


def central_residual(circ: GyratorCircuit, omega: float) -> float:
    """Z_TL²·[Z̄_TL⁻²(ω) - Z̄0⁻²(ω) - G²]"""
    inv_bar, y_bar2 = _renormalized(circ, omega)
    return inv_bar**2 - y_bar2 - (circ.g * circ.z_tl) ** 2


def _passband_margin(circ: GyratorCircuit, omega: float) -> float:
    """Positive inside the passband: |2G Z̄_TL| - |1 - Z̄_TL²Z̄0⁻² - G²Z̄_TL²| scaled by Z̄_TL⁻²"""
    inv_bar, _ = _renormalized(circ, omega)
    return abs(2.0 * circ.g * circ.z_tl * inv_bar) - abs(central_residual(circ, omega))


def central_frequency(circ: GyratorCircuit, grid_points: int = 4001) -> float:
    """
    Root of Z̄_TL⁻² - Z̄0⁻² - G² nearest ω0 inside [0.5ω0, 1.5ω0]. A double
    root (the residual touches zero, as for L_c = 0 and G = 1/Z_TL) is found
    by minimizing the residual instead.
    """
    w0 = circ.omega0
    grid = np.linspace(0.5 * w0, 1.5 * w0, grid_points)
    values = np.array([central_residual(circ, w) for w in grid])
    xtol = settings.frequency_root_xtol * w0

    exact = np.flatnonzero(values == 0.0)
    crossings = np.flatnonzero(np.sign(values[:-1]) * np.sign(values[1:]) < 0)
    candidates: List[float] = [float(grid[i]) for i in exact]
    for i in crossings:
        candidates.append(_root(lambda w: central_residual(circ, w), grid[i], grid[i + 1], xtol, "central frequency"))
    if candidates:
        return min(candidates, key=lambda w: abs(w - w0))

    k = int(np.argmin(np.abs(values)))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]
    res = minimize_scalar(
        lambda w: abs(central_residual(circ, w)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": xtol},
    )
    if abs(res.fun) > 1e-10:
        raise ConvergenceError(
            f"no central-frequency root in [0.5ω0, 1.5ω0] (min residual {abs(res.fun):.3e})",
            bracket=(0.5 * w0, 1.5 * w0),
        )
    return float(res.x)


# ------------------------------------------------------------------- bandwidth

@dataclass
class BandwidthResult:
    omega_minus: float
    omega_plus: float
    delta: float
    residuals: Tuple[float, float]
    estimates: Dict[str, Optional[float]] = field(default_factory=dict)
    notches: List[Tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


def bandwidth_estimates(circ: GyratorCircuit) -> Dict[str, Optional[float]]:
    """
    Closed-form passband widths (rad/s):
      large_lc      δ ≈ Z0 Z_TL/(L_c²ω0)
      linearized    tan(2θ) expanded to first order in the detuning,
                    δ/ω0 ≈ 2g/(g²ℓ² + 2ℓ/z0) with g = G Z_TL, ℓ = L_cω0/Z_TL, z0 = Z0/Z_TL
      lc_zero       exact for L_c = 0: δ = 2ω0 ε Z0/Z_TL, 4ε² = G²Z_TL² + 2|G|Z_TL - 1
    """
    w0 = circ.omega0
    p = circ.normalized()
    ell, z0, g = p["lc"], p["z0"], p["g"]
    out: Dict[str, Optional[float]] = {"large_lc": None, "linearized": None, "lc_zero": None}
    if ell > 0:
        out["large_lc"] = circ.z0 * circ.z_tl / (circ.lc**2 * w0)
        out["linearized"] = w0 * 2.0 * abs(g) / (g**2 * ell**2 + 2.0 * ell / z0)
    four_eps2 = g**2 + 2.0 * abs(g) - 1.0
    if four_eps2 > 0:
        out["lc_zero"] = w0 * np.sqrt(four_eps2) * z0
    return out


def _crossing(circ: GyratorCircuit, start: float, direction: float, lo_limit: float, hi_limit: float) -> float:
    """First zero of the passband margin going outward from `start`, which lies inside the band"""
    w0 = circ.omega0
    xtol = settings.frequency_root_xtol * w0
    step = 1e-6 * w0
    inner = start
    while True:
        outer = start + direction * step
        if outer <= lo_limit or outer >= hi_limit:
            outer = lo_limit if direction < 0 else hi_limit
            if _passband_margin(circ, outer) > 0:
                raise ConvergenceError(
                    "passband edge not found in [0.2ω0, 1.8ω0]", bracket=(lo_limit, hi_limit)
                )
        if _passband_margin(circ, outer) <= 0:
            a, b = sorted((inner, outer))
            return _root(lambda w: _passband_margin(circ, w), a, b, xtol, "passband edge")
        inner = outer
        step *= settings.bracket_growth


def _reentry(circ: GyratorCircuit, edge: float, direction: float, lo_limit: float, hi_limit: float) -> Optional[float]:
    """A frequency back inside the band within the notch window past `edge`, if any"""
    span = settings.bandwidth_notch_fraction * abs(edge - circ.omega0)
    for w in edge + direction * np.linspace(0.0, span, settings.bandwidth_notch_samples)[1:]:
        if w <= lo_limit or w >= hi_limit:
            return None
        if _passband_margin(circ, w) > 0:
            return float(w)
    return None


def _edge(circ: GyratorCircuit, direction: float, lo_limit: float, hi_limit: float):
    """
    Band edge on one side of ω0. Reflection notches narrower than the notch
    window (a fraction of the distance to ω0) are bridged: they sit at the
    pole of Z̄_TL, where tan(2θ) passes through zero inside the band.
    """
    start = circ.omega0
    notches: List[Tuple[float, float]] = []
    while True:
        edge = _crossing(circ, start, direction, lo_limit, hi_limit)
        back = _reentry(circ, edge, direction, lo_limit, hi_limit)
        if back is None:
            return edge, notches
        notches.append((min(edge, back), max(edge, back)))
        start = back


def bandwidth(circ: GyratorCircuit) -> BandwidthResult:
    """Band edges |tan 2θ| = 1 nearest ω0 on either side"""
    w0 = circ.omega0
    if _passband_margin(circ, w0) <= 0:
        raise ConvergenceError("|tan 2θ| ≤ 1 at ω0: the device has no passband there", bracket=(w0, w0))
    lo_limit, hi_limit = 0.2 * w0, 1.8 * w0
    w_minus, notches_minus = _edge(circ, -1.0, lo_limit, hi_limit)
    w_plus, notches_plus = _edge(circ, +1.0, lo_limit, hi_limit)
    residuals = tuple(abs(abs(pauli_angle(circ, w).tan2theta) - 1.0) for w in (w_minus, w_plus))
    notches = sorted(notches_minus + notches_plus)
    if notches:
        logger.info("bridged %d reflection notch(es) inside the passband", len(notches))
    logger.debug("passband [%.9g, %.9g] rad/s, residuals %s", w_minus, w_plus, residuals)
    return BandwidthResult(
        omega_minus=w_minus,
        omega_plus=w_plus,
        delta=w_plus - w_minus,
        residuals=residuals,
        estimates=bandwidth_estimates(circ),
        notches=notches,
    )


# ----------------------------------------------------------------- compression

@dataclass
class CompressionCurve:
    photon_numbers: np.ndarray
    conductance: np.ndarray
    transmission: np.ndarray
    n_1db: float
    threshold: float
    reference: float

    def to_dict(self) -> Dict:
        return {
            "photon_numbers": self.photon_numbers.tolist(),
            "conductance": self.conductance.tolist(),
            "transmission": self.transmission.tolist(),
            "n_1db": self.n_1db,
            "threshold": self.threshold,
            "reference": self.reference,
        }


def compression_threshold_x(db: float = 1.0) -> float:
    """Compression x at which |S12| at ω0 of the matched device drops by `db`"""
    s = 10.0 ** (-db / 10.0)
    target = s / np.sqrt(1.0 - s**2)
    return _root(lambda x: 2.0 * (1.0 - x) / (1.0 - (1.0 - x) ** 2) - target, 1e-12, 1.0 - 1e-12, 1e-15,
                 f"{db} dB compression threshold")


def compression_curve(circ: GyratorCircuit, photon_numbers: Sequence[float], db: float = 1.0) -> CompressionCurve:
    """
    |S12(ω0)| as the mean-field conductance compresses with the photon number.
    The threshold is the N where |S12| reaches 10^(-db/10) of its N = 0 value,
    interpolated linearly between grid points in (log N, 10·log10|S12|).
    """
    n_grid = np.asarray(photon_numbers, dtype=float)
    if n_grid.ndim != 1 or n_grid.size < 2 or np.any(np.diff(n_grid) <= 0) or n_grid[0] != 0.0:
        raise DomainError("photon-number grid must be increasing and start at N = 0")
    ej_prime = circ.g * 2.0 * E_CHARGE * R_Q / (4.0 * np.pi)
    conductances, transmission = [], []
    for n in n_grid:
        op = GyratorOperatingPoint.symmetric(ej_prime, circ.z0, n, energy_unit="J")
        g_n = gyrator_conductance(op).g
        conductances.append(g_n)
        transmission.append(abs(scattering(circ.with_conductance(g_n), circ.omega0)[0, 1]))
    transmission = np.array(transmission)
    if transmission[0] == 0.0:
        raise DomainError("no transmission at N = 0: the circuit is not a gyrator at ω0")
    threshold = transmission[0] * 10.0 ** (-db / 10.0)

    below = np.flatnonzero(transmission <= threshold)
    if below.size == 0:
        raise ConvergenceError(
            f"|S12| never drops {db} dB within N ≤ {n_grid[-1]:.4g}", bracket=(n_grid[0], n_grid[-1])
        )
    k = int(below[0])
    n_lo, n_hi = n_grid[k - 1], n_grid[k]
    t_lo, t_hi = 10.0 * np.log10(transmission[k - 1 : k + 1])
    frac = (10.0 * np.log10(threshold) - t_lo) / (t_hi - t_lo) if t_hi != t_lo else 1.0
    if n_lo > 0:
        n_1db = float(np.exp(np.log(n_lo) + frac * (np.log(n_hi) - np.log(n_lo))))
    else:
        n_1db = float(n_lo + frac * (n_hi - n_lo))
    return CompressionCurve(
        photon_numbers=n_grid,
        conductance=np.array(conductances),
        transmission=transmission,
        n_1db=n_1db,
        threshold=float(threshold),
        reference=R_Q / (np.pi * circ.z0),
    )


# -------------------------------------------------------------------- disorder

@dataclass
class DisorderDeviation:
    dS: np.ndarray
    sigma_z: complex
    sigma_x: complex
    exact: np.ndarray
    omega: float

    @property
    def residual(self) -> float:
        return float(np.max(np.abs(self.exact - self.dS)))

    def to_dict(self) -> Dict:
        return {
            "omega": self.omega,
            "dS": _pairs(self.dS),
            "sigma_z": [self.sigma_z.real, self.sigma_z.imag],
            "sigma_x": [self.sigma_x.real, self.sigma_x.imag],
            "exact": _pairs(self.exact),
            "residual": self.residual,
        }


def _disorder_scales(circ: GyratorCircuit) -> Dict[str, float]:
    lc_scale = circ.lc if circ.lc > 0 else circ.z_tl / circ.omega0
    return {"d_lc": lc_scale, "d_c0": circ.c0, "d_l0": circ.l0, "c12": circ.c0, "l12": circ.l0}


def _disorder_impedance(circ: GyratorCircuit, omega: float, d: Disorder) -> np.ndarray:
    """First-order impedance change of the disorder-free circuit"""
    y = load_admittance(circ, omega)
    p = y**2 + circ.g**2
    l0 = circ.l0
    z_term = 1j * omega * d.d_lc - (1j * omega * d.d_c0 - d.d_l0 / (1j * l0**2 * omega)) / p
    x_term = (1j * omega * d.c12 - d.l12 / (1j * l0**2 * omega)) / p
    return z_term * SZ + x_term * SX


def matched_point_dS(circ: GyratorCircuit, d: Disorder) -> np.ndarray:
    """dS at ω0 of a circuit with S = iσy, where (1 - S)X(1 - S) = 2X for X ∈ {σz, σx}"""
    w0 = circ.omega0
    g2 = circ.g**2
    l0 = circ.l0
    z_term = 1j * w0 * d.d_lc - (1j * w0 * d.d_c0 - d.d_l0 / (1j * l0**2 * w0)) / g2
    x_term = (1j * w0 * d.c12 - d.l12 / (1j * l0**2 * w0)) / g2
    return -(z_term * SZ + x_term * SX) / circ.z_tl


def disorder_first_order(circ: GyratorCircuit, omega: float) -> DisorderDeviation:
    """
    dS = -(1 - S)·dZ/(2Z_TL)·(1 - S) for the disorder carried by `circ`,
    with S the disorder-free scattering matrix. The exact difference is
    returned alongside.
    """
    d = circ.disorder
    scales = _disorder_scales(circ)
    for name in DISORDER_FIELDS:
        value = getattr(d, name)
        if abs(value) > settings.disorder_warn_fraction * scales[name]:
            logger.warning("disorder %s=%.3g exceeds %.0f%% of nominal", name, value,
                           100 * settings.disorder_warn_fraction)
    clean = circ.with_disorder(Disorder())
    s = scattering(clean, omega)
    dz = _disorder_impedance(clean, omega, d)
    one_minus = ID2 - s
    ds = -one_minus @ dz @ one_minus / (2.0 * circ.z_tl)
    exact = scattering(circ, omega) - s if not d.is_zero else np.zeros((2, 2), dtype=complex)
    return DisorderDeviation(
        dS=ds,
        sigma_z=complex(0.5 * np.trace(SZ @ ds)),
        sigma_x=complex(0.5 * np.trace(SX @ ds)),
        exact=exact,
        omega=omega,
    )


def _deviation_norm(delta: np.ndarray, norm: str) -> float:
    if norm == "max":
        return float(np.max(np.abs(delta)))
    if norm == "fro":
        return float(np.linalg.norm(delta, "fro"))
    raise DomainError(f"unknown deviation norm '{norm}'")


def disorder_deviation(circ: GyratorCircuit, which: str, magnitude: float, norm: Optional[str] = None) -> float:
    """Deviation of the exact S at ω0 when one disorder field is set to `magnitude`"""
    norm = norm or settings.disorder_norm
    clean = circ.with_disorder(Disorder())
    s0 = scattering(clean, circ.omega0)
    s = scattering(clean.with_disorder(Disorder(**{which: magnitude})), circ.omega0)
    return _deviation_norm(s - s0, norm)


def disorder_tolerance(circ: GyratorCircuit, which: str, error_budget: float = 0.01,
                       norm: Optional[str] = None) -> float:
    """
    Magnitude of a single disorder field producing a deviation of the exact S
    equal to `error_budget`, at ω0 with G = G0.
    """
    if which not in DISORDER_FIELDS:
        raise DomainError(f"unknown disorder parameter '{which}', expected one of {DISORDER_FIELDS}")
    if not 0.0 < error_budget <= 0.2:
        raise DomainError("error budget must lie in (0, 0.2]")
    base = matched(circ.with_disorder(Disorder()))
    scale = _disorder_scales(base)[which]

    def f(m: float) -> float:
        return disorder_deviation(base, which, m * scale, norm) - error_budget

    samples = [(0.0, -error_budget)]
    m = 1e-8
    while True:
        value = f(m)
        if value < samples[-1][1] - 1e-12:
            raise ConvergenceError(
                f"deviation not monotone in {which} near {m * scale:.3e}",
                bracket=(samples[-1][0] * scale, m * scale),
            )
        samples.append((m, value))
        if value >= 0:
            break
        if m >= 0.99:
            raise ConvergenceError(
                f"{which} up to 99% of nominal stays within the error budget", bracket=(0.0, m * scale)
            )
        m = min(2.0 * m, 0.99)
    lo, hi = samples[-2][0], samples[-1][0]
    probe = np.linspace(lo, hi, 17)
    values = np.array([f(p) for p in probe])
    if np.any(np.diff(values) < -1e-12):
        raise ConvergenceError(f"deviation not monotone in {which}", bracket=(lo * scale, hi * scale))
    root = _root(f, lo, hi, settings.tolerance_root_xtol * max(lo, 1e-8), f"{which} tolerance")
    return float(root * scale)


# ---------------------------------------------------------------------- mixing

@dataclass
class MixingBlock:
    """
    First-order frequency mixing under a drive at ω0. `blocks` maps
    (target, source) harmonic indices to 2x2 matrices M(ω;ω'); `harmonic_map`
    stacks them into the 8x4 map from (a_-ω0, a_+ω0) to (b_-3ω0, b_-ω0, b_+ω0, b_+3ω0).
    """

    omega0: float
    blocks: Dict[Tuple[int, int], np.ndarray]
    harmonic_map: np.ndarray
    dg: Dict[int, complex]
    chi: float

    def block(self, target: int, source: int) -> np.ndarray:
        return self.blocks.get((target, source), np.zeros((2, 2), dtype=complex))

    def to_dict(self) -> Dict:
        return {
            "omega0": self.omega0,
            "chi": self.chi,
            "dg": {str(k): [v.real, v.imag] for k, v in self.dg.items()},
            "blocks": {f"{t}<-{s}": _pairs(m) for (t, s), m in self.blocks.items()},
            "harmonic_map": _pairs(self.harmonic_map),
        }


def _response(circ: GyratorCircuit, omega: float) -> np.ndarray:
    """(Z/Z_TL - 1)⁻¹ Z0/Z_TL, conjugated for negative frequencies"""
    w = abs(omega)
    z = impedance(circ, w).matrix
    _, _, lc = element_matrices(circ)
    z0n = (z - 1j * w * lc) / circ.z_tl
    try:
        k = np.linalg.solve(z / circ.z_tl - ID2, z0n)
    except np.linalg.LinAlgError:
        raise SingularityError(f"(Z/Z_TL - 1) is singular at ω={w:.6g}")
    return k if omega > 0 else k.conj()


def mixing_matrices(circ: GyratorCircuit, drive: Sequence[complex],
                    arms: Optional[Tuple[float, float]] = None,
                    line_capacitance: Optional[float] = None) -> MixingBlock:
    """
    Mixing blocks of a device driven at ω0 with port amplitudes `drive`.

    The flux response is A = K(ω0)·a with K = (Z/Z_TL - 1)⁻¹ Z0/Z_TL and
    ⟨φ_i⟩² = χ|A_i|² + (χ/2)(A_i² e^{-2iω0t} + c.c.). With a line capacitance
    per length c, χ = 4/(R_Q c ω0); otherwise |a_i|² is a photon number and
    χ = 4πZ0/R_Q, which makes the static part reproduce the compression
    G0(1 - πZ0N/(2R_Q)) of the matched device.
    """
    a = np.asarray(drive, dtype=complex)
    if a.shape != (2,):
        raise DomainError("drive must give one complex amplitude per port")
    w0 = circ.omega0
    if line_capacitance is not None:
        if not line_capacitance > 0:
            raise DomainError("line capacitance must be positive")
        chi = 4.0 / (R_Q * line_capacitance * w0)
    else:
        chi = 4.0 * np.pi * circ.z0 / R_Q
    arm1, arm2 = arms if arms is not None else (0.5 * circ.g, -0.5 * circ.g)

    amp = _response(circ, w0) @ a
    static = chi * np.abs(amp) ** 2
    rotating = 0.5 * chi * amp**2
    dg = {
        0: complex(0.5 * (arm2 * static[1] - arm1 * static[0])),
        2: complex(0.5 * (arm2 * rotating[1] - arm1 * rotating[0])),
    }
    dg[-2] = dg[2].conjugate()

    def kernel(omega: float) -> np.ndarray:
        k = _response(circ, omega)
        return k @ (2j * SY) @ k

    def m(target: int, source: int) -> np.ndarray:
        return (source / target) * circ.z_tl * dg[target - source] * kernel(source * w0)

    blocks = {(t, s): m(t, s) for t, s in [(-3, -1), (-1, -1), (1, -1), (-1, 1), (1, 1), (3, 1)]}

    s_plus = scattering(circ, w0)
    diag = {-1: s_plus.conj(), 1: s_plus}
    hmap = np.zeros((8, 4), dtype=complex)
    for row, target in enumerate(HARMONICS):
        for col, source in enumerate((-1, 1)):
            blk = blocks.get((target, source))
            if blk is None:
                continue
            if target == source:
                blk = blk + diag[source]
            hmap[2 * row:2 * row + 2, 2 * col:2 * col + 2] = blk
    return MixingBlock(omega0=w0, blocks=blocks, harmonic_map=hmap, dg=dg, chi=chi)
