"""
Andreev-bound-state junction energies and spectroscopy ingestion.

Energies are returned in the unit declared on the JunctionSpec / TabulatedEnergy
(GHz·h by default), voltages are in volts and fluxes in units of Φ0.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy.interpolate import BSpline, make_interp_spline, make_smoothing_spline

from app.config import settings
from app.exceptions import DomainError, IngestionError
from app.physics.constants import DEFAULT_ENERGY_UNIT, H_PLANCK, from_joules, to_joules

logger = logging.getLogger(__name__)

KINDS = ("direct_ej", "gatemon_freq")


def _check_transmission(T, where: str):
    T = np.asarray(T, dtype=float)
    if not np.all(np.isfinite(T)) or np.any(T < 0.0) or np.any(T > 1.0):
        raise DomainError(f"transmission outside [0, 1] in {where}: {T}")
    return T


@dataclass(frozen=True)
class ConstantTransmission:
    """Voltage-independent channel"""

    value: float

    def __post_init__(self):
        _check_transmission(self.value, "ConstantTransmission")

    def __call__(self, V, order: int = 0):
        V = np.asarray(V, dtype=float)
        if order == 0:
            return np.full_like(V, self.value)
        return np.zeros_like(V)


@dataclass(frozen=True)
class LogisticTransmission:
    """
    T(V) = T_max / (1 + exp(-(V - V_th)/V_w)) with analytic derivatives up to order 4.
    Default parametric family for synthetic junctions.
    """

    t_max: float
    v_th: float
    v_w: float

    def __post_init__(self):
        _check_transmission(self.t_max, "LogisticTransmission")
        if self.v_w <= 0:
            raise DomainError("logistic width v_w must be positive")

    def __call__(self, V, order: int = 0):
        u = (np.asarray(V, dtype=float) - self.v_th) / self.v_w
        s = 0.5 * (1.0 + np.tanh(0.5 * u))
        q = s * (1.0 - s)
        if order == 0:
            d = s
        elif order == 1:
            d = q
        elif order == 2:
            d = q * (1.0 - 2.0 * s)
        elif order == 3:
            d = q * (1.0 - 6.0 * s + 6.0 * s**2)
        elif order == 4:
            d = q * (1.0 - 14.0 * s + 36.0 * s**2 - 24.0 * s**3)
        else:
            raise DomainError(f"logistic derivative order {order} not supported (max 4)")
        return self.t_max * d / self.v_w**order


@dataclass(frozen=True)
class TabulatedTransmission:
    """Single effective channel T(V) = 4 E_J(V)/Δ read from a tabulated curve"""

    table: "TabulatedEnergy"
    gap: float

    def __call__(self, V, order: int = 0):
        if order == 0:
            T = 4.0 * self.table.energy(V) / self.gap
            return _check_transmission(T, "TabulatedTransmission")
        return 4.0 * ej_derivative(self.table, V, order) / self.gap


Transmission = Union[ConstantTransmission, LogisticTransmission, TabulatedTransmission]


@dataclass(frozen=True)
class JunctionSpec:
    gap: float
    channels: Tuple[Transmission, ...]
    external_flux: float = 0.0
    energy_unit: str = DEFAULT_ENERGY_UNIT

    def __post_init__(self):
        if not self.gap > 0:
            raise DomainError(f"superconducting gap must be positive, got {self.gap}")
        object.__setattr__(self, "channels", tuple(self.channels))
        to_joules(1.0, self.energy_unit)

    @property
    def gap_joules(self) -> float:
        return to_joules(self.gap, self.energy_unit)

    def transmissions(self, V, order: int = 0) -> np.ndarray:
        """Array of shape (K, *V.shape) with ∂^order T_i/∂V^order"""
        values = np.array([np.asarray(ch(V, order), dtype=float) for ch in self.channels])
        if order == 0:
            _check_transmission(values, "JunctionSpec")
        return values


@dataclass(frozen=True, eq=False)
class TabulatedEnergy:
    voltage_grid: np.ndarray
    values: np.ndarray
    kind: str = "direct_ej"
    e_c: Optional[float] = None
    energy_unit: str = DEFAULT_ENERGY_UNIT
    spline_smoothing: float = 0.0
    _spline: BSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.voltage_grid, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != vals.shape:
            raise DomainError("voltage grid and values must be 1-D arrays of equal length")
        if grid.size < 4:
            raise DomainError(f"tabulated curve needs at least 4 points, got {grid.size}")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("voltage grid must be strictly increasing")
        if not np.all(np.isfinite(vals)):
            raise DomainError("tabulated values must be finite")
        if self.kind not in KINDS:
            raise DomainError(f"unknown tabulated kind '{self.kind}'")
        if self.spline_smoothing < 0:
            raise DomainError("spline smoothing must be >= 0")

        if self.kind == "gatemon_freq":
            if self.e_c is None or self.e_c <= 0:
                raise DomainError("gatemon_freq data needs a positive charging energy E_C")
            ej = gatemon_invert(vals, self.e_c, self.energy_unit)
        else:
            ej = vals

        if self.spline_smoothing == 0:
            spline = make_interp_spline(grid, ej, k=3)
        else:
            spline = make_smoothing_spline(grid, ej, lam=self.spline_smoothing)

        object.__setattr__(self, "voltage_grid", grid)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_spline", spline)

    @property
    def hull(self) -> Tuple[float, float]:
        return float(self.voltage_grid[0]), float(self.voltage_grid[-1])

    def check_hull(self, V, strict: bool = False):
        """Endpoints are allowed unless `strict`; spline derivatives need interior points"""
        lo, hi = self.hull
        V = np.asarray(V, dtype=float)
        if strict and (np.any(V <= lo) or np.any(V >= hi)):
            raise DomainError(f"voltage not strictly inside tabulated hull ({lo}, {hi})")
        if np.any(V < lo) or np.any(V > hi):
            raise DomainError(f"voltage outside tabulated hull [{lo}, {hi}]")
        return V

    def energy(self, V):
        """Fitted E_J(V) in the declared energy unit"""
        return self._spline(self.check_hull(V))

    def derivative(self, V, order: int):
        return self._spline.derivative(order)(self.check_hull(V, strict=True))


def abs_energy(spec: JunctionSpec, phi1, voltage: float = 0.0):
    """
    Total Andreev bound state energy -Δ Σ_i sqrt(1 - T_i sin²(π(Φ1 - Φ_ex))).
    `phi1` in units of Φ0, scalar or array.
    """
    phi1 = np.asarray(phi1, dtype=float)
    if not np.all(np.isfinite(phi1)):
        raise DomainError("flux must be finite")
    T = spec.transmissions(voltage).reshape((-1,) + (1,) * phi1.ndim)
    s2 = np.sin(np.pi * (phi1 - spec.external_flux)) ** 2
    radicand = 1.0 - T * s2
    if np.any(radicand < 0):
        raise DomainError("negative radicand in ABS energy, transmission input is corrupted")
    return -spec.gap * np.sum(np.sqrt(radicand), axis=0)


def weak_limit_ej(spec: JunctionSpec, V):
    """E_J(V) = Δ Σ_i T_i(V)/4"""
    T = spec.transmissions(V)
    if np.any(T > settings.weak_limit_warn_transmission):
        logger.warning(
            "weak-limit E_J used with transmission %.3g above %.3g",
            float(np.max(T)), settings.weak_limit_warn_transmission,
        )
    return spec.gap * np.sum(T, axis=0) / 4.0


def ej_of_voltage(spec: JunctionSpec, V, order: int = 0):
    """∂^order E_J/∂V^order of the weak-limit energy for parametric channels"""
    if order == 0:
        return weak_limit_ej(spec, V)
    return spec.gap * np.sum(spec.transmissions(V, order), axis=0) / 4.0


def large_transmission_energy(gap: float, T: float, phi1):
    """
    Single high-transparency channel, expanded about T = 1:
    -Δ|cos(πΦ1)| + (Δ/2)(T - 1) sin²(πΦ1) |sec(πΦ1)|
    """
    _check_transmission(T, "large_transmission_energy")
    phi1 = np.asarray(phi1, dtype=float)
    c = np.abs(np.cos(np.pi * phi1))
    if np.any(c < settings.sec_floor):
        raise DomainError("sec(πΦ1/Φ0) diverges near half flux quantum")
    s2 = np.sin(np.pi * phi1) ** 2
    return -gap * c + 0.5 * gap * (T - 1.0) * s2 / c


def gatemon_frequency(e_j, e_c: float, unit: str = DEFAULT_ENERGY_UNIT):
    """f_Q ≈ (sqrt(8 E_C E_J) - E_C)/h in Hz"""
    ej = to_joules(np.asarray(e_j, dtype=float), unit)
    ec = to_joules(e_c, unit)
    return (np.sqrt(8.0 * ec * ej) - ec) / H_PLANCK


def gatemon_invert(f_q, e_c: float, unit: str = DEFAULT_ENERGY_UNIT):
    """E_J = (h f_Q + E_C)²/(8 E_C)"""
    f_q = np.asarray(f_q, dtype=float)
    if np.any(f_q <= 0) or e_c <= 0:
        raise DomainError("gatemon inversion needs f_Q > 0 and E_C > 0")
    ec = to_joules(e_c, unit)
    ej = (H_PLANCK * f_q + ec) ** 2 / (8.0 * ec)
    return from_joules(ej, unit)


def ej_derivative(tab: TabulatedEnergy, V, order: int = 1):
    """Spline derivative of the fitted E_J(V) curve, energy-unit/volt^order"""
    if order not in (1, 2, 3):
        raise DomainError(f"derivative order {order} not available from a cubic spline")
    return tab.derivative(V, order)


def _junction_energy(source, V, phi1):
    if isinstance(source, TabulatedEnergy):
        return -source.energy(V) * np.cos(2.0 * np.pi * phi1)
    out = np.empty_like(V)
    for k, v in enumerate(V):
        out[k] = abs_energy(source, phi1, voltage=float(v))
    return out


def spectral_probe(
    source: Union[TabulatedEnergy, JunctionSpec],
    v0: float,
    amp: float,
    omega_ac: float,
    phi1: float,
    n_periods: Optional[int] = None,
    samples_per_period: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    DFT of ε_J(V0 + amp sin(ω_ac t), Φ1) over an integer number of periods.
    Returns angular frequencies and single-sided amplitudes; the bin at ω_ac
    tracks |∂E_J/∂V| at V0.
    """
    n_periods = n_periods or settings.spectral_periods
    samples_per_period = samples_per_period or settings.spectral_samples_per_period
    if samples_per_period < 4:
        raise DomainError("spectral probe needs at least 4 samples per period")
    if isinstance(source, TabulatedEnergy):
        source.check_hull([v0 - amp, v0 + amp])

    n = n_periods * samples_per_period
    dt = 2.0 * np.pi / omega_ac / samples_per_period
    t = np.arange(n) * dt
    signal = _junction_energy(source, v0 + amp * np.sin(omega_ac * t), phi1)

    spectrum = np.abs(np.fft.rfft(signal)) / n
    spectrum[1:] *= 2.0
    freqs = 2.0 * np.pi * np.fft.rfftfreq(n, dt)
    return freqs, spectrum


def load_spectroscopy(csv_path: Union[str, Path], metadata: Optional[Dict] = None) -> TabulatedEnergy:
    """
    Read a `voltage,value` CSV ('#' comments allowed) plus its JSON sidecar
    {kind, unit, E_C, smoothing}. The sidecar defaults to `<csv stem>.json`.
    """
    csv_path = Path(csv_path)
    if metadata is None:
        sidecar = csv_path.with_suffix(".json")
        try:
            metadata = json.loads(sidecar.read_text()) if sidecar.exists() else {}
        except (OSError, json.JSONDecodeError) as e:
            raise IngestionError(f"cannot read sidecar {sidecar}: {e}")
    if not isinstance(metadata, dict):
        raise IngestionError("spectroscopy metadata must be a JSON object")

    try:
        frame = pd.read_csv(csv_path, comment="#", skipinitialspace=True)
    except (pd.errors.EmptyDataError, FileNotFoundError) as e:
        raise IngestionError(f"cannot read spectroscopy file {csv_path}: {e}")

    if list(frame.columns) != ["voltage", "value"]:
        raise IngestionError(f"expected header 'voltage,value', got {list(frame.columns)}")
    if frame.empty:
        raise IngestionError(f"no data rows in {csv_path}")
    try:
        frame = frame.astype(float)
    except ValueError as e:
        raise IngestionError(f"non-numeric spectroscopy entry: {e}")

    frame = frame.sort_values("voltage")
    logger.debug("loaded %d spectroscopy points from %s", len(frame), csv_path)
    try:
        return TabulatedEnergy(
            voltage_grid=frame["voltage"].to_numpy(),
            values=frame["value"].to_numpy(),
            kind=metadata.get("kind", "direct_ej"),
            e_c=metadata.get("E_C"),
            energy_unit=metadata.get("unit", DEFAULT_ENERGY_UNIT),
            spline_smoothing=metadata.get("smoothing", settings.spline_smoothing),
        )
    except DomainError as e:
        raise IngestionError(str(e))


