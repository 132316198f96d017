"""
Physical constants and energy-unit conversion.
Operations take energies in a declared unit (GHz·h by default) and compute in SI.
"""

from dataclasses import dataclass
from typing import Dict

from scipy import constants as sc

from app.exceptions import DomainError


@dataclass(frozen=True)
class Constants:
    electron_charge: float = sc.e
    planck: float = sc.h
    hbar: float = sc.hbar

    @property
    def flux_quantum(self) -> float:
        return self.planck / (2 * self.electron_charge)

    @property
    def resistance_quantum(self) -> float:
        # R_Q = Φ0/(2e) = h/(2e)²
        return self.flux_quantum / (2 * self.electron_charge)


CONSTANTS = Constants()

E_CHARGE = CONSTANTS.electron_charge
H_PLANCK = CONSTANTS.planck
HBAR = CONSTANTS.hbar
PHI0 = CONSTANTS.flux_quantum
R_Q = CONSTANTS.resistance_quantum

ENERGY_UNITS: Dict[str, float] = {
    "J": 1.0,
    "eV": sc.e,
    "meV": 1e-3 * sc.e,
    "GHz": sc.h * 1e9,
    "MHz": sc.h * 1e6,
}

DEFAULT_ENERGY_UNIT = "GHz"


def unit_scale(unit: str) -> float:
    """Joules per one `unit`"""
    try:
        return ENERGY_UNITS[unit]
    except KeyError:
        raise DomainError(f"unknown energy unit '{unit}', expected one of {sorted(ENERGY_UNITS)}")


def to_joules(value, unit: str = DEFAULT_ENERGY_UNIT):
    return value * unit_scale(unit)


def from_joules(value, unit: str = DEFAULT_ENERGY_UNIT):
    return value / unit_scale(unit)
