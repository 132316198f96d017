import logging
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np

from app.exceptions import DomainError
from app.physics.constants import R_Q
from app.physics.coupling import g_max, quadratic_coefficients
from app.physics.junction import (
    JunctionSpec,
    TabulatedEnergy,
    abs_energy,
    ej_derivative,
    ej_of_voltage,
    large_transmission_energy,
    load_spectroscopy,
    spectral_probe,
)
from app.services.payload import success

logger = logging.getLogger(__name__)


class JunctionService:
    """
    Junction energies and the spectroscopy-to-coupling pipeline
    """

    def junction_energy(self, spec: JunctionSpec, fluxes: Sequence[float], voltage: float = 0.0) -> Dict:
        fluxes = np.asarray(fluxes, dtype=float)
        data = {
            "flux": fluxes,
            "abs_energy": abs_energy(spec, fluxes, voltage),
            "E_J": float(ej_of_voltage(spec, voltage)),
            "energy_unit": spec.energy_unit,
        }
        if len(spec.channels) == 1:
            T = float(spec.transmissions(voltage)[0])
            if T > 0.5:
                try:
                    data["large_transmission"] = large_transmission_energy(spec.gap, T, fluxes)
                except DomainError:
                    pass
        return success(data=data)

    def quadratic_coefficients(self, spec: JunctionSpec, voltage: float) -> Dict:
        return success(data=quadratic_coefficients(spec, voltage))

    def estimate_coupling(self, source: Union[str, Path, TabulatedEnergy], metadata: Optional[Dict] = None,
                          points: int = 201) -> Dict:
        """
        Tabulated data → spline → E_J'(V) → G_max(V) = (4π/R_Q)(E_J'/2e).
        Sampled on `points` voltages strictly inside the hull; the best
        operating voltage maximizes |G_max|.
        """
        tab = source if isinstance(source, TabulatedEnergy) else load_spectroscopy(source, metadata)
        lo, hi = tab.hull
        voltages = np.linspace(lo, hi, points + 2)[1:-1]
        slope = ej_derivative(tab, voltages, 1)
        curve = np.array([g_max(s, tab.energy_unit) for s in slope])
        k = int(np.argmax(np.abs(curve)))
        logger.info("best operating point V0=%.6g V with G_max=%.4g S", voltages[k], curve[k])
        return success(data={
            "voltage": voltages,
            "E_J": tab.energy(voltages),
            "E_J_prime": slope,
            "G_max": curve,
            "G_max_times_RQ": curve * R_Q,
            "best": {"V0": voltages[k], "G_max": curve[k], "E_J_prime": slope[k]},
            "kind": tab.kind,
            "energy_unit": tab.energy_unit,
        })

    def spectral_probe(self, source: Union[JunctionSpec, TabulatedEnergy], v0: float, amp: float,
                       omega_ac: float, phi1: float) -> Dict:
        freqs, spectrum = spectral_probe(source, v0, amp, omega_ac, phi1)
        k = int(np.argmin(np.abs(freqs - omega_ac)))
        return success(data={"omega": freqs, "amplitude": spectrum, "drive_bin": spectrum[k]})


junction_service = JunctionService()
