import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from app.physics.coupling import (
    FennecPoint,
    GyratorOperatingPoint,
    charge_noise_dG,
    coupling_figures,
    fennec_strength,
    flux_noise_dG,
    g_max,
    gate_voltage_resolution,
    gyrator_arms,
    gyrator_conductance,
    gyrator_flux_noise_dG,
)
from app.physics.design import (
    bandwidth,
    central_frequency,
    compression_curve,
    compression_threshold_x,
    disorder_first_order,
    disorder_tolerance,
    mixing_matrices,
    optimal_conductance,
)
from app.physics.network import (
    DISORDER_FIELDS,
    GyratorCircuit,
    ScatteringResult,
    circulator_sweep,
    pauli_angle,
    sweep,
)
from app.services.payload import success

logger = logging.getLogger(__name__)


class GyratorService:
    """
    Coordinates coupling estimates, linear-response scattering and the
    design problems of the gyrator and circulator
    """

    def fennec(self, point: FennecPoint, dV: float = 0.0, dphi: float = 0.0) -> Dict:
        g = fennec_strength(point)
        gmax = g_max(point.ej_prime, point.energy_unit)
        return success(data={
            "G": g,
            "G_max": gmax,
            **coupling_figures(g, gmax),
            "charge_noise_dG": charge_noise_dG(point, dV),
            "flux_noise_dG": flux_noise_dG(point, dphi),
            "gate_voltage_resolution": gate_voltage_resolution(point),
        })

    def conductance(self, op: GyratorOperatingPoint, dphi: Tuple[float, float] = (0.0, 0.0)) -> Dict:
        result = gyrator_conductance(op)
        return success(data={
            "G": result.g,
            "G_uncompressed": result.g_max,
            "G_plus": result.g_plus,
            "arms": result.arms,
            "compression": result.compression,
            "flags": result.flags,
            "resistance": result.resistance,
            "arms_uncompressed": gyrator_arms(op),
            "flux_noise_dG": gyrator_flux_noise_dG(op, *dphi),
        })

    def scattering_sweep(self, circ: GyratorCircuit, omega_norm: Sequence[float], model: str = "direct") -> ScatteringResult:
        return sweep(circ, np.asarray(omega_norm, dtype=float) * circ.omega0, model)

    def sweep(self, circ: GyratorCircuit, omega_norm: Sequence[float], model: str = "direct") -> Dict:
        result = self.scattering_sweep(circ, omega_norm, model)
        return success(data=result.to_json(), max_unitarity_error=result.max_unitarity_error)

    def operating_point(self, circ: GyratorCircuit) -> Dict:
        angle = pauli_angle(circ, circ.omega0)
        return success(data={
            "circuit": circ.echo(),
            "normalized": circ.normalized(),
            "G0": optimal_conductance(circ),
            "tan2theta_at_omega0": angle.tan2theta,
            "theta_at_omega0": angle.theta,
        })

    def bandwidth(self, circ: GyratorCircuit) -> Dict:
        band = bandwidth(circ)
        return success(data={
            **band.to_dict(),
            "omega0": circ.omega0,
            "central_frequency": central_frequency(circ),
            "G0": optimal_conductance(circ),
            "normalized": circ.normalized(),
        })

    def compression(self, circ: GyratorCircuit, photon_numbers: Sequence[float], db: float = 1.0) -> Dict:
        curve = compression_curve(circ, photon_numbers, db)
        return success(data={**curve.to_dict(), "x_threshold": compression_threshold_x(db), "db": db})

    def disorder(self, circ: GyratorCircuit, omega_norm: float = 1.0) -> Dict:
        dev = disorder_first_order(circ, omega_norm * circ.omega0)
        return success(data={**dev.to_dict(), "residual": dev.residual})

    def disorder_tolerance(self, circ: GyratorCircuit, error_budget: float = 0.01,
                           fields: Optional[Sequence[str]] = None, norm: Optional[str] = None) -> Dict:
        fields = list(fields or DISORDER_FIELDS)
        tolerances = {}
        for name in fields:
            tolerances[name] = disorder_tolerance(circ, name, error_budget, norm)
            logger.debug("tolerance %s = %.6g", name, tolerances[name])
        return success(data={"error_budget": error_budget, "tolerance": tolerances, "normalized": circ.normalized()})

    def mixing(self, circ: GyratorCircuit, drive: Sequence[complex],
               arms: Optional[Tuple[float, float]] = None, line_capacitance: Optional[float] = None) -> Dict:
        return success(data=mixing_matrices(circ, drive, arms, line_capacitance))

    def circulator_sweep(self, z_tl: float, r: float, z0: float, omega0: float,
                         omega_norm: Sequence[float]) -> ScatteringResult:
        return circulator_sweep(z_tl, r, z0, omega0, np.asarray(omega_norm, dtype=float) * omega0)

    def circulator(self, z_tl: float, r: float, z0: float, omega0: float, omega_norm: Sequence[float]) -> Dict:
        result = self.circulator_sweep(z_tl, r, z0, omega0, omega_norm)
        return success(data=result.to_json(), max_unitarity_error=result.max_unitarity_error)


gyrator_service = GyratorService()
