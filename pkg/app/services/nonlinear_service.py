from typing import Dict, Optional, Sequence

import numpy as np

from app.config import settings
from app.physics.constants import DEFAULT_ENERGY_UNIT
from app.physics.nonlinear import (
    ChargeInversion,
    SeriesCoefficients,
    charge_inversion,
    error_hamiltonian_report,
    newton_inversion,
    series_coefficients,
    series_terms,
)
from app.services.payload import success


class NonlinearService:
    """Series coefficients, charge inversion and the error-Hamiltonian report"""

    def coefficients(self, table, gaps: Sequence[float], n_max: Optional[int] = None,
                     m_max: Optional[int] = None, energy_unit: str = "J") -> SeriesCoefficients:
        table = np.asarray(table, dtype=float)
        n_max = min(n_max or settings.series_n_max, table.shape[1] - 1)
        m_max = min(m_max or settings.series_m_max, table.shape[2] - 1)
        return series_coefficients(table, gaps, n_max, m_max, energy_unit)

    def report(self, coefficients: SeriesCoefficients, capacitance, impedances: Sequence[float],
               energy_unit: str = DEFAULT_ENERGY_UNIT) -> Dict:
        report = error_hamiltonian_report(coefficients, capacitance, impedances, energy_unit)
        return success(data={"coefficients": coefficients.to_dict(), "report": report.to_dict()})

    def invert(self, ci: ChargeInversion, q: Sequence[float], order: Optional[int] = None) -> Dict:
        terms = series_terms(ci, q, order)
        velocity = charge_inversion(ci, q, order)
        exact = newton_inversion(ci, q)
        return success(data={
            "terms": terms,
            "velocity": velocity,
            "newton": exact,
            "residual": ci.residual(q, velocity),
            "difference": float(np.max(np.abs(velocity - exact))),
        })


nonlinear_service = NonlinearService()
