import logging
from typing import Dict, Optional

from app.physics.lindblad import (
    QuantumGyratorConfig,
    circuit_from_quantum,
    load_impedance,
    simulate,
    single_mode_reflection,
)
from app.physics.network import scattering
from app.services.payload import success

logger = logging.getLogger(__name__)


class QuantumService:
    """
    Driven Lindblad simulation of the gyrator, compared with the linear
    network prediction at the same operating point
    """

    def simulate(self, cfg: QuantumGyratorConfig, substeps: Optional[int] = None) -> Dict:
        result = simulate(cfg, substeps)
        data = result.to_dict()
        data["eta"] = cfg.eta
        data["Z0"] = load_impedance(cfg)
        if cfg.kappa > 0:
            circ = circuit_from_quantum(cfg)
            data["network_S"] = scattering(circ, cfg.omega_s)
            data["circuit"] = circ.echo()
        logger.info("quantum scattering |S12|=%.4f |S21|=%.4f", abs(result.matrix[0, 1]), abs(result.matrix[1, 0]))
        return success(data=data)

    def single_mode(self, omega_s: float, omega_m: float, kappa: float) -> Dict:
        return success(data={"S11": single_mode_reflection(omega_s, omega_m, kappa)})


quantum_service = QuantumService()
