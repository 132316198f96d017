from typing import Dict

from fastapi import APIRouter
from fastapi.concurrency import run_in_threadpool
from pydantic import BaseModel

from app.api.errors import physics_errors
from app.schemas import QuantumModel
from app.services.quantum_service import quantum_service

router = APIRouter()


class SingleModeRequest(BaseModel):
    omega_s: float
    omega_m: float
    kappa: float


@router.post("/simulate")
async def simulate(request: QuantumModel) -> Dict:
    """
    Periodic steady state of the driven two-mode model and its scattering
    matrix. Each column needs a non-zero drive on its port.
    """
    with physics_errors():
        # seconds of dense linear algebra; keep it off the event loop
        return await run_in_threadpool(quantum_service.simulate, request.build(), request.substeps)


@router.post("/single-mode")
async def single_mode(request: SingleModeRequest) -> Dict:
    return quantum_service.single_mode(request.omega_s, request.omega_m, request.kappa)
