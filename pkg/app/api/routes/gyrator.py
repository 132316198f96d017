from typing import Dict, List, Literal, Optional, Tuple

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.api.errors import physics_errors
from app.schemas import CircuitModel
from app.services.gyrator_service import gyrator_service

router = APIRouter()


class SweepRequest(BaseModel):
    circuit: CircuitModel
    omega_norm: List[float] = Field(min_length=1)
    model: Literal["direct", "pauli"] = "direct"


class CompressionRequest(BaseModel):
    circuit: CircuitModel
    photon_numbers: List[float]
    db: float = 1.0


class DisorderRequest(BaseModel):
    circuit: CircuitModel
    omega_norm: float = 1.0


class ToleranceRequest(BaseModel):
    circuit: CircuitModel
    error_budget: float = 0.01
    fields: Optional[List[str]] = None
    norm: Optional[Literal["max", "fro"]] = None


class MixingRequest(BaseModel):
    circuit: CircuitModel
    drive: Tuple[Tuple[float, float], Tuple[float, float]]
    arms: Optional[Tuple[float, float]] = None
    line_capacitance: Optional[float] = None


@router.post("/operating-point")
async def operating_point(circuit: CircuitModel) -> Dict:
    """Normalized parameters, G0 and tan 2θ at ω0"""
    with physics_errors():
        return gyrator_service.operating_point(circuit.build())


@router.post("/sweep")
async def sweep(request: SweepRequest) -> Dict:
    with physics_errors():
        return gyrator_service.sweep(request.circuit.build(), request.omega_norm, request.model)


@router.post("/bandwidth")
async def bandwidth(circuit: CircuitModel) -> Dict:
    """Passband edges, central frequency and closed-form width estimates"""
    with physics_errors():
        return gyrator_service.bandwidth(circuit.build())


@router.post("/compression")
async def compression(request: CompressionRequest) -> Dict:
    with physics_errors():
        return gyrator_service.compression(request.circuit.build(), request.photon_numbers, request.db)


@router.post("/disorder")
async def disorder(request: DisorderRequest) -> Dict:
    """First-order scattering deviation against exact recomputation"""
    with physics_errors():
        return gyrator_service.disorder(request.circuit.build(), request.omega_norm)


@router.post("/disorder-tolerance")
async def disorder_tolerance(request: ToleranceRequest) -> Dict:
    with physics_errors():
        return gyrator_service.disorder_tolerance(
            request.circuit.build(), request.error_budget, request.fields, request.norm
        )


@router.post("/mixing")
async def mixing(request: MixingRequest) -> Dict:
    """Frequency-mixing blocks under a drive at ω0"""
    with physics_errors():
        drive = [complex(re, im) for re, im in request.drive]
        return gyrator_service.mixing(request.circuit.build(), drive, request.arms, request.line_capacitance)
