from typing import Dict, List, Optional

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.api.errors import physics_errors
from app.physics.junction import TabulatedEnergy
from app.schemas import JunctionModel
from app.services.junction_service import junction_service

router = APIRouter()


class EnergyRequest(BaseModel):
    junction: JunctionModel
    flux: List[float] = Field(min_length=1)
    voltage: float = 0.0


class QuadraticRequest(BaseModel):
    junction: JunctionModel
    voltage: float = 0.0


class TabulatedRequest(BaseModel):
    voltage: List[float]
    value: List[float]
    kind: str = "direct_ej"
    e_c: Optional[float] = None
    energy_unit: str = "GHz"
    smoothing: float = 0.0
    points: int = Field(default=201, ge=3)


@router.post("/energy")
async def junction_energy(request: EnergyRequest) -> Dict:
    """Andreev bound state energy over a flux grid"""
    with physics_errors():
        return junction_service.junction_energy(request.junction.build(), request.flux, request.voltage)


@router.post("/quadratic")
async def quadratic(request: QuadraticRequest) -> Dict:
    """Quadratic Lagrangian coefficients, exact and weak-transmission"""
    with physics_errors():
        return junction_service.quadratic_coefficients(request.junction.build(), request.voltage)


@router.post("/estimate-coupling")
async def estimate_coupling(request: TabulatedRequest) -> Dict:
    """G_max(V) from tabulated spectroscopy data"""
    with physics_errors():
        tab = TabulatedEnergy(
            voltage_grid=request.voltage,
            values=request.value,
            kind=request.kind,
            e_c=request.e_c,
            energy_unit=request.energy_unit,
            spline_smoothing=request.smoothing,
        )
        return junction_service.estimate_coupling(tab, points=request.points)
