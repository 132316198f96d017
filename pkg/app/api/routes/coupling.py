from typing import Dict, Tuple

from fastapi import APIRouter
from pydantic import BaseModel

from app.api.errors import physics_errors
from app.schemas import FennecModel, GyratorArmsModel
from app.services.gyrator_service import gyrator_service

router = APIRouter()


class FennecRequest(BaseModel):
    point: FennecModel
    dV: float = 0.0
    dphi: float = 0.0


class ConductanceRequest(BaseModel):
    gyrator: GyratorArmsModel
    dphi: Tuple[float, float] = (0.0, 0.0)


@router.post("/fennec")
async def fennec(request: FennecRequest) -> Dict:
    """Single FENNEC strength, G_max and noise sensitivities"""
    with physics_errors():
        return gyrator_service.fennec(request.point.build(), request.dV, request.dphi)


@router.post("/conductance")
async def conductance(request: ConductanceRequest) -> Dict:
    """Mean-field two-arm gyrator conductance"""
    with physics_errors():
        return gyrator_service.conductance(request.gyrator.build(), request.dphi)
