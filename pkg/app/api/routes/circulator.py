from typing import Dict, List

from fastapi import APIRouter
from pydantic import BaseModel, Field

from app.api.errors import physics_errors
from app.services.gyrator_service import gyrator_service

router = APIRouter()


class CirculatorRequest(BaseModel):
    z_tl: float = 50.0
    r: float
    z0: float
    omega0: float
    omega_norm: List[float] = Field(min_length=1)


@router.post("/sweep")
async def circulator(request: CirculatorRequest) -> Dict:
    """Three-port scattering of the gyrator-based circulator"""
    with physics_errors():
        return gyrator_service.circulator(request.z_tl, request.r, request.z0, request.omega0, request.omega_norm)
