from typing import Dict, List, Optional, Tuple

from fastapi import APIRouter
from pydantic import BaseModel

from app.api.errors import physics_errors
from app.config import settings
from app.physics.nonlinear import ChargeInversion
from app.schemas import SeriesModel
from app.services.nonlinear_service import nonlinear_service

router = APIRouter()


class ReportRequest(BaseModel):
    series: SeriesModel
    capacitance: List[List[float]]
    impedances: Tuple[float, float]
    energy_unit: str = "GHz"


class InversionRequest(BaseModel):
    capacitance: List[List[float]]
    offset: Tuple[float, float]
    couplings: Dict[int, Tuple[float, float]] = {}
    charge: Tuple[float, float]
    order: Optional[int] = None


@router.post("/report")
async def report(request: ReportRequest) -> Dict:
    """Error-Hamiltonian coefficients and their impedance tolerance checks"""
    with physics_errors():
        series = request.series
        coefficients = nonlinear_service.coefficients(
            series.table(settings.series_m_max), series.gaps, series.n_max, series.m_max, series.energy_unit
        )
        return nonlinear_service.report(coefficients, request.capacitance, request.impedances, request.energy_unit)


@router.post("/invert")
async def invert(request: InversionRequest) -> Dict:
    with physics_errors():
        ci = ChargeInversion(
            capacitance=request.capacitance,
            offset=request.offset,
            couplings=request.couplings,
            order=settings.inversion_order if request.order is None else request.order,
        )
        return nonlinear_service.invert(ci, request.charge)
