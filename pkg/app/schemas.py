"""
Request/config models shared by the HTTP routes and the batch CLI.
Each model knows how to build the physics object it describes.
"""

from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from app.physics.constants import DEFAULT_ENERGY_UNIT
from app.physics.coupling import FennecPoint, GyratorOperatingPoint
from app.physics.junction import ConstantTransmission, JunctionSpec, LogisticTransmission
from app.physics.design import matched
from app.physics.lindblad import QuantumGyratorConfig
from app.physics.network import Disorder, GyratorCircuit
from app.physics.nonlinear import power_derivatives


class ChannelModel(BaseModel):
    kind: Literal["constant", "logistic"] = "constant"
    value: Optional[float] = None
    t_max: Optional[float] = None
    v_th: float = 0.0
    v_w: float = 1.0

    @model_validator(mode="after")
    def check_fields(self):
        if self.kind == "constant" and self.value is None:
            raise ValueError("constant channel needs 'value'")
        if self.kind == "logistic" and self.t_max is None:
            raise ValueError("logistic channel needs 't_max'")
        return self

    def build(self):
        if self.kind == "constant":
            return ConstantTransmission(self.value)
        return LogisticTransmission(self.t_max, self.v_th, self.v_w)


class JunctionModel(BaseModel):
    gap: float
    channels: List[ChannelModel] = Field(min_length=1)
    external_flux: float = 0.0
    energy_unit: str = DEFAULT_ENERGY_UNIT

    def build(self) -> JunctionSpec:
        return JunctionSpec(
            gap=self.gap,
            channels=tuple(ch.build() for ch in self.channels),
            external_flux=self.external_flux,
            energy_unit=self.energy_unit,
        )


class FennecModel(BaseModel):
    ej_prime: float
    ej_second: float = 0.0
    flux_bias: float = 0.25
    mean_flux: float = 0.0
    mean_voltage: float = 0.0
    energy_unit: str = DEFAULT_ENERGY_UNIT

    def build(self) -> FennecPoint:
        return FennecPoint(**self.model_dump())


class GyratorArmsModel(BaseModel):
    arm1: FennecModel
    arm2: Optional[FennecModel] = None
    z0: float
    n1: float = 0.0
    n2: float = 0.0

    def build(self) -> GyratorOperatingPoint:
        arm2 = self.arm2
        if arm2 is None:
            arm2 = self.arm1.model_copy(update={"flux_bias": -self.arm1.flux_bias})
        return GyratorOperatingPoint(arm1=self.arm1.build(), arm2=arm2.build(), z0=self.z0, n1=self.n1, n2=self.n2)


class DisorderModel(BaseModel):
    d_lc: float = 0.0
    d_c0: float = 0.0
    d_l0: float = 0.0
    c12: float = 0.0
    l12: float = 0.0


class CircuitModel(BaseModel):
    """
    Either SI elements (l0, c0, lc, z_tl, g) or the normalized form
    (omega0, z_tl, lc_norm, z0_norm, g_norm). g/g_norm may be omitted to
    use the impedance-matched conductance. Disorder is always SI.
    """

    z_tl: float = 50.0
    l0: Optional[float] = None
    c0: Optional[float] = None
    lc: float = 0.0
    g: Optional[float] = None
    omega0: Optional[float] = None
    lc_norm: Optional[float] = None
    z0_norm: Optional[float] = None
    g_norm: Optional[float] = None
    disorder: DisorderModel = Field(default_factory=DisorderModel)

    @model_validator(mode="after")
    def check_form(self):
        si = self.l0 is not None and self.c0 is not None
        norm = self.omega0 is not None and self.lc_norm is not None and self.z0_norm is not None
        if si == norm:
            raise ValueError("give either l0/c0 or omega0/lc_norm/z0_norm")
        return self

    @property
    def auto_conductance(self) -> bool:
        return self.g is None and self.g_norm is None

    def build(self) -> GyratorCircuit:
        disorder = Disorder(**self.disorder.model_dump())
        if self.l0 is not None:
            circ = GyratorCircuit(l0=self.l0, c0=self.c0, lc=self.lc, z_tl=self.z_tl,
                                  g=0.0 if self.g is None else self.g, disorder=disorder)
        else:
            circ = GyratorCircuit.from_normalized(
                omega0=self.omega0, z_tl=self.z_tl, lc=self.lc_norm, z0=self.z0_norm,
                g=0.0 if self.g_norm is None else self.g_norm, disorder=disorder,
            )
        return matched(circ) if self.auto_conductance else circ


class QuantumModel(BaseModel):
    e_c: float
    e_l: float
    g: float
    kappa: float
    omega_s: float
    betas: Tuple[Tuple[float, float], Tuple[float, float]] = ((0.0, 0.0), (0.0, 0.0))
    sin_order: Optional[int] = None
    levels_per_mode: Optional[int] = None
    excitation_cap: Optional[int] = None
    energy_unit: str = DEFAULT_ENERGY_UNIT
    substeps: Optional[int] = None

    def build(self) -> QuantumGyratorConfig:
        extra = {k: getattr(self, k) for k in ("sin_order", "levels_per_mode", "excitation_cap")
                 if getattr(self, k) is not None}
        return QuantumGyratorConfig(
            e_c=self.e_c,
            e_l=self.e_l,
            g=self.g,
            kappa=self.kappa,
            omega_s=self.omega_s,
            betas=tuple(complex(re, im) for re, im in self.betas),
            energy_unit=self.energy_unit,
            **extra,
        )


class SeriesModel(BaseModel):
    """∂ⁿT_i^m/∂V̇ⁿ tables, either given directly or as plain ∂ⁿT_i derivatives"""

    gaps: Tuple[float, float]
    power_derivatives: Optional[List[List[List[float]]]] = None
    transmission_derivatives: Optional[List[List[float]]] = None
    n_max: Optional[int] = None
    m_max: Optional[int] = None
    energy_unit: str = "J"

    @model_validator(mode="after")
    def check_source(self):
        if (self.power_derivatives is None) == (self.transmission_derivatives is None):
            raise ValueError("give exactly one of power_derivatives / transmission_derivatives")
        return self

    def table(self, m_max_default: int) -> np.ndarray:
        if self.power_derivatives is not None:
            return np.asarray(self.power_derivatives, dtype=float)
        m_max = self.m_max or m_max_default
        return np.array([power_derivatives(t, m_max) for t in self.transmission_derivatives])


class SweepSpec(BaseModel):
    parameter: str
    start: float
    stop: float
    count: int = Field(ge=2)
    scale: Literal["lin", "log"] = "lin"

    @model_validator(mode="after")
    def check_range(self):
        if not self.start < self.stop:
            raise ValueError(f"sweep '{self.parameter}': start must be below stop")
        if self.scale == "log" and self.start <= 0:
            raise ValueError(f"sweep '{self.parameter}': log sweeps need a positive start")
        return self

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


def echo(model: BaseModel) -> Dict:
    return model.model_dump(mode="json")
