from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.models.enums import FlowStatus
from app.schemas.params import SystemParams


class FlowPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    Y: float = Field(ge=0)
    Z: float = Field(ge=0)
    W: float = Field(ge=0)

    def as_vector(self) -> np.ndarray:
        return np.array([self.Y, self.Z, self.W])

    @classmethod
    def from_vector(cls, values) -> "FlowPoint":
        Y, Z, W = (float(x) for x in values)
        return cls(Y=Y, Z=Z, W=W)


# ==================================================
# EQUILIBRIA / LINEARIZATION
# ==================================================
class Equilibrium(BaseModel):
    """The positive equilibrium, its growth constants and the boundary equilibria."""

    model_config = ConfigDict(frozen=True)

    Y_inf: float
    Z_inf: float
    W_inf: float
    X_inf: float
    A: float
    B: float
    char_poly: Tuple[float, float, float]
    stable: bool
    P1: FlowPoint
    P2: FlowPoint
    P3: Optional[FlowPoint] = None
    P_star: FlowPoint

    @property
    def point(self) -> FlowPoint:
        return FlowPoint(Y=self.Y_inf, Z=self.Z_inf, W=self.W_inf)


class StabilityReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    char_poly: Tuple[float, float, float]
    stable: bool
    strong_inequality: bool
    eigen_real_parts: Tuple[float, float, float]


class StructureReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    cooperative: bool
    irreducible: bool
    n_points: int


# ==================================================
# TRAJECTORIES
# ==================================================
class FlowTrajectory(BaseModel):
    params: SystemParams
    t: List[float]
    points: List[FlowPoint]
    status: FlowStatus
    omega_estimate: Optional[FlowPoint] = None
    cauchy_spread: float

    def arrays(self) -> np.ndarray:
        return np.array([pt.as_vector() for pt in self.points]).T


class FlowCoordinates(BaseModel):
    """(X, Y, Z, W) read off a radial trajectory, t = ln r."""

    t: List[float]
    X: List[float]
    Y: List[float]
    Z: List[float]
    W: List[float]
    residual: float

    def arrays(self) -> Dict[str, np.ndarray]:
        return {key: np.asarray(getattr(self, key)) for key in ("t", "X", "Y", "Z", "W")}


class FlowReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float
    residual: float
    r_window: Tuple[float, float]
    equilibrium: Optional[Equilibrium] = None
    stability: Optional[StabilityReport] = None
    structure: Optional[StructureReport] = None
