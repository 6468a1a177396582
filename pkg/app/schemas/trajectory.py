from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.models.enums import MonitorName, StopReason
from app.schemas.params import SystemParams


class RadialState(BaseModel):
    """One sample of the radial system; z = (u')^(p-1-alpha), s = (v')^(p-1)."""

    model_config = ConfigDict(frozen=True)

    r: float = Field(gt=0)
    u: float = Field(gt=0)
    z: float = Field(ge=0)
    v: float = Field(gt=0)
    s: float = Field(ge=0)

    def as_vector(self) -> np.ndarray:
        return np.array([self.u, self.z, self.v, self.s])


class MonitorRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    monitor: MonitorName
    r: float
    excess: float


class RadialTrajectory(BaseModel):
    params: SystemParams
    initial: Tuple[float, float]
    samples: List[RadialState]
    stop: StopReason
    R_est: Optional[float] = None
    monitors: List[MonitorRecord] = []
    n_steps: int = 0

    def arrays(self) -> Dict[str, np.ndarray]:
        data = {
            key: np.array([getattr(state, key) for state in self.samples])
            for key in ("r", "u", "z", "v", "s")
        }
        k = self.params.k
        data["uprime"] = np.power(data["z"], 1.0 / k)
        data["vprime"] = np.power(data["s"], 1.0 / (self.params.p - 1))
        return data

    @property
    def last(self) -> RadialState:
        return self.samples[-1]


class BlowupEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    R_est: float
    rate_exponent: float
    fit_quality: float
    n_window: int
    predicted_rate: Optional[float] = None
    u_bounded: bool


class SolveReport(BaseModel):
    """Stop report written next to the trajectory CSV."""

    model_config = ConfigDict(frozen=True)

    params: SystemParams
    initial: Tuple[float, float]
    regime: str
    stop: StopReason
    r_end: float
    R_est: Optional[float] = None
    n_steps: int
    n_samples: int
    monitors: List[MonitorRecord] = []
    blowup: Optional[BlowupEstimate] = None
