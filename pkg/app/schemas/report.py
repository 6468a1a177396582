from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict


class AsymptoticsReport(BaseModel):
    """Predicted and fitted growth constants of u/r^nu_u and v/r^nu_v."""

    model_config = ConfigDict(frozen=True)

    nu_u: float
    nu_v: float
    A_pred: float
    B_pred: float
    A_fit: float
    B_fit: float
    rel_err_A: float
    rel_err_B: float
    r_window: Tuple[float, float]
    # one-term extrapolation in 1/ln r over r_window
    A_extrap: float
    B_extrap: float
    extrapolation: str = "1/ln r"


class SingleEquationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    N: int
    p: float
    m: float
    q: float
    delta: float
    exponent: float
    C_pred: float
    C_fit: float
    rel_err_C: float
    max_uv_mismatch: float
    growth: AsymptoticsReport


class DimensionRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    N: int
    A_pred: float
    B_pred: float
    A_fit: float
    B_fit: float


class DimensionReport(BaseModel):
    rows: List[DimensionRow]

    @property
    def decreasing(self) -> bool:
        fits = [row.A_fit for row in self.rows]
        return all(x > y for x, y in zip(fits, fits[1:]))


class SweepRow(BaseModel):
    """One grid point; failed points carry the error name in regime."""

    model_config = ConfigDict(frozen=True)

    N: float
    p: float
    m: float
    q: float
    alpha: float
    beta: float
    delta: Optional[float] = None
    sigma: Optional[float] = None
    regime: str
    R_est: Optional[float] = None
    A_pred: Optional[float] = None
    B_pred: Optional[float] = None
