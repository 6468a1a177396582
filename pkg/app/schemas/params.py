from typing import Optional

from pydantic import BaseModel, ConfigDict

from app.models.enums import RegimeTag


# ==================================================
# EXPONENT TUPLE
# ==================================================
class SystemParams(BaseModel):
    """Exponents of Δp u = v^m |∇u|^α, Δp v = v^β |∇u|^q in dimension N.

    Build through params_core.validate(); constructing directly skips the
    hypothesis checks.
    """

    model_config = ConfigDict(frozen=True)

    N: int
    p: float
    m: float
    q: float
    alpha: float
    beta: float

    @property
    def k(self) -> float:
        """p - 1 - alpha, the exponent of z = (u')^k."""
        return self.p - 1.0 - self.alpha

    @property
    def delta(self) -> float:
        return (self.p - 1.0 - self.alpha) * (self.p - 1.0 - self.beta) - self.q * self.m

    @property
    def alpha_degenerate(self) -> bool:
        return self.alpha >= self.p - 1.0

    def with_updates(self, **changes) -> "SystemParams":
        return self.model_copy(update=changes)


# ==================================================
# CLOSED-FORM QUANTITIES
# ==================================================
class DerivedConstants(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float
    gamma: float
    sigma: Optional[float] = None
    nu_u: float
    nu_v: float
    blowup_rate_uprime: Optional[float] = None
    regime: RegimeTag
    degenerate: bool = False
    near_degenerate_sigma: bool = False


class Regime(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag: RegimeTag
    global_exists: bool
