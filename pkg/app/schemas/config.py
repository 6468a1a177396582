from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.enums import MonitorPolicy
from app.schemas.params import SystemParams


# ==================================================
# SOLVER SETTINGS
# ==================================================
class IntegrationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    r0: float = Field(1e-6, gt=0)
    r_max: float = Field(500.0, gt=0)
    rtol: float = Field(1e-10, gt=0)
    atol: float = Field(1e-12, gt=0)
    method: str = "DOP853"

    # scale-free indicator max(Z / (N + alpha/k), Y)
    blowup_cap: float = Field(1e10, gt=1)
    # raw max(v, z); protects the float range
    overflow_cap: float = Field(1e200, gt=1)

    samples_per_decade: int = Field(200, ge=4)
    monitor_slack: float = Field(1e-9, ge=0)
    # added to the slack as a multiple of rtol
    monitor_error_factor: float = Field(1e3, ge=0)
    # monitors start at monitor_warmup * r0, after the seed transient
    monitor_warmup: float = Field(10.0, ge=1)
    monitor_policy: MonitorPolicy = MonitorPolicy.RAISE

    @property
    def monitor_tolerance(self) -> float:
        return self.monitor_slack + self.monitor_error_factor * self.rtol
    seed_corrections: bool = True

    @model_validator(mode="after")
    def _check_radii(self):
        if self.r0 >= self.r_max:
            raise ValueError(f"r0 < r_max violated: r0={self.r0}, r_max={self.r_max}")
        return self


# ==================================================
# SWEEP GRID
# ==================================================
class SweepSpec(BaseModel):
    """Value lists per parameter; the grid is their cartesian product."""

    model_config = ConfigDict(frozen=True)

    grid: Dict[str, List[float]] = {}
    random_points: int = Field(0, ge=0)
    solve: bool = True


# ==================================================
# RUN CONFIG (CLI)
# ==================================================
class RunConfig(BaseModel):
    params: SystemParams
    a: float = Field(1.0, gt=0)
    b: float = Field(1.0, gt=0)
    integration: IntegrationConfig = IntegrationConfig()
    out: Path = Path("out")
    seed: int = 0
    workers: int = Field(1, ge=1)
    sweep: SweepSpec = SweepSpec()

    @model_validator(mode="after")
    def _check_run(self):
        cfg = self.integration
        if not cfg.r0 < 1 < cfg.r_max:
            raise ValueError(f"r0 < 1 < r_max violated: r0={cfg.r0}, r_max={cfg.r_max}")
        return self

    @property
    def initial(self) -> tuple:
        return self.a, self.b

    def ensure_out(self) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        marker = self.out / ".write_check"
        marker.write_text("")
        marker.unlink()
        return self.out


class Artifacts(BaseModel):
    """Paths written by a subcommand."""

    files: List[Path] = []
    summary: Optional[dict] = None
