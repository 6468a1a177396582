"""Growth constants of global solutions: u ~ A r^nu_u, v ~ B r^nu_v."""
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.core.exceptions import (
    DeltaZero,
    DomainViolation,
    EmbeddingMismatch,
    NoSolutionRegime,
    RegimeMismatch,
)
from app.core.logging_config import get_logger
from app.models.enums import RegimeTag, StopReason
from app.schemas.config import IntegrationConfig
from app.schemas.flow import Equilibrium
from app.schemas.params import SystemParams
from app.schemas.report import AsymptoticsReport, DimensionReport, DimensionRow, SingleEquationReport
from app.schemas.trajectory import RadialTrajectory
from app.services import flow3d, params_core, radial_ode

logger = get_logger()

SINGLE_EQ_TOL = 1e-12
# max |u - v| / u accepted along an embedded single-equation run
EMBEDDING_TOL = 1e-8
# rtol ceiling for embedded runs; u and v go through different state variables
EMBEDDING_RTOL = 1e-12


def _exponents(params: SystemParams) -> Tuple[float, float]:
    derived = params_core.derive(params)
    return derived.nu_u, derived.nu_v


def _extrapolate(r_lo: float, r_hi: float, lo: float, hi: float) -> float:
    """Limit of c0 + c1/ln r through two points."""
    L0, L1 = np.log(r_lo), np.log(r_hi)
    return float((L1 * hi - L0 * lo) / (L1 - L0))


# ---------------------------------------------------------------------
# VERIFY GROWTH
# ---------------------------------------------------------------------
def verify_growth(trajectory: RadialTrajectory, equilibrium: Equilibrium) -> AsymptoticsReport:
    params = trajectory.params
    tag = params_core.classify(params).tag
    if tag != RegimeTag.ALL_BOUNDED_GLOBAL:
        raise RegimeMismatch(f"Growth constants need AllBoundedGlobal, got {tag.value}")
    if trajectory.stop != StopReason.REACHED_R_MAX:
        raise RegimeMismatch(f"Growth constants need stop=ReachedRMax, got {trajectory.stop.value}")

    nu_u, nu_v = _exponents(params)
    r_hi = trajectory.last.r
    r_lo = max(r_hi / 10, trajectory.samples[0].r)
    values = radial_ode.evaluate(trajectory, [r_lo, r_hi])
    values["u"][-1], values["v"][-1] = trajectory.last.u, trajectory.last.v

    A_lo, A_hi = values["u"] / np.array([r_lo, r_hi]) ** nu_u
    B_lo, B_hi = values["v"] / np.array([r_lo, r_hi]) ** nu_v

    report = AsymptoticsReport(
        nu_u=nu_u,
        nu_v=nu_v,
        A_pred=equilibrium.A,
        B_pred=equilibrium.B,
        A_fit=float(A_hi),
        B_fit=float(B_hi),
        rel_err_A=float(abs(A_hi - equilibrium.A) / equilibrium.A),
        rel_err_B=float(abs(B_hi - equilibrium.B) / equilibrium.B),
        r_window=(r_lo, r_hi),
        A_extrap=_extrapolate(r_lo, r_hi, A_lo, A_hi),
        B_extrap=_extrapolate(r_lo, r_hi, B_lo, B_hi),
    )
    logger.bind(log_type="solver").info(
        f"Growth verified | A_fit={report.A_fit:.8g} (pred {report.A_pred:.8g}) "
        f"| B_fit={report.B_fit:.8g} (pred {report.B_pred:.8g}) | r_hi={r_hi:.3g}"
    )
    return report


def growth_windows(
    trajectory: RadialTrajectory,
    equilibrium: Equilibrium,
    r_his: Sequence[float],
) -> List[float]:
    """|u(r_hi)/r_hi^nu_u - A| for each r_hi."""
    nu_u, _ = _exponents(trajectory.params)
    r = np.asarray(r_his, dtype=float)
    u = radial_ode.evaluate(trajectory, r)["u"]
    if not np.all(np.isfinite(u)):
        raise DomainViolation(f"Window radii outside the sampled range: {list(r_his)}")
    return [float(x) for x in np.abs(u / r ** nu_u - equilibrium.A)]


# ---------------------------------------------------------------------
# SINGLE EQUATION  Δp u = u^m |∇u|^q
# ---------------------------------------------------------------------
def single_equation_params(N: int, p: float, m: float, q: float) -> SystemParams:
    """The system with alpha = q, beta = m, whose solutions with a = b have u = v."""
    if not (p > 1 and m > 0 and q > 0):
        raise DomainViolation(f"p > 1, m > 0, q > 0 required (p={p}, m={m}, q={q})")
    if abs(m + q - (p - 1)) <= SINGLE_EQ_TOL * max(1.0, p):
        raise DeltaZero(f"m + q = p - 1 (m={m}, q={q}, p={p})")
    if q >= p - 1:
        raise NoSolutionRegime(f"q < p-1 required for global solutions (q={q}, p={p})")
    if m >= p - q - 1:
        raise NoSolutionRegime(f"m < p-q-1 required for global solutions (m={m}, p={p}, q={q})")
    return params_core.validate({"N": N, "p": p, "m": m, "q": q, "alpha": q, "beta": m})


def single_equation_mode(
    N: int,
    p: float,
    m: float,
    q: float,
    a: float = 1.0,
    config: Optional[IntegrationConfig] = None,
) -> Tuple[RadialTrajectory, SingleEquationReport]:
    params = single_equation_params(N, p, m, q)
    eq = flow3d.equilibrium(params)
    cfg = config or IntegrationConfig()
    if cfg.rtol > EMBEDDING_RTOL:
        cfg = cfg.model_copy(update={"rtol": EMBEDDING_RTOL})
    trajectory = radial_ode.integrate(params, a, a, cfg)

    data = trajectory.arrays()
    mismatch = float(np.max(np.abs(data["u"] - data["v"]) / data["u"]))
    if not mismatch < EMBEDDING_TOL:
        raise EmbeddingMismatch(
            f"max|u-v|/u = {mismatch:.3e} exceeds {EMBEDDING_TOL:.0e} (N={N}, p={p}, m={m}, q={q})"
        )
    growth = verify_growth(trajectory, eq)

    report = SingleEquationReport(
        N=N,
        p=p,
        m=m,
        q=q,
        delta=params.delta,
        exponent=(p - q) / (p - 1 - m - q),
        C_pred=eq.A,
        C_fit=growth.A_fit,
        rel_err_C=growth.rel_err_A,
        max_uv_mismatch=mismatch,
        growth=growth,
    )
    logger.bind(log_type="solver").info(f"Embedded run | exponent={report.exponent:.6g} | mismatch={mismatch:.3e}")
    return trajectory, report


# ---------------------------------------------------------------------
# DIMENSION DEPENDENCE
# ---------------------------------------------------------------------
def dimension_report(
    params: SystemParams,
    Ns: Sequence[int],
    a: float = 1.0,
    b: float = 1.0,
    config: Optional[IntegrationConfig] = None,
) -> DimensionReport:
    rows = []
    for N in Ns:
        current = params.with_updates(N=int(N))
        eq = flow3d.equilibrium(current)
        growth = verify_growth(radial_ode.integrate(current, a, b, config), eq)
        rows.append(DimensionRow(N=int(N), A_pred=eq.A, B_pred=eq.B, A_fit=growth.A_fit, B_fit=growth.B_fit))
    return DimensionReport(rows=rows)
