"""Radial integration of the system in the variables (u, z, v, s).

z = (u')^(p-1-alpha) and s = (v')^(p-1) keep the right-hand side rational
in the state and avoid differentiating |u'|^(p-2) u' at u' = 0:

    u' = z^(1/k),   z' = k/(p-1) v^m - gamma z / r,
    v' = s^(1/(p-1)),   s' = v^beta z^(q/k) - (N-1) s / r,      k = p-1-alpha.

The origin is handled by analytic seeding at r0; for r >= 1 the integration
runs in t = ln r.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from app.core.exceptions import (
    DegenerateAlpha,
    DomainViolation,
    InsufficientSamples,
    MonitorViolation,
    NonPositiveState,
    RegimeMismatch,
    StepUnderflow,
)
from app.core.logging_config import get_logger
from app.models.enums import MonitorName, MonitorPolicy, StopReason
from app.schemas.config import IntegrationConfig
from app.schemas.params import DerivedConstants, SystemParams
from app.schemas.trajectory import (
    BlowupEstimate,
    MonitorRecord,
    RadialState,
    RadialTrajectory,
)
from app.services import params_core
from app.utils.export import write_csv

logger = get_logger()

TRAJECTORY_COLUMNS = ("r", "u", "uprime", "v", "vprime", "z", "s")

# atol per component = ATOL_SCALE * rtol * |y| at the start of each stage
ATOL_SCALE = 1e-2
# indicator level above which a step-size underflow is read as blow-up
UNDERFLOW_BLOWUP_INDICATOR = 1e3


# ---------------------------------------------------------------------
# COEFFICIENTS
# ---------------------------------------------------------------------
@dataclass(frozen=True)
class _Coefficients:
    N: int
    p: float
    m: float
    q: float
    alpha: float
    beta: float
    k: float
    gamma: float
    z_star: float

    @classmethod
    def of(cls, params: SystemParams) -> "_Coefficients":
        if params.alpha_degenerate:
            raise DegenerateAlpha(
                f"alpha < p-1 required for radial integration (alpha={params.alpha}, p={params.p})"
            )
        k = params.k
        return cls(
            N=params.N,
            p=params.p,
            m=params.m,
            q=params.q,
            alpha=params.alpha,
            beta=params.beta,
            k=k,
            gamma=(params.N - 1) * k / (params.p - 1),
            z_star=params.N + params.alpha / k,
        )


def _make_rhs(c: _Coefficients):
    inv_k = 1.0 / c.k
    inv_pm1 = 1.0 / (c.p - 1)
    cz = c.k / (c.p - 1)
    qk = c.q / c.k
    gamma, n1, m, beta = c.gamma, c.N - 1, c.m, c.beta

    def f(r, y):
        u, z, v, s = y
        z = z if z > 0 else 0.0
        s = s if s > 0 else 0.0
        return np.array([
            z ** inv_k,
            cz * v ** m - gamma * z / r,
            s ** inv_pm1,
            v ** beta * z ** qk - n1 * s / r,
        ])

    return f


def _rhs_arrays(c: _Coefficients, r, u, z, v, s) -> np.ndarray:
    return np.array([
        np.power(z, 1.0 / c.k),
        c.k / (c.p - 1) * np.power(v, c.m) - c.gamma * z / r,
        np.power(s, 1.0 / (c.p - 1)),
        np.power(v, c.beta) * np.power(z, c.q / c.k) - (c.N - 1) * s / r,
    ])


def _indicator(c: _Coefficients, r, z, v, s):
    """max(Z / (N + alpha/k), Y): bounded on global solutions, ~ r/(R-r) at blow-up."""
    z_safe = np.where(z > 0, z, np.inf)
    Z = r * np.power(v, c.m) / z_safe
    Y = r * np.power(np.maximum(s, 0.0), 1.0 / (c.p - 1)) / v
    return np.maximum(np.maximum(Z / c.z_star, Y), 1e-300)


# ---------------------------------------------------------------------
# SEEDING AT THE ORIGIN
# ---------------------------------------------------------------------
def seed_near_origin(
    params: SystemParams,
    a: float,
    b: float,
    r0: float = 1e-6,
    corrected: bool = True,
) -> RadialState:
    """Leading-order state at r0 from integrating the radial equations with v = b."""
    c = _Coefficients.of(params)
    if not (a > 0 and b > 0 and r0 > 0):
        raise DomainViolation(f"a, b, r0 > 0 required (a={a}, b={b}, r0={r0})")

    k = c.k
    slope = k * b ** c.m / ((c.N - 1) * k + c.p - 1)
    z = slope * r0
    w = z ** (1.0 / k)
    s = b ** c.beta * w ** c.q * r0 / (c.N + c.q / k)

    u, v = a, b
    if corrected:
        u = a + k / (k + 1) * slope ** (1.0 / k) * r0 ** (1 + 1.0 / k)
        e = (1 + c.q / k) / (c.p - 1)
        coef = (b ** c.beta * slope ** (c.q / k) / (c.N + c.q / k)) ** (1.0 / (c.p - 1))
        v = b + coef * r0 ** (e + 1) / (e + 1)

    return RadialState(r=r0, u=u, z=z, v=v, s=s)


# ---------------------------------------------------------------------
# RIGHT-HAND SIDE
# ---------------------------------------------------------------------
def rhs(state: RadialState, params: SystemParams) -> np.ndarray:
    """d/dr of (u, z, v, s)."""
    if not (state.r > 0 and state.u > 0 and state.v > 0 and state.z >= 0 and state.s >= 0):
        raise NonPositiveState(f"Non-positive state at r={state.r}: {state.model_dump()}")
    c = _Coefficients.of(params)
    return _make_rhs(c)(state.r, state.as_vector())


# ---------------------------------------------------------------------
# MONITORS (bounds on every radial solution)
# ---------------------------------------------------------------------
def _monitor_excess(c: _Coefficients, r, y) -> Dict[MonitorName, np.ndarray]:
    u, z, v, s = y
    du, dz, dv, ds = _rhs_arrays(c, r, u, z, v, s)
    vm = np.power(v, c.m)
    source = np.power(v, c.beta) * np.power(z, c.q / c.k)
    tiny = 1e-300

    l01 = (c.z_star * z - r * vm) / np.maximum(r * vm, tiny)
    l02 = (c.N * s - r * source) / np.maximum(r * source, tiny)

    lower_z = c.k / (c.N * c.k + c.alpha) * vm
    upper_z = c.k / (c.p - 1) * vm
    l1 = np.maximum(lower_z - dz, dz - upper_z) / np.maximum(upper_z, tiny)

    l2 = np.maximum(source / c.N - ds, ds - source) / np.maximum(source, tiny)

    monotone = np.zeros_like(r)
    if r.size > 1:
        rel = np.diff(y, axis=1) / np.maximum(np.abs(y[:, 1:]), tiny)
        monotone[1:] = np.max(-rel, axis=0)

    return {
        MonitorName.L01: l01,
        MonitorName.L02: l02,
        MonitorName.L1: l1,
        MonitorName.L2: l2,
        MonitorName.MONOTONE: monotone,
    }


def check_monitors(
    c: _Coefficients, r: np.ndarray, y: np.ndarray, slack: float, r_start: float = 0.0
) -> Tuple[List[MonitorRecord], Optional[int]]:
    """Violations beyond slack (first per monitor) and the first violating index.

    Points with r < r_start are skipped: the seed sits on the l01 and l1 bounds
    and its truncation error decays over the first few multiples of r0.
    """
    records: List[MonitorRecord] = []
    first_index: Optional[int] = None
    checked = r >= r_start
    for name, excess in _monitor_excess(c, r, y).items():
        bad = np.nonzero((excess > slack) & checked)[0]
        if bad.size == 0:
            continue
        idx = int(bad[0])
        records.append(MonitorRecord(monitor=name, r=float(r[idx]), excess=float(excess[idx])))
        if first_index is None or idx < first_index:
            first_index = idx
    records.sort(key=lambda rec: rec.r)
    return records, first_index


# ---------------------------------------------------------------------
# INTEGRATE
# ---------------------------------------------------------------------
@dataclass
class _Stage:
    logarithmic: bool
    solution: object
    x_start: float
    x_end: float

    def to_r(self, x):
        return np.exp(x) if self.logarithmic else x

    def to_x(self, r):
        return np.log(r) if self.logarithmic else r

    def covers(self, r) -> np.ndarray:
        lo, hi = self.to_r(self.x_start), self.to_r(self.x_end)
        return (r >= lo * (1 - 1e-14)) & (r <= hi * (1 + 1e-14))


def _stage_atol(y0: np.ndarray, cfg: IntegrationConfig) -> np.ndarray:
    """Per-component atol, capped by cfg.atol and scaled to the stage's initial state.

    Near the origin z ~ r0 and s ~ r0^(1+q/k) sit far below any fixed atol;
    every component grows, so a bound taken at the stage start stays relative.
    """
    return np.clip(ATOL_SCALE * cfg.rtol * np.abs(y0), 1e-300, cfg.atol)


def _solve_stage(c, f, y0, x_span, logarithmic, cfg: IntegrationConfig):
    if logarithmic:
        def fun(x, y):
            r = np.exp(x)
            return r * f(r, y)
    else:
        fun = f

    def blowup_event(x, y):
        r = np.exp(x) if logarithmic else x
        return np.log(cfg.blowup_cap) - float(np.log(_indicator(c, r, y[1], y[2], y[3])))

    def overflow_event(x, y):
        return np.log(cfg.overflow_cap) - np.log(max(y[1], y[2], 1e-300))

    blowup_event.terminal = True
    blowup_event.direction = -1
    overflow_event.terminal = True
    overflow_event.direction = -1

    return solve_ivp(
        fun,
        x_span,
        y0,
        method=cfg.method,
        rtol=cfg.rtol,
        atol=_stage_atol(y0, cfg),
        events=(blowup_event, overflow_event),
        dense_output=True,
    )


def integrate(
    params: SystemParams,
    a: float,
    b: float,
    config: Optional[IntegrationConfig] = None,
) -> RadialTrajectory:
    cfg = config or IntegrationConfig()
    c = _Coefficients.of(params)
    f = _make_rhs(c)

    seed = seed_near_origin(params, a, b, cfg.r0, corrected=cfg.seed_corrections)
    y = seed.as_vector()

    spans: List[Tuple[bool, float, float]] = []
    if cfg.r0 < 1:
        spans.append((False, cfg.r0, min(1.0, cfg.r_max)))
    if cfg.r_max > 1:
        spans.append((True, np.log(max(cfg.r0, 1.0)), np.log(cfg.r_max)))

    stages: List[_Stage] = []
    step_r: List[np.ndarray] = [np.array([cfg.r0])]
    step_y: List[np.ndarray] = [y.reshape(4, 1)]
    stop = StopReason.REACHED_R_MAX

    for logarithmic, x0, x1 in spans:
        sol = _solve_stage(c, f, y, (x0, x1), logarithmic, cfg)
        stage = _Stage(logarithmic, sol.sol, x0, float(sol.t[-1]))
        if sol.sol is not None:
            stages.append(stage)
        step_r.append(stage.to_r(sol.t[1:]))
        step_y.append(sol.y[:, 1:])
        y = sol.y[:, -1]

        if sol.status == -1:
            r_end = stage.to_r(sol.t[-1])
            if _underflow_at_blowup(c, stage.to_r(sol.t), sol.y):
                stop = StopReason.BLOW_UP
                logger.bind(log_type="solver").info(
                    f"Step underflow at rising indicator | r={r_end:.6g} | treated as blow-up"
                )
            else:
                stop = StopReason.STEP_UNDERFLOW
                logger.bind(log_type="solver").warning(f"Step underflow | r={r_end:.6g} | {sol.message}")
            break
        if sol.status == 1:
            stop = StopReason.BLOW_UP
            break

    r_steps = np.concatenate(step_r)
    y_steps = np.concatenate(step_y, axis=1)
    if r_steps.size < 2 or not stages:
        raise StepUnderflow(f"No accepted step from r0={cfg.r0}")

    # Monitors at every accepted step
    records, first_bad = check_monitors(
        c, r_steps, y_steps, cfg.monitor_tolerance, r_start=cfg.monitor_warmup * cfg.r0
    )
    if records:
        worst = records[0]
        logger.bind(log_type="solver").warning(
            f"Monitor violation | {worst.monitor.value} | r={worst.r:.6g} | excess={worst.excess:.3e}"
        )
        if cfg.monitor_policy == MonitorPolicy.RAISE:
            raise MonitorViolation(worst.monitor.value, worst.r)
        if cfg.monitor_policy == MonitorPolicy.STOP:
            stop = StopReason.MONITOR_VIOLATION
            cut = max(first_bad, 1)
            r_steps, y_steps = r_steps[:cut], y_steps[:, :cut]

    samples = _build_samples(stages, r_steps, y_steps, cfg, include_tail=stop != StopReason.REACHED_R_MAX)

    trajectory = RadialTrajectory(
        params=params,
        initial=(a, b),
        samples=samples,
        stop=stop,
        monitors=records,
        n_steps=int(r_steps.size - 1),
    )

    if stop == StopReason.BLOW_UP:
        trajectory.R_est = _blowup_radius(trajectory, c)

    logger.bind(log_type="solver").info(
        f"Integration finished | stop={stop.value} | r_end={trajectory.last.r:.6g} "
        f"| steps={trajectory.n_steps} | R_est={trajectory.R_est}"
    )
    return trajectory


def _build_samples(
    stages: List[_Stage],
    r_steps: np.ndarray,
    y_steps: np.ndarray,
    cfg: IntegrationConfig,
    include_tail: bool,
) -> List[RadialState]:
    r_start, r_end = float(r_steps[0]), float(r_steps[-1])
    decades = max(np.log10(r_end / r_start), 1e-12)
    n = max(int(np.ceil(decades * cfg.samples_per_decade)) + 1, 2)
    grid = np.geomspace(r_start, r_end, n)

    values = np.empty((4, n))
    filled = np.zeros(n, dtype=bool)
    for stage in stages:
        mask = stage.covers(grid) & ~filled
        if mask.any():
            values[:, mask] = stage.solution(stage.to_x(grid[mask]))
            filled |= mask
    values[:, 0] = y_steps[:, 0]
    values[:, -1] = y_steps[:, -1]

    r_all, y_all = grid, values
    if include_tail and n > 2:
        tail = r_steps > grid[-2]
        r_all = np.concatenate([grid[:-1], r_steps[tail]])
        y_all = np.concatenate([values[:, :-1], y_steps[:, tail]], axis=1)

    # positivity is checked on accepted steps only; dense output may dip below 0
    u, z, v, s = y_steps
    bad = (u <= 0) | (v <= 0) | (z < 0) | (s < 0)
    if bad.any():
        raise NonPositiveState(f"Non-positive state at r={r_steps[int(np.nonzero(bad)[0][0])]:.6g}")

    u, z, v, s = y_all
    return [
        RadialState(r=float(r), u=float(uu), z=max(float(zz), 0.0), v=float(vv), s=max(float(ss), 0.0))
        for r, uu, zz, vv, ss in zip(r_all, u, z, v, s)
    ]


def _underflow_at_blowup(c: _Coefficients, r: np.ndarray, y: np.ndarray, window: int = 8) -> bool:
    """True when the indicator is large and rising over the last accepted steps."""
    if r.size < 2:
        return False
    r, y = r[-window:], y[:, -window:]
    ind = _indicator(c, r, y[1], y[2], y[3])
    return bool(ind[-1] > ind[0] and ind[-1] >= UNDERFLOW_BLOWUP_INDICATOR)


def _blowup_radius(trajectory: RadialTrajectory, c: _Coefficients) -> float:
    try:
        derived = params_core.derive(trajectory.params)
        return estimate_blowup(trajectory, derived).R_est
    except (InsufficientSamples, RegimeMismatch) as exc:
        last = trajectory.last
        indicator = float(_indicator(c, last.r, last.z, last.v, last.s))
        logger.bind(log_type="solver").warning(
            f"Blow-up fit unavailable ({type(exc).__name__}); using r/indicator estimate"
        )
        return last.r * (1.0 + 1.0 / indicator)


# ---------------------------------------------------------------------
# BLOW-UP RATE
# ---------------------------------------------------------------------
def estimate_blowup(trajectory: RadialTrajectory, derived: DerivedConstants) -> BlowupEstimate:
    """Fit z^(1-sigma)/(sigma-1) = C (R - r) over the final decade of samples."""
    if trajectory.stop != StopReason.BLOW_UP:
        raise RegimeMismatch(f"Blow-up fit needs stop=BlowUp, got {trajectory.stop.value}")
    sigma = derived.sigma
    if sigma is None or sigma <= 1:
        raise RegimeMismatch(f"Blow-up fit needs sigma > 1, got {sigma}")

    data = trajectory.arrays()
    r, z = data["r"], data["z"]
    w = np.power(z, 1 - sigma) / (sigma - 1)

    window = w <= 10 * w[-1]
    if window.sum() < 5:
        raise InsufficientSamples(f"Only {int(window.sum())} samples in the final decade")

    r_win, w_win = r[window], w[window]
    fit = stats.linregress(r_win, w_win)
    if not fit.slope < 0:
        raise InsufficientSamples(f"Non-decreasing z^(1-sigma) in the final decade (slope={fit.slope})")
    R_est = float(np.mean(r_win) - np.mean(w_win) / fit.slope)
    R_est = max(R_est, float(np.nextafter(r[-1], np.inf)))

    gaps = R_est - r_win
    keep = gaps > 0
    if keep.sum() < 3:
        raise InsufficientSamples("Fewer than 3 samples below the fitted blow-up radius")
    rate = stats.linregress(np.log(gaps[keep]), np.log(data["uprime"][window][keep])).slope

    return BlowupEstimate(
        R_est=R_est,
        rate_exponent=float(rate),
        fit_quality=float(fit.rvalue ** 2),
        n_window=int(window.sum()),
        predicted_rate=derived.blowup_rate_uprime,
        u_bounded=bool(rate > -1),
    )


# ---------------------------------------------------------------------
# SCALING FAMILY
# ---------------------------------------------------------------------
def _scaling_exponents(params: SystemParams) -> np.ndarray:
    """Exponents of lambda for (u, z, v, s)."""
    delta = params.delta
    nu_u = 1 + (params.p * (params.m + 1) - (1 + params.beta)) / delta
    nu_v = (params.p * params.k + params.q) / delta
    return np.array([nu_u, (nu_u - 1) * params.k, nu_v, (nu_v - 1) * (params.p - 1)])


def scale_solution(trajectory: RadialTrajectory, lam: float) -> RadialTrajectory:
    """u_lam(r) = lam^nu_u u(r/lam), v_lam(r) = lam^nu_v v(r/lam)."""
    if not lam > 0:
        raise DomainViolation(f"lambda > 0 required, got {lam}")
    factors = np.power(lam, _scaling_exponents(trajectory.params))
    a, b = trajectory.initial

    samples = [
        RadialState(
            r=lam * st.r,
            u=factors[0] * st.u,
            z=factors[1] * st.z,
            v=factors[2] * st.v,
            s=factors[3] * st.s,
        )
        for st in trajectory.samples
    ]
    return trajectory.model_copy(update={
        "initial": (factors[0] * a, factors[2] * b),
        "samples": samples,
        "R_est": None if trajectory.R_est is None else lam * trajectory.R_est,
        "monitors": [rec.model_copy(update={"r": lam * rec.r}) for rec in trajectory.monitors],
    })


def scaling_residual(original: RadialTrajectory, scaled: RadialTrajectory, lam: float) -> float:
    """Max relative mismatch between rhs(scaled) and the rescaled rhs(original)."""
    c = _Coefficients.of(original.params)
    src, dst = original.arrays(), scaled.arrays()
    expected = _rhs_arrays(c, src["r"], src["u"], src["z"], src["v"], src["s"])
    expected = expected * np.power(lam, _scaling_exponents(original.params) - 1)[:, None]
    actual = _rhs_arrays(c, dst["r"], dst["u"], dst["z"], dst["v"], dst["s"])
    return float(np.max(np.abs(actual - expected) / np.maximum(np.abs(expected), 1e-300)))


# ---------------------------------------------------------------------
# INTERPOLATION
# ---------------------------------------------------------------------
def evaluate(trajectory: RadialTrajectory, r_values: Union[Sequence[float], np.ndarray]) -> Dict[str, np.ndarray]:
    """Cubic Hermite interpolation using the exact derivatives; NaN outside the sampled range."""
    c = _Coefficients.of(trajectory.params)
    data = trajectory.arrays()
    r = data["r"]
    derivs = _rhs_arrays(c, r, data["u"], data["z"], data["v"], data["s"])
    points = np.atleast_1d(np.asarray(r_values, dtype=float))

    out = {"r": points}
    for i, key in enumerate(("u", "z", "v", "s")):
        spline = CubicHermiteSpline(r, data[key], derivs[i], extrapolate=False)
        out[key] = spline(points)
    out["uprime"] = np.power(np.maximum(out["z"], 0.0), 1.0 / c.k)
    out["vprime"] = np.power(np.maximum(out["s"], 0.0), 1.0 / (c.p - 1))
    return out


def interpolate(trajectory: RadialTrajectory, r: float) -> RadialState:
    values = evaluate(trajectory, [r])
    if not np.isfinite(values["u"][0]):
        raise DomainViolation(f"r={r} outside the sampled range")
    return RadialState(
        r=r,
        u=float(values["u"][0]),
        z=max(float(values["z"][0]), 0.0),
        v=float(values["v"][0]),
        s=max(float(values["s"][0]), 0.0),
    )


# ---------------------------------------------------------------------
# COMPARISON PRINCIPLE
# ---------------------------------------------------------------------
def compare_solutions(
    params: SystemParams,
    lower: Tuple[float, float],
    upper: Tuple[float, float],
    config: Optional[IntegrationConfig] = None,
) -> bool:
    """b1 < b2 gives v1 < v2 and u1' < u2' wherever both solutions exist."""
    if not (lower[0] <= upper[0] and lower[1] < upper[1]):
        raise DomainViolation(f"Ordered data required: {lower} vs {upper}")
    first = integrate(params, *lower, config)
    second = integrate(params, *upper, config)

    r_lo = max(first.samples[0].r, second.samples[0].r)
    r_hi = min(first.last.r, second.last.r)
    grid = np.geomspace(r_lo, r_hi, 400)[1:-1]
    one, two = evaluate(first, grid), evaluate(second, grid)
    return bool(np.all(one["v"] < two["v"]) and np.all(one["uprime"] < two["uprime"]))


# ---------------------------------------------------------------------
# EXPORT
# ---------------------------------------------------------------------
def trajectory_rows(trajectory: RadialTrajectory) -> List[List[float]]:
    data = trajectory.arrays()
    return [list(row) for row in zip(*(data[col] for col in TRAJECTORY_COLUMNS))]


def write_trajectory_csv(trajectory: RadialTrajectory, path: Path) -> Path:
    return write_csv(path, TRAJECTORY_COLUMNS, trajectory_rows(trajectory))
