"""Autonomous cooperative system in (Y, Z, W), t = ln r.

    Y_t = Y((p-N)/(p-1) - Y + W/(p-1))
    Z_t = Z((N(p-1) - (N-1)alpha)/(p-1) - k/(p-1) Z + m Y)
    W_t = W((N(p-1) - q(N-1))/(p-1) + beta Y + q Z/(p-1) - W)

with X = r u'/u, Y = r v'/v, Z = r v^m/(u')^k, W = r v^beta (u')^q/(v')^(p-1).
"""
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.sparse.csgraph import connected_components

from app.core.exceptions import DegenerateAlpha, DeltaNotPositive, DomainViolation, StepUnderflow
from app.core.logging_config import get_logger
from app.models.enums import FlowStatus
from app.schemas.flow import (
    Equilibrium,
    FlowCoordinates,
    FlowPoint,
    FlowTrajectory,
    StabilityReport,
    StructureReport,
)
from app.schemas.params import SystemParams
from app.schemas.trajectory import RadialTrajectory
from app.utils.export import write_csv

logger = get_logger()

FLOW_COLUMNS = ("t", "X", "Y", "Z", "W")

DIVERGENCE_CAP = 1e12
CAUCHY_FRACTION = 0.1

Box = Sequence[Tuple[float, float]]


def _rates(params: SystemParams) -> Tuple[float, float, float, float]:
    """Constant parts of the three brackets and k/(p-1)."""
    N, p, q, alpha = params.N, params.p, params.q, params.alpha
    c1 = (p - N) / (p - 1)
    c2 = (N * (p - 1) - (N - 1) * alpha) / (p - 1)
    c3 = (N * (p - 1) - q * (N - 1)) / (p - 1)
    return c1, c2, c3, params.k / (p - 1)


def _field(y: np.ndarray, params: SystemParams) -> np.ndarray:
    Y, Z, W = y
    c1, c2, c3, cz = _rates(params)
    p = params.p
    return np.array([
        Y * (c1 - Y + W / (p - 1)),
        Z * (c2 - cz * Z + params.m * Y),
        W * (c3 + params.beta * Y + params.q * Z / (p - 1) - W),
    ])


# ---------------------------------------------------------------------
# VECTOR FIELD
# ---------------------------------------------------------------------
def vector_field(pt: FlowPoint, params: SystemParams) -> np.ndarray:
    return _field(pt.as_vector(), params)


def x_equation(X, Z, params: SystemParams):
    c1 = (params.p - params.N) / (params.p - 1)
    return X * (c1 - X + Z / (params.p - 1))


def jacobian(pt: FlowPoint, params: SystemParams) -> np.ndarray:
    Y, Z, W = pt.as_vector()
    c1, c2, c3, cz = _rates(params)
    p, m, q, beta = params.p, params.m, params.q, params.beta
    return np.array([
        [c1 - 2 * Y + W / (p - 1), 0.0, Y / (p - 1)],
        [m * Z, c2 - 2 * cz * Z + m * Y, 0.0],
        [beta * W, q * W / (p - 1), c3 + beta * Y + q * Z / (p - 1) - 2 * W],
    ])


# ---------------------------------------------------------------------
# EQUILIBRIA
# ---------------------------------------------------------------------
def _require_positive_delta(params: SystemParams) -> None:
    if params.alpha_degenerate:
        raise DegenerateAlpha(f"alpha < p-1 required (alpha={params.alpha}, p={params.p})")
    if not params.delta > 0:
        raise DeltaNotPositive(f"delta > 0 required, got {params.delta:.6g}")


def char_poly(Y: float, Z: float, W: float, params: SystemParams) -> Tuple[float, float, float]:
    """(a, b, c) of det(lambda I - M) = lambda^3 + a lambda^2 + b lambda + c at (Y, Z, W)."""
    p, beta = params.p, params.beta
    cz = params.k / (p - 1)
    a = Y + cz * Z + W
    b = cz * Y * Z + (p - 1 - beta) / (p - 1) * Y * W + cz * Z * W
    c = params.delta / (p - 1) ** 2 * Y * Z * W
    return a, b, c


def equilibrium(params: SystemParams) -> Equilibrium:
    _require_positive_delta(params)
    N, p, m, q, alpha, beta = params.N, params.p, params.m, params.q, params.alpha, params.beta
    k, delta = params.k, params.delta

    Y = (p * k + q) / delta
    Z = m * (p - 1) / k * Y + N + alpha / k
    W = (p - 1) * Y + N - p
    X = Z / (p - 1) + (p - N) / (p - 1)

    # the exponents scale like 1/delta, so small delta leaves the float range
    lnX, lnY, lnZ, lnW = np.log([X, Y, Z, W])
    with np.errstate(over="ignore", under="ignore"):
        A = float(np.exp(-(m * (p - 1) * lnY + (p - 1 - beta) * lnZ + m * lnW) / delta - lnX))
        B = float(np.exp(-((p - 1) * k * lnY + q * lnZ + k * lnW) / delta))

    a, b, c = char_poly(Y, Z, W, params)
    z_star = N + alpha / k
    P3 = None
    if p >= N:
        P3 = FlowPoint(Y=(p - N) / (p - 1), Z=N + (alpha + m * (p - N)) / k, W=0.0)

    return Equilibrium(
        Y_inf=Y,
        Z_inf=Z,
        W_inf=W,
        X_inf=X,
        A=A,
        B=B,
        char_poly=(a, b, c),
        stable=bool(a > 0 and c > 0 and a * b > c),
        P1=FlowPoint(Y=0.0, Z=z_star, W=0.0),
        P2=FlowPoint(Y=0.0, Z=z_star, W=N + q / k),
        P3=P3,
        P_star=FlowPoint(Y=0.0, Z=z_star, W=float(N)),
    )


def stability(params: SystemParams) -> StabilityReport:
    """Routh-Hurwitz on the cubic, cross-checked against the eigenvalues of the linearization."""
    eq = equilibrium(params)
    a, b, c = eq.char_poly
    eigen = np.linalg.eigvals(jacobian(eq.point, params))
    real_parts = tuple(sorted(float(x) for x in eigen.real))
    return StabilityReport(
        char_poly=(a, b, c),
        stable=bool(a > 0 and c > 0 and a * b > c),
        strong_inequality=bool(a * b > 9 * c),
        eigen_real_parts=real_parts,
    )


# ---------------------------------------------------------------------
# COOPERATIVITY / IRREDUCIBILITY
# ---------------------------------------------------------------------
def _box_points(box: Box, n_random: int, seed: int) -> np.ndarray:
    lows = np.array([lo for lo, _ in box], dtype=float)
    highs = np.array([hi for _, hi in box], dtype=float)
    if np.any(lows < 0) or np.any(highs < lows):
        raise DomainViolation(f"Sample box must lie in the closed positive octant: {list(box)}")
    corners = np.array(np.meshgrid(*zip(lows, highs), indexing="ij")).reshape(3, -1).T
    rng = np.random.default_rng(seed)
    inner = lows + (highs - lows) * rng.random((n_random, 3))
    return np.vstack([corners, inner])


def structure_checks(
    params: SystemParams,
    sample_box: Box,
    n_random: int = 64,
    seed: int = 0,
) -> StructureReport:
    cooperative = True
    irreducible = True
    points = _box_points(sample_box, n_random, seed)
    off_diagonal = ~np.eye(3, dtype=bool)

    for values in points:
        J = jacobian(FlowPoint.from_vector(values), params)
        if np.any(J[off_diagonal] < 0):
            cooperative = False
        # edge j -> i when dg_i/dx_j != 0
        graph = ((J != 0) & off_diagonal).T.astype(int)
        n_components, _ = connected_components(graph, directed=True, connection="strong")
        if n_components != 1:
            irreducible = False

    return StructureReport(cooperative=cooperative, irreducible=irreducible, n_points=len(points))


# ---------------------------------------------------------------------
# FLOW INTEGRATION
# ---------------------------------------------------------------------
def integrate_flow(
    start: FlowPoint,
    params: SystemParams,
    t_max: float = 100.0,
    tol: float = 1e-6,
    n_samples: int = 2001,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> FlowTrajectory:
    """Integrate from start to t_max; omega_estimate set when the final 10% is Cauchy within tol."""

    def divergence(t, y):
        return np.log(DIVERGENCE_CAP) - np.log(max(np.max(np.abs(y)), 1e-300))

    divergence.terminal = True
    divergence.direction = -1

    t_eval = np.linspace(0.0, t_max, n_samples)
    sol = solve_ivp(
        lambda t, y: _field(y, params),
        (0.0, t_max),
        start.as_vector(),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
        events=divergence,
    )
    if sol.status == -1:
        raise StepUnderflow(f"Flow integration failed: {sol.message}")

    y = np.maximum(sol.y, 0.0)
    points = [FlowPoint.from_vector(col) for col in y.T]

    if sol.status == 1:
        status, omega, spread = FlowStatus.DIVERGENT, None, float("inf")
    else:
        window = sol.t >= (1 - CAUCHY_FRACTION) * t_max
        spread = float(np.max(np.abs(y[:, window] - y[:, -1:])))
        if spread < tol:
            status, omega = FlowStatus.CONVERGED, points[-1]
        else:
            status, omega = FlowStatus.NON_CONVERGENT, None

    logger.bind(log_type="solver").debug(
        f"Flow integrated | status={status.value} | t_end={sol.t[-1]:.6g} | spread={spread:.3e}"
    )
    return FlowTrajectory(
        params=params,
        t=sol.t.tolist(),
        points=points,
        status=status,
        omega_estimate=omega,
        cauchy_spread=spread,
    )


# ---------------------------------------------------------------------
# EXTRACTION FROM RADIAL TRAJECTORIES
# ---------------------------------------------------------------------
def extract_flow_coordinates(
    trajectory: RadialTrajectory,
    r_window: Optional[Tuple[float, float]] = None,
    trim: int = 2,
) -> FlowCoordinates:
    """Flow coordinates along a radial solution plus the max residual of the four-dimensional flow.

    The residual is the relative error of d(ln zeta)/dt from centered differences,
    taken inside r_window (whole range when None) with trim points dropped at each end.
    """
    params = trajectory.params
    k, p, m, q, beta = params.k, params.p, params.m, params.q, params.beta
    data = trajectory.arrays()
    r, u, v, z, s = data["r"], data["u"], data["v"], data["z"], data["s"]

    t = np.log(r)
    X = r * data["uprime"] / u
    Y = r * data["vprime"] / v
    Z = r * np.power(v, m) / z
    W = r * np.power(v, beta) * np.power(z, q / k) / s

    log_rates = [
        np.gradient(values, t) / values
        for values in (X, Y, Z, W)
    ]
    flow = _field(np.array([Y, Z, W]), params)
    exact = [x_equation(X, Z, params) / X, flow[0] / Y, flow[1] / Z, flow[2] / W]

    mask = np.zeros_like(t, dtype=bool)
    mask[trim: t.size - trim] = True
    if r_window is not None:
        mask &= (r >= r_window[0]) & (r <= r_window[1])
    residual = 0.0
    if mask.any():
        residual = float(max(
            np.max(np.abs(got[mask] - want[mask]) / np.maximum(np.abs(want[mask]), 1.0))
            for got, want in zip(log_rates, exact)
        ))

    return FlowCoordinates(
        t=t.tolist(), X=X.tolist(), Y=Y.tolist(), Z=Z.tolist(), W=W.tolist(), residual=residual
    )


def instantaneous_constants(coords: FlowCoordinates, params: SystemParams) -> Tuple[np.ndarray, np.ndarray]:
    """u/r^nu_u and v/r^nu_v written through (X, Y, Z, W) only."""
    p, m, q, beta = params.p, params.m, params.q, params.beta
    k, delta = params.k, params.delta
    data = coords.arrays()
    lnX, lnY, lnZ, lnW = (np.log(data[key]) for key in ("X", "Y", "Z", "W"))

    A = np.exp(-(m * (p - 1) * lnY + (p - 1 - beta) * lnZ + m * lnW) / delta - lnX)
    B = np.exp(-((p - 1) * k * lnY + q * lnZ + k * lnW) / delta)
    return A, B


def write_flow_csv(coords: FlowCoordinates, path: Path) -> Path:
    data = coords.arrays()
    rows = zip(*(data[col] for col in FLOW_COLUMNS))
    return write_csv(path, FLOW_COLUMNS, rows)
