"""Fixed-point construction of the local radial solution on [0, rho].

    T1[u, v](r) = a + int_0^r ( k/(p-1) t^-gamma int_0^t s^gamma v^m ds )^(1/k) dt
    T2[u, v](r) = b + int_0^r ( t^(1-N) int_0^t s^(N-1) v^beta |u'|^q ds )^(1/(p-1)) dt

Every integral is a product-trapezoid rule against the leading power of its
integrand, so the singular factors near t = 0 are integrated exactly.
"""
from pathlib import Path
from typing import Optional

import numpy as np

from app.core.exceptions import DegenerateAlpha, NoConvergence, QuadratureBreakdown
from app.core.logging_config import get_logger
from app.schemas.config import IntegrationConfig
from app.schemas.params import SystemParams
from app.schemas.picard import GridFunctionPair, PicardComparison
from app.services import radial_ode
from app.utils.export import write_csv

logger = get_logger()

PICARD_COLUMNS = ("r", "u", "uprime", "v")

DEFAULT_NODES = 1024
DEFAULT_MAX_ITER = 200
DEFAULT_HALVINGS = 6


# ---------------------------------------------------------------------
# QUADRATURE
# ---------------------------------------------------------------------
def weighted_cumulative(t: np.ndarray, f: np.ndarray, power: float) -> np.ndarray:
    """Cumulative int_0^t_i s^power f(s) ds with f piecewise linear."""
    t0, t1 = t[:-1], t[1:]
    h = t1 - t0
    m0 = (t1 ** (power + 1) - t0 ** (power + 1)) / (power + 1)
    m1 = (t1 ** (power + 2) - t0 ** (power + 2)) / (power + 2)
    f0, f1 = f[:-1], f[1:]
    cells = f0 * m0 + (f1 - f0) * (m1 - t0 * m0) / h
    return np.concatenate([[0.0], np.cumsum(cells)])


def _reduced(t: np.ndarray, integral: np.ndarray, power: float) -> np.ndarray:
    """integral / t^power for t > 0; entry 0 is left for the caller."""
    out = np.empty_like(integral)
    out[1:] = integral[1:] / t[1:] ** power
    out[0] = np.nan
    return out


def _finite(name: str, values: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise QuadratureBreakdown(f"Non-finite {name} in the Picard quadrature")
    return values


# ---------------------------------------------------------------------
# OPERATOR
# ---------------------------------------------------------------------
def apply_T(pair: GridFunctionPair, params: SystemParams, a: float, b: float) -> GridFunctionPair:
    if params.alpha_degenerate:
        raise DegenerateAlpha(f"alpha < p-1 required (alpha={params.alpha}, p={params.p})")

    N, p, m, q, beta = params.N, params.p, params.m, params.q, params.beta
    k = params.k
    gamma = (N - 1) * k / (p - 1)
    cz = k / (p - 1)
    e = (1 + q / k) / (p - 1)

    data = pair.arrays()
    t, v, up = data["r"], data["v"], data["uprime"]

    # ---- T1: u' = t^(1/k) g1 ----
    vm = _finite("v^m", np.power(v, m))
    inner1 = weighted_cumulative(t, vm, gamma)
    g1 = _reduced(t, inner1, gamma + 1)
    g1[0] = vm[0] / (gamma + 1)
    g1 = np.power(cz * g1, 1.0 / k)
    u_new = a + weighted_cumulative(t, _finite("u' ratio", g1), 1.0 / k)
    up_new = np.power(t, 1.0 / k) * g1

    # ---- T2: v' = t^e g2, from the input u' ----
    ratio = np.empty_like(up)
    ratio[1:] = up[1:] / t[1:] ** (1.0 / k)
    ratio[0] = ratio[1]
    f2 = _finite("v^beta |u'|^q", np.power(v, beta) * np.power(ratio, q))
    inner2 = weighted_cumulative(t, f2, N - 1 + q / k)
    g2 = _reduced(t, inner2, N + q / k)
    g2[0] = f2[0] / (N + q / k)
    g2 = np.power(g2, 1.0 / (p - 1))
    v_new = b + weighted_cumulative(t, _finite("v' ratio", g2), e)
    vp_new = np.power(t, e) * g2

    _finite("T1", u_new)
    _finite("T2", v_new)
    return GridFunctionPair(
        rho=pair.rho,
        nodes=pair.nodes,
        u_vals=u_new.tolist(),
        v_vals=v_new.tolist(),
        u_prime_vals=up_new.tolist(),
        v_prime_vals=vp_new.tolist(),
        iterations=pair.iterations + 1,
    )


def _sup_change(old: GridFunctionPair, new: GridFunctionPair) -> float:
    before, after = old.arrays(), new.arrays()
    return float(max(np.max(np.abs(after[key] - before[key])) for key in ("u", "v", "uprime", "vprime")))


# ---------------------------------------------------------------------
# FIXED POINT
# ---------------------------------------------------------------------
def solve_fixed_point(
    params: SystemParams,
    a: float,
    b: float,
    rho: float = 0.1,
    tol: float = 1e-10,
    n_nodes: int = DEFAULT_NODES,
    max_iter: int = DEFAULT_MAX_ITER,
    max_halvings: int = DEFAULT_HALVINGS,
) -> GridFunctionPair:
    log = logger.bind(log_type="picard")

    for attempt in range(max_halvings + 1):
        pair = GridFunctionPair.constant(rho, n_nodes, a, b)
        change = np.inf
        try:
            while pair.iterations < max_iter:
                new = apply_T(pair, params, a, b)
                change = _sup_change(pair, new)
                pair = new
                if change < tol:
                    log.info(
                        f"Picard converged | rho={rho:.6g} | iterations={pair.iterations} | change={change:.3e}"
                    )
                    return pair
                if not np.isfinite(change):
                    break
        except QuadratureBreakdown as exc:
            log.warning(f"Picard quadrature breakdown at rho={rho:.6g}: {exc.detail}")

        if attempt < max_halvings:
            log.warning(f"Picard not converged at rho={rho:.6g} (change={change:.3e}); halving rho")
            rho /= 2

    raise NoConvergence(
        f"No fixed point after {max_iter} iterations at rho={rho:.6g} (tol={tol:g})"
    )


# ---------------------------------------------------------------------
# CROSS-CHECK AGAINST THE ODE
# ---------------------------------------------------------------------
def compare_with_ode(
    params: SystemParams,
    a: float,
    b: float,
    pair: GridFunctionPair,
    config: Optional[IntegrationConfig] = None,
    tol: float = 1e-5,
) -> PicardComparison:
    """Sup-norm distance between the Picard pair and the integrated solution on [r0, rho]."""
    cfg = (config or IntegrationConfig()).model_copy(update={"r_max": pair.rho})
    trajectory = radial_ode.integrate(params, a, b, cfg)

    data = pair.arrays()
    mask = data["r"] >= cfg.r0
    mask &= data["r"] <= trajectory.last.r
    ode = radial_ode.evaluate(trajectory, data["r"][mask])

    sup_u = float(np.max(np.abs(ode["u"] - data["u"][mask])))
    sup_v = float(np.max(np.abs(ode["v"] - data["v"][mask])))
    sup_up = float(np.max(np.abs(ode["uprime"] - data["uprime"][mask])))
    return PicardComparison(
        rho=pair.rho,
        n_nodes=len(pair.nodes),
        iterations=pair.iterations,
        n_compared=int(mask.sum()),
        sup_u=sup_u,
        sup_v=sup_v,
        sup_uprime=sup_up,
        tol=tol,
        agrees=max(sup_u, sup_v, sup_up) < tol,
    )


def write_pair_csv(pair: GridFunctionPair, path: Path) -> Path:
    data = pair.arrays()
    rows = zip(*(data[col] for col in PICARD_COLUMNS))
    return write_csv(path, PICARD_COLUMNS, rows)
