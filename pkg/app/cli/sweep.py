import itertools
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from pathlib import Path
from typing import Dict, List, Mapping

import numpy as np

from app.core.exceptions import RadialSystemError
from app.core.logging_config import get_logger
from app.models.enums import RegimeTag
from app.schemas.config import IntegrationConfig, RunConfig
from app.schemas.report import SweepRow
from app.services import flow3d, params_core, radial_ode
from app.utils.export import write_csv

logger = get_logger()

SWEEP_COLUMNS = ("N", "p", "m", "q", "alpha", "beta", "delta", "sigma", "regime", "R_est", "A_pred", "B_pred")

BLOWUP_TAGS = (RegimeTag.U_FINITE_V_BLOWUP, RegimeTag.BOTH_BLOWUP)


# ---------------------------------------------------------------------
# GRID
# ---------------------------------------------------------------------
def random_points(n: int, seed: int) -> List[Dict[str, float]]:
    """Tuples inside the standing hypotheses apart from delta != 0."""
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(n):
        p = rng.uniform(1.2, 5.0)
        m = rng.uniform(0.1, 4.0)
        points.append({
            "N": int(rng.integers(2, 11)),
            "p": p,
            "m": m,
            "q": rng.uniform(0.1, 4.0),
            "alpha": rng.uniform(0.0, p - 1),
            "beta": rng.uniform(0.0, min(m, p - 1)),
        })
    return points


def grid_points(base: Mapping[str, float], grid: Mapping[str, List[float]]) -> List[Dict[str, float]]:
    keys = [key for key in params_core.PARAM_KEYS if key in grid]
    points = []
    for combo in itertools.product(*(grid[key] for key in keys)):
        point = {key: base.get(key) for key in params_core.PARAM_KEYS}
        point.update(zip(keys, combo))
        points.append(point)
    return points


# ---------------------------------------------------------------------
# ROWS
# ---------------------------------------------------------------------
def sweep_row(point: Mapping[str, float], config: IntegrationConfig, a: float, b: float, solve: bool) -> SweepRow:
    row = {key: float(point[key]) for key in params_core.PARAM_KEYS}
    try:
        params = params_core.validate(point)
        derived = params_core.derive(params)
    except RadialSystemError as exc:
        return SweepRow(**row, regime=type(exc).__name__)

    row.update(delta=derived.delta, sigma=derived.sigma, regime=derived.regime.value)
    try:
        if derived.regime == RegimeTag.ALL_BOUNDED_GLOBAL:
            eq = flow3d.equilibrium(params)
            row.update(A_pred=eq.A, B_pred=eq.B)
        elif solve and derived.regime in BLOWUP_TAGS:
            row["R_est"] = radial_ode.integrate(params, a, b, config).R_est
    except RadialSystemError as exc:
        logger.bind(log_type="sweep").warning(f"Sweep point failed | {row} | {type(exc).__name__}: {exc.detail}")
    return SweepRow(**row)


def run_sweep(config: RunConfig, base: Mapping[str, float]) -> List[SweepRow]:
    points = grid_points(base, config.sweep.grid) if config.sweep.grid else []
    points += random_points(config.sweep.random_points, config.seed)
    if not points:
        points = [dict(config.params.model_dump())]

    worker = partial(
        sweep_row,
        config=config.integration,
        a=config.a,
        b=config.b,
        solve=config.sweep.solve,
    )
    logger.bind(log_type="sweep").info(f"Sweep started | points={len(points)} | workers={config.workers}")
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(worker, points))
    else:
        rows = [worker(point) for point in points]
    logger.bind(log_type="sweep").info(f"Sweep finished | rows={len(rows)}")
    return rows


def write_sweep_csv(rows: List[SweepRow], path: Path) -> Path:
    return write_csv(path, SWEEP_COLUMNS, ([getattr(row, col) for col in SWEEP_COLUMNS] for row in rows))
