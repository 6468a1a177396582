"""One handler per subcommand; each returns the Artifacts it wrote."""
import argparse
from typing import Callable, Dict

import numpy as np

from app.cli import sweep as sweep_runner
from app.core.config import FIGURE1_PARAMS, build_run_config, parse_values
from app.core.exceptions import InsufficientSamples, RegimeMismatch
from app.core.logging_config import get_logger
from app.models.enums import StopReason
from app.schemas.config import Artifacts, RunConfig
from app.schemas.flow import FlowReport
from app.schemas.trajectory import SolveReport
from app.services import asymptotics, flow3d, params_core, picard, radial_ode
from app.utils.export import write_csv, write_json
from app.utils.plotting import plot_growth_curves

logger = get_logger()

FIGURE1_DIMS = (3, 10, 30, 60)
FIGURE1_GRID = np.linspace(0.0, 500.0, 501)
GROWTH_BASE = {"rmax": 1e6}


def _config(args: argparse.Namespace, base=None, make_params=None) -> RunConfig:
    return build_run_config(vars(args), base=base, make_params=make_params)


# ---------------------------------------------------------------------
# CLASSIFY
# ---------------------------------------------------------------------
def classify(args: argparse.Namespace) -> Artifacts:
    cfg = _config(args)
    regime = params_core.classify(cfg.params)
    print(regime.model_dump_json())
    return Artifacts(summary=regime.model_dump(mode="json"))


# ---------------------------------------------------------------------
# SOLVE
# ---------------------------------------------------------------------
def solve(args: argparse.Namespace) -> Artifacts:
    cfg = _config(args)
    out = cfg.ensure_out()
    trajectory = radial_ode.integrate(cfg.params, cfg.a, cfg.b, cfg.integration)

    blowup = None
    if trajectory.stop == StopReason.BLOW_UP:
        try:
            blowup = radial_ode.estimate_blowup(trajectory, params_core.derive(cfg.params))
        except (InsufficientSamples, RegimeMismatch) as exc:
            logger.bind(log_type="solver").warning(f"No blow-up fit | {exc.detail}")

    report = SolveReport(
        params=cfg.params,
        initial=cfg.initial,
        regime=params_core.classify(cfg.params).tag.value,
        stop=trajectory.stop,
        r_end=trajectory.last.r,
        R_est=trajectory.R_est,
        n_steps=trajectory.n_steps,
        n_samples=len(trajectory.samples),
        monitors=trajectory.monitors,
        blowup=blowup,
    )
    files = [
        radial_ode.write_trajectory_csv(trajectory, out / "trajectory.csv"),
        write_json(out / "solve.json", report),
    ]
    return Artifacts(files=files, summary={"stop": trajectory.stop.value, "R_est": trajectory.R_est})


# ---------------------------------------------------------------------
# FLOW
# ---------------------------------------------------------------------
def flow(args: argparse.Namespace) -> Artifacts:
    cfg = _config(args)
    out = cfg.ensure_out()
    params = cfg.params
    trajectory = radial_ode.integrate(params, cfg.a, cfg.b, cfg.integration)

    r_window = tuple(args.r_window) if args.r_window else (trajectory.samples[0].r, trajectory.last.r)
    coords = flow3d.extract_flow_coordinates(trajectory, r_window=r_window)
    data = coords.arrays()
    box = [(float(np.min(data[key])), float(np.max(data[key]))) for key in ("Y", "Z", "W")]

    equilibrium = stability = None
    if params.delta > 0:
        equilibrium = flow3d.equilibrium(params)
        stability = flow3d.stability(params)

    report = FlowReport(
        delta=params.delta,
        residual=coords.residual,
        r_window=r_window,
        equilibrium=equilibrium,
        stability=stability,
        structure=flow3d.structure_checks(params, box, seed=cfg.seed),
    )
    files = [
        flow3d.write_flow_csv(coords, out / "flow.csv"),
        write_json(out / "flow.json", report),
    ]
    return Artifacts(files=files, summary={"residual": coords.residual, "stop": trajectory.stop.value})


# ---------------------------------------------------------------------
# ASYMPTOTICS
# ---------------------------------------------------------------------
def growth(args: argparse.Namespace) -> Artifacts:
    cfg = _config(args, base=GROWTH_BASE)
    out = cfg.ensure_out()

    if args.dims:
        dims = [int(N) for N in parse_values(args.dims)]
        report = asymptotics.dimension_report(cfg.params, dims, cfg.a, cfg.b, cfg.integration)
        path = write_json(out / "asymptotics_dims.json", report)
        return Artifacts(files=[path], summary={"decreasing_in_N": report.decreasing})

    trajectory = radial_ode.integrate(cfg.params, cfg.a, cfg.b, cfg.integration)
    report = asymptotics.verify_growth(trajectory, flow3d.equilibrium(cfg.params))
    path = write_json(out / "asymptotics.json", report)
    return Artifacts(files=[path], summary={"rel_err_A": report.rel_err_A, "rel_err_B": report.rel_err_B})


# ---------------------------------------------------------------------
# PICARD
# ---------------------------------------------------------------------
def fixed_point(args: argparse.Namespace) -> Artifacts:
    cfg = _config(args)
    out = cfg.ensure_out()
    pair = picard.solve_fixed_point(cfg.params, cfg.a, cfg.b, rho=args.rho, tol=args.tol, n_nodes=args.nodes)
    comparison = picard.compare_with_ode(cfg.params, cfg.a, cfg.b, pair, cfg.integration)
    files = [
        picard.write_pair_csv(pair, out / "picard.csv"),
        write_json(out / "picard.json", comparison),
    ]
    return Artifacts(files=files, summary={"agrees": comparison.agrees, "iterations": pair.iterations})


# ---------------------------------------------------------------------
# SINGLE EQUATION
# ---------------------------------------------------------------------
def _single_equation_params(merged: dict):
    return asymptotics.single_equation_params(
        int(merged.get("N", 0)), merged.get("p", 0.0), merged.get("m", 0.0), merged.get("q", 0.0)
    )


def single_equation(args: argparse.Namespace) -> Artifacts:
    cfg = _config(args, base=GROWTH_BASE, make_params=_single_equation_params)
    out = cfg.ensure_out()
    params = cfg.params
    trajectory, report = asymptotics.single_equation_mode(
        params.N, params.p, params.m, params.q, cfg.a, cfg.integration
    )
    files = [
        radial_ode.write_trajectory_csv(trajectory, out / "single_eq.csv"),
        write_json(out / "single_eq.json", report),
    ]
    return Artifacts(files=files, summary={"exponent": report.exponent, "C_pred": report.C_pred})


# ---------------------------------------------------------------------
# SWEEP
# ---------------------------------------------------------------------
def sweep(args: argparse.Namespace) -> Artifacts:
    cfg = _config(args, base=FIGURE1_PARAMS)
    if args.no_solve:
        cfg = cfg.model_copy(update={"sweep": cfg.sweep.model_copy(update={"solve": False})})
    out = cfg.ensure_out()
    rows = sweep_runner.run_sweep(cfg, cfg.params.model_dump())
    path = sweep_runner.write_sweep_csv(rows, out / "sweep.csv")
    return Artifacts(files=[path], summary={"rows": len(rows)})


# ---------------------------------------------------------------------
# FIGURE 1
# ---------------------------------------------------------------------
def figure1(args: argparse.Namespace) -> Artifacts:
    cfg = _config(args, base={**FIGURE1_PARAMS, "rmax": 500.0})
    out = cfg.ensure_out()
    r = FIGURE1_GRID

    curves: Dict[int, Dict[str, np.ndarray]] = {}
    for N in FIGURE1_DIMS:
        trajectory = radial_ode.integrate(cfg.params.with_updates(N=N), cfg.a, cfg.b, cfg.integration)
        if trajectory.stop != StopReason.REACHED_R_MAX:
            raise RegimeMismatch(f"N={N}: stopped with {trajectory.stop.value} before r={r[-1]:g}")
        values = radial_ode.evaluate(trajectory, r[1:])
        values["u"][-1], values["v"][-1] = trajectory.last.u, trajectory.last.v
        curves[N] = {
            "u": np.concatenate([[cfg.a], values["u"]]),
            "v": np.concatenate([[cfg.b], values["v"]]),
        }

    columns = ["r"] + [f"{name}_N{N}" for N in FIGURE1_DIMS for name in ("u", "v")]
    rows = zip(r, *(curves[N][name] for N in FIGURE1_DIMS for name in ("u", "v")))
    at_end = {f"N{N}": {"u": float(curves[N]["u"][-1]), "v": float(curves[N]["v"][-1])} for N in FIGURE1_DIMS}
    ends = [curves[N]["u"][-1] for N in FIGURE1_DIMS]

    files = [
        write_csv(out / "figure1.csv", columns, rows),
        plot_growth_curves(r, curves, out / "figure1.svg"),
        write_json(out / "figure1.json", {"at_r_max": at_end}),
    ]
    return Artifacts(files=files, summary={"decreasing_in_N": bool(np.all(np.diff(ends) < 0))})


COMMANDS: Dict[str, Callable[[argparse.Namespace], Artifacts]] = {
    "classify": classify,
    "solve": solve,
    "flow": flow,
    "asymptotics": growth,
    "picard": fixed_point,
    "single-eq": single_equation,
    "sweep": sweep,
    "figure1": figure1,
}
