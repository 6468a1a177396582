import argparse

SUBCOMMANDS = ("classify", "solve", "flow", "asymptotics", "picard", "single-eq", "sweep", "figure1")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)

    params = common.add_argument_group("exponents")
    params.add_argument("--N", type=float, help="space dimension (integer >= 2)")
    params.add_argument("--p", type=float)
    params.add_argument("--m", type=float)
    params.add_argument("--q", type=float)
    params.add_argument("--alpha", type=float)
    params.add_argument("--beta", type=float)

    data = common.add_argument_group("initial data")
    data.add_argument("--a", type=float, help="u(0)")
    data.add_argument("--b", type=float, help="v(0)")

    solver = common.add_argument_group("solver")
    solver.add_argument("--r0", type=float, help="seeding radius")
    solver.add_argument("--rmax", type=float)
    solver.add_argument("--rtol", type=float)
    solver.add_argument("--atol", type=float)
    solver.add_argument("--cap", type=float, help="blow-up indicator cap")
    solver.add_argument("--monitor-policy", dest="monitor_policy", choices=("raise", "stop", "continue"))
    solver.add_argument("--samples-per-decade", dest="samples_per_decade", type=int)

    output = common.add_argument_group("output")
    output.add_argument("--out", help="output directory")
    output.add_argument("--seed", type=int)
    output.add_argument("--workers", type=int)
    output.add_argument("--config", help="key=value file with [params] [initial] [solver] [output] [sweep]")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="radial",
        description="Radial solutions of a quasilinear p-Laplacian system with gradient terms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("classify", parents=[common], help="print the regime of the exponents as JSON")
    sub.add_parser("solve", parents=[common], help="integrate one radial solution")

    flow = sub.add_parser("flow", parents=[common], help="flow coordinates, equilibrium and stability")
    flow.add_argument("--r-window", dest="r_window", type=float, nargs=2, metavar=("R_LO", "R_HI"))

    asym = sub.add_parser("asymptotics", parents=[common], help="growth constants of a global solution")
    asym.add_argument("--dims", type=str, help="comma list of N values for the dimension report")

    picard = sub.add_parser("picard", parents=[common], help="fixed-point construction near the origin")
    picard.add_argument("--rho", type=float, default=0.1)
    picard.add_argument("--tol", type=float, default=1e-10)
    picard.add_argument("--nodes", type=int, default=1024)

    sub.add_parser("single-eq", parents=[common], help="the scalar equation through alpha=q, beta=m, a=b")

    sweep = sub.add_parser("sweep", parents=[common], help="one summary row per grid point")
    sweep.add_argument("--grid", action="append", metavar="KEY=VALUES",
                       help="'2,3,4' or 'start:stop:num'; repeat per parameter")
    sweep.add_argument("--random-points", dest="random_points", type=int,
                       help="additional random valid tuples drawn with --seed")
    sweep.add_argument("--no-solve", dest="no_solve", action="store_true",
                       help="closed forms only, no integration")

    sub.add_parser("figure1", parents=[common], help="growth curves for N = 3, 10, 30, 60")
    return parser
