import numpy as np
import pytest
import sympy

from app.core.exceptions import DeltaZero, EmbeddingMismatch, NoSolutionRegime, RegimeMismatch
from app.schemas.config import IntegrationConfig
from app.services import asymptotics, flow3d, params_core, radial_ode

LONG_RUN = IntegrationConfig(r_max=1e6)


@pytest.fixture(scope="module")
def figure1_run():
    params = params_core.validate({"N": 3, "p": 10, "m": 2, "q": 4, "alpha": 1, "beta": 1})
    return radial_ode.integrate(params, 1.0, 1.0, LONG_RUN)


# ---------------------------------------------------------------------
# GROWTH CONSTANTS
# ---------------------------------------------------------------------
def test_growth_constants_figure1(figure1_run):
    eq = flow3d.equilibrium(figure1_run.params)
    report = asymptotics.verify_growth(figure1_run, eq)

    assert report.nu_u == pytest.approx(1.5)
    assert report.nu_v == pytest.approx(1.5)
    assert report.rel_err_A < 0.01
    assert report.rel_err_B < 0.01
    assert report.r_window == (pytest.approx(1e5), pytest.approx(1e6))


def test_growth_constants_invariant_under_scaling(figure1_run):
    eq = flow3d.equilibrium(figure1_run.params)
    scaled = radial_ode.scale_solution(figure1_run, 2.0)
    original = asymptotics.verify_growth(figure1_run, eq)
    rescaled = asymptotics.verify_growth(scaled, eq)
    assert rescaled.A_fit == pytest.approx(original.A_fit, rel=1e-12)
    assert rescaled.B_fit == pytest.approx(original.B_fit, rel=1e-12)


def test_growth_error_shrinks_with_radius(figure1_run):
    eq = flow3d.equilibrium(figure1_run.params)
    errors = asymptotics.growth_windows(figure1_run, eq, [1e2, 1e3, 1e4, 1e5])
    assert all(later <= earlier for earlier, later in zip(errors, errors[1:]))


def test_growth_needs_a_global_solution(prototype_params):
    trajectory = radial_ode.integrate(prototype_params, 1.0, 1.0, IntegrationConfig(r_max=1e4))
    with pytest.raises(RegimeMismatch):
        asymptotics.verify_growth(trajectory, None)


@pytest.mark.slow
def test_growth_constant_decreases_with_dimension(figure1_params):
    report = asymptotics.dimension_report(figure1_params, [3, 10, 30, 60], config=LONG_RUN)
    assert [row.N for row in report.rows] == [3, 10, 30, 60]
    assert report.decreasing
    for row in report.rows:
        assert row.A_fit == pytest.approx(row.A_pred, rel=0.01)


# ---------------------------------------------------------------------
# SINGLE EQUATION
# ---------------------------------------------------------------------
def test_single_equation_embedding():
    trajectory, report = asymptotics.single_equation_mode(3, 3, 0.5, 1, config=LONG_RUN)
    assert report.exponent == pytest.approx(4)
    assert report.growth.nu_u == pytest.approx(4)
    assert report.C_pred == pytest.approx(1 / 1024, rel=1e-12)
    assert report.rel_err_C < 0.01
    assert report.max_uv_mismatch < 1e-8
    assert trajectory.params.alpha == 1 and trajectory.params.beta == 0.5


def test_single_equation_drift_is_an_error(monkeypatch):
    monkeypatch.setattr(asymptotics, "EMBEDDING_TOL", 0.0)
    with pytest.raises(EmbeddingMismatch) as info:
        asymptotics.single_equation_mode(3, 3, 0.5, 1, config=IntegrationConfig(r_max=10.0))
    assert info.value.exit_code == 3


@pytest.mark.parametrize(
    "args, error",
    [
        ((3, 3, 0.5, 2.5), NoSolutionRegime),
        ((3, 3, 1.5, 1), NoSolutionRegime),
        ((3, 3, 1, 1), DeltaZero),
    ],
)
def test_single_equation_rejects_non_global_exponents(args, error):
    with pytest.raises(error):
        asymptotics.single_equation_params(*args)


def test_single_equation_exponents_symbolically():
    p, m, q = sympy.symbols("p m q", positive=True)
    k = p - 1 - q
    delta = k * (p - 1 - m) - q * m
    nu_u = 1 + (p * (m + 1) - 1 - m) / delta
    nu_v = (p * k + q) / delta
    exponent = (p - q) / (p - 1 - m - q)

    assert sympy.simplify(delta - (p - 1) * (p - 1 - m - q)) == 0
    assert sympy.simplify(nu_u - exponent) == 0
    assert sympy.simplify(nu_v - exponent) == 0


def test_single_equation_constant_matches_system(single_eq_params):
    params = asymptotics.single_equation_params(3, 3, 0.5, 1)
    assert params == single_eq_params
    eq = flow3d.equilibrium(params)
    assert eq.A == pytest.approx(eq.B, rel=1e-12)
    assert np.isclose(params_core.derive(params).nu_u, params_core.derive(params).nu_v)
