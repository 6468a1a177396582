import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from app.core.exceptions import DegenerateAlpha, NoConvergence
from app.schemas.picard import GridFunctionPair
from app.services import params_core, picard
from tests.strategies import initial_data


def test_weighted_quadrature_is_exact_for_linear_data():
    t = np.linspace(0.0, 1.0, 11)
    f = 2.0 + 3.0 * t
    power = 0.7
    exact = 2.0 * t ** (power + 1) / (power + 1) + 3.0 * t ** (power + 2) / (power + 2)
    assert np.allclose(picard.weighted_cumulative(t, f, power), exact, rtol=1e-13, atol=1e-15)


def test_constant_input_matches_closed_form(figure1_params):
    p, k = figure1_params.p, figure1_params.k
    gamma = (figure1_params.N - 1) * k / (p - 1)
    kappa = (k / ((p - 1) * (gamma + 1))) ** (1 / k) * k / (k + 1)

    pair = GridFunctionPair.constant(0.1, 1024, 1.0, 1.0)
    image = picard.apply_T(pair, figure1_params, 1.0, 1.0)

    assert kappa == pytest.approx(0.77089, abs=1e-5)
    assert image.u_vals[-1] == pytest.approx(1 + kappa * 0.1 ** (9 / 8), rel=1e-12)
    assert image.u_vals[-1] == pytest.approx(1.05781, abs=1e-5)
    assert image.u_prime_vals[0] == 0
    # v is untouched while u' = 0
    assert image.v_vals == pytest.approx([1.0] * 1024)


def test_operator_is_monotone_in_v(figure1_params):
    rng = np.random.default_rng(7)
    base = GridFunctionPair.constant(0.1, 256, 1.0, 1.0)
    nodes = np.asarray(base.nodes)
    low = 1.0 + np.cumsum(rng.random(256)) * 1e-3
    high = low + rng.random(256) * 0.1

    def pair(v):
        return base.model_copy(update={"v_vals": v.tolist()})

    lower = picard.apply_T(pair(low), figure1_params, 1.0, 1.0)
    upper = picard.apply_T(pair(high), figure1_params, 1.0, 1.0)
    assert np.all(np.asarray(lower.u_vals)[1:] < np.asarray(upper.u_vals)[1:])
    assert nodes[0] == 0


def test_iterates_increase_from_constant_pair(figure1_params):
    pair = GridFunctionPair.constant(0.1, 512, 1.0, 1.0)
    for _ in range(5):
        new = picard.apply_T(pair, figure1_params, 1.0, 1.0)
        for key in ("u", "v", "uprime"):
            assert np.all(new.arrays()[key] >= pair.arrays()[key] - 1e-15)
        pair = new


def test_fixed_point_figure1(figure1_params):
    pair = picard.solve_fixed_point(figure1_params, 1.0, 1.0, rho=0.1)
    data = pair.arrays()

    assert pair.rho == 0.1
    assert np.all(np.diff(data["u"]) >= 0)
    assert np.all(np.diff(data["v"]) >= 0)
    assert data["uprime"][0] == 0

    again = picard.apply_T(pair, figure1_params, 1.0, 1.0)
    assert picard._sup_change(pair, again) < 1e-9

    comparison = picard.compare_with_ode(figure1_params, 1.0, 1.0, pair, tol=1e-6)
    assert comparison.agrees
    assert comparison.n_compared > 1000


def test_fixed_point_prototype(prototype_params):
    pair = picard.solve_fixed_point(prototype_params, 1.0, 1.0, rho=0.05)
    assert pair.iterations < picard.DEFAULT_MAX_ITER


def test_looser_tolerance_needs_fewer_iterations(figure1_params):
    loose = picard.solve_fixed_point(figure1_params, 1.0, 1.0, tol=1e-3)
    tight = picard.solve_fixed_point(figure1_params, 1.0, 1.0, tol=1e-10)
    assert loose.iterations < tight.iterations


def test_no_convergence_after_halvings(figure1_params):
    with pytest.raises(NoConvergence):
        picard.solve_fixed_point(figure1_params, 1.0, 1.0, tol=0.0, max_iter=3, max_halvings=2)


def test_degenerate_alpha_rejected():
    params = params_core.validate({"N": 3, "p": 2, "m": 1, "q": 1, "alpha": 1, "beta": 0})
    with pytest.raises(DegenerateAlpha):
        picard.apply_T(GridFunctionPair.constant(0.1, 16, 1.0, 1.0), params, 1.0, 1.0)


def test_pair_values_stay_above_center_values():
    nodes = [0.0, 0.05, 0.1]
    with pytest.raises(ValidationError, match="u_vals >= a"):
        GridFunctionPair(
            rho=0.1, nodes=nodes, u_vals=[1.0, 0.9, 1.1], v_vals=[1.0, 1.0, 1.0], u_prime_vals=[0.0, 0.1, 0.2]
        )
    with pytest.raises(ValidationError, match="positive center values"):
        GridFunctionPair(
            rho=0.1, nodes=nodes, u_vals=[1.0, 1.0, 1.0], v_vals=[0.0, 0.1, 0.2], u_prime_vals=[0.0, 0.0, 0.0]
        )
    with pytest.raises(ValidationError, match="nonnegative"):
        GridFunctionPair(
            rho=0.1, nodes=nodes, u_vals=[1.0, 1.0, 1.0], v_vals=[1.0, 1.0, 1.0], u_prime_vals=[0.0, -0.1, 0.0]
        )


def test_pair_csv(figure1_params, tmp_path):
    pair = picard.solve_fixed_point(figure1_params, 1.0, 1.0, n_nodes=64)
    lines = picard.write_pair_csv(pair, tmp_path / "picard.csv").read_text().splitlines()
    assert lines[0] == "r,u,uprime,v"
    assert len(lines) == 65


@st.composite
def local_params(draw):
    p = draw(st.floats(1.5, 4.0))
    m = draw(st.floats(0.3, 2.0))
    q = draw(st.floats(0.3, 2.0))
    alpha = (p - 1) * draw(st.floats(0.0, 0.6))
    beta = min(m, p - 1) * draw(st.floats(0.0, 0.9))
    delta = (p - 1 - alpha) * (p - 1 - beta) - q * m
    # keep clear of the degenerate band
    assume(abs(delta) > 1e-3)
    return params_core.validate({"N": draw(st.integers(2, 6)), "p": p, "m": m, "q": q, "alpha": alpha, "beta": beta})


@pytest.mark.slow
@settings(max_examples=20, deadline=None, suppress_health_check=[HealthCheck.filter_too_much])
@given(local_params(), initial_data())
def test_fixed_point_agrees_with_integrator(params, data):
    a, b = data
    pair = picard.solve_fixed_point(params, a, b, rho=0.1)
    comparison = picard.compare_with_ode(params, a, b, pair, tol=1e-5)
    assert comparison.agrees, comparison
