import pytest

from app.schemas.config import IntegrationConfig
from app.services import params_core


@pytest.fixture
def figure1_params():
    return params_core.validate({"N": 3, "p": 10, "m": 2, "q": 4, "alpha": 1, "beta": 1})


@pytest.fixture
def prototype_params():
    """Δu = v, Δv = |∇u|² in three dimensions."""
    return params_core.validate({"N": 3, "p": 2, "m": 1, "q": 2, "alpha": 0, "beta": 0})


@pytest.fixture
def single_eq_params():
    return params_core.validate({"N": 3, "p": 3, "m": 0.5, "q": 1, "alpha": 1, "beta": 0.5})


@pytest.fixture
def short_run():
    return IntegrationConfig(r_max=100.0)
