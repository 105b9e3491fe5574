import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fisher_pinn import Architecture, Domain, PdeParams

settings.register_profile(
    "default", deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def p():
    return PdeParams()


@pytest.fixture
def dom():
    return Domain()


@pytest.fixture
def small_arch():
    return Architecture(hidden_layers=2, hidden_width=8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
