"""Shared fixtures: the example instance and fast simulation settings."""

import pytest

from utils.model import Parameters
from utils.simulation import SimConfig
from utils.value_functions import ValueContext

EXAMPLE = dict(mu=1.0 / 3.0, p=0.5, c0=2.0 / 3.0, c1=1.0, c2=1.5)


@pytest.fixture(scope="session")
def example_params() -> Parameters:
    return Parameters(**EXAMPLE)


@pytest.fixture(scope="session")
def example_ctx(example_params) -> ValueContext:
    return ValueContext.from_params(example_params)


@pytest.fixture
def fast_cfg(example_params) -> SimConfig:
    """Coarse grid and an early stop; the tail correction removes the truncation bias."""
    return SimConfig.for_instance(example_params, dt=2e-3, m_stop=0.99, seed=12345)
