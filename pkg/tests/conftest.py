import numpy as np
import pytest

from covdecomp import chain_model, grid_model


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def chain():
    return chain_model((0.05, 0.04, 0.03), -0.01)


@pytest.fixture
def small_grid():
    return grid_model(3, 7)
