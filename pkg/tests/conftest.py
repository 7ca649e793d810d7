import numpy as np
import pytest

from adaptcut import MaxCutInstance, generate_instance


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def triangle():
    """Three vertices, all unit weights.  Max cut = 2, ground energy = -1/2."""
    w = np.ones((3, 3)) - np.eye(3)
    return MaxCutInstance(3, w)


@pytest.fixture
def single_edge():
    w = np.zeros((2, 2))
    w[0, 1] = w[1, 0] = 0.7
    return MaxCutInstance(2, w)


@pytest.fixture
def inst6():
    return generate_instance(6, seed=3)


@pytest.fixture
def inst4():
    return generate_instance(4, seed=11)
