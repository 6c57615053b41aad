import numpy as np
import pytest

from lppolar import bodies as bd


@pytest.fixture(scope="session")
def square():
    return bd.vpolytope([[-1, -1], [1, -1], [1, 1], [-1, 1]])


@pytest.fixture(scope="session")
def paper_triangle():
    # the running example: apex above a horizontal base
    return bd.vpolytope([[-1, 1], [2, 1], [0, 2]])


@pytest.fixture(scope="session")
def unit_disk():
    return bd.ball([0.0, 0.0], 1.0)


@pytest.fixture(scope="session")
def kite():
    # symmetric with respect to the x-axis (u = e2) only
    return bd.vpolytope([[-1.0, 0.0], [0.0, 1.0], [2.0, 0.0], [0.0, -1.0]])


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
