import numpy as np
import pytest

from ahmass.metrics import hyperbolic_metric, schwarzschild_ads
from ahmass.quadrature import sphere_rule


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240801)


@pytest.fixture(scope="session")
def hyp3():
    return hyperbolic_metric(3)


@pytest.fixture(scope="session")
def schw3():
    return schwarzschild_ads(3, 0.5)


@pytest.fixture(scope="session")
def quad48():
    return sphere_rule(3, 48, 96)


@pytest.fixture(scope="session")
def quad16():
    return sphere_rule(3, 16, 32)
