import numpy as np
import pytest

from demand import LinearDemand, TabulatedDemand
from feegame import Market
from payoff import GameParams

# Running example
C_R = 0.6
C_S = 0.4


@pytest.fixture
def linear():
    return LinearDemand()


@pytest.fixture
def quadratic():
    """q(p) = 1 - p**2 sampled on 41 points."""
    p = np.linspace(0.0, 1.0, 41)
    return TabulatedDemand(list(zip(p, 1.0 - p ** 2)))


@pytest.fixture
def market():
    return Market(C_R, C_S)


@pytest.fixture
def params_at():
    """GameParams for the running example at a given fee."""
    def build(alpha, beta=0.5, c_r=C_R, c_s=C_S, curve=None):
        return GameParams(c_r, c_s, alpha, beta, curve)
    return build
