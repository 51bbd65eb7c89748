import numpy as np
import pytest

from interceptsim.dynamics import VehicleParams
from interceptsim.game import GameParams


@pytest.fixture
def vp():
    return VehicleParams()


@pytest.fixture
def gp(vp):
    return GameParams.from_vehicle(vp)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
