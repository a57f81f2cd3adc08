import numpy as np
import pytest
from hypothesis import settings

from orthoglide.params import MachineParams

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def params():
    return MachineParams()


@pytest.fixture
def geom(params):
    return params.geom


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
