import numpy as np
import pytest

from nematic_walls.model import GridSpec, ModelConfig, ToleranceSet


@pytest.fixture
def coarse():
    """epsilon = 0.1 on an 81-node grid; every solve finishes in about a second."""
    def make(a=0.0, **kw):
        return ModelConfig(epsilon=0.1, a=a, grid=GridSpec(2.0, 81, 81), tolerances=ToleranceSet(dt=1.0), **kw)
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
