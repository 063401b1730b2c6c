import numpy as np
import pytest

from rosvm import _accel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    prev = _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(prev)
