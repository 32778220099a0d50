import numpy as np
import pytest

from robustcvar import TailSpec, synthetic_returns


@pytest.fixture
def tail05():
    return TailSpec(0.05)


@pytest.fixture
def tail20():
    return TailSpec(0.2)


@pytest.fixture
def small_returns():
    """300 days of 3 correlated assets; shared across solver tests."""
    return synthetic_returns(300, 3, seed=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
