import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from rbm_mlmc import build_symmetric


@pytest.fixture(scope="session")
def symmetric5():
    return build_symmetric(5, 0.8)


@pytest.fixture(scope="session")
def symmetric10():
    return build_symmetric(10, 0.8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240117)
