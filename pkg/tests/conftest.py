import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from gcrlab.grid import build_grid  # noqa: E402

TWO_PI = 2.0 * np.pi


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def torus_grid():
    def make(n=16, d=3):
        return build_grid(d, TWO_PI, n)

    return make
