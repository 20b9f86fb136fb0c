import math

import numpy as np
import pytest

from sbenflow.fields import Grid2P

TWO_PI = 2.0 * math.pi


@pytest.fixture
def grid32():
    return Grid2P(32, 32, TWO_PI, TWO_PI)


@pytest.fixture
def grid16():
    return Grid2P(16, 16, TWO_PI, TWO_PI)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


def observed_order(errors, factor=2.0):
    """Least-order estimate over successive refinements by `factor`."""
    orders = [math.log(errors[i] / errors[i + 1]) / math.log(factor)
              for i in range(len(errors) - 1)]
    return min(orders)
