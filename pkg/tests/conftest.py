import functools

import numpy as np
import pytest

from fracrd.basis import BasisSpec
from fracrd.solver import Discretization


@functools.lru_cache(maxsize=None)
def disc(N, d=1):
    """Shared discretisations; building E for N ~ 500 is not free."""
    return Discretization(BasisSpec(N, d))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
