import pytest

from gfcalc import conv, kernels
from gfcalc.algebra import atomic_pair
from gfcalc.utils import DEFAULT_STEP, DEFAULT_T


@pytest.fixture(scope="session")
def default_grid():
    return conv.Grid(DEFAULT_T, DEFAULT_STEP)


@pytest.fixture(scope="session")
def coarse_grid():
    return conv.Grid(2.0, 1.0 / 128)


@pytest.fixture
def power_pair():
    def make(alpha=0.5):
        return atomic_pair(*kernels.sonine_pair_power(alpha), label=f"power({alpha})")
    return make


@pytest.fixture
def tempered_pair():
    def make(alpha=0.3, lam=1.0):
        return atomic_pair(*kernels.sonine_pair_tempered(alpha, lam))
    return make
