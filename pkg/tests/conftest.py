import math

import numpy as np
import pytest

import relaycast as rc


def h2(p: float) -> float:
    """Binary entropy in bits; independent oracle used across the suite."""
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def conv(a: float, b: float) -> float:
    """Binary convolution of flip probabilities."""
    return a * (1 - b) + (1 - a) * b


@pytest.fixture(scope="session")
def net_a():
    return rc.bundled_network("net-a")


@pytest.fixture(scope="session")
def net_a_noiseless():
    return rc.bundled_network("net-a-noiseless")


@pytest.fixture(scope="session")
def net_b():
    return rc.bundled_network("net-b")


@pytest.fixture(scope="session")
def net_c():
    return rc.bundled_network("net-c")


@pytest.fixture(scope="session")
def net_bc2():
    return rc.bundled_network("net-bc2")


@pytest.fixture(scope="session")
def net_d():
    return rc.bundled_network("net-d")


@pytest.fixture(scope="session")
def net_h():
    return rc.bundled_network("net-h")


def random_joint(rng: np.random.Generator, variables, sizes,
                 positive: bool = False) -> rc.JointPmf:
    return rc.random_pmf(variables, sizes, rng, positive=positive)
