import numpy as np
import pytest

from polardec import build_code


@pytest.fixture(scope="session")
def code3():
    """n=3 decreasing code from generator 3: info set {3,5,6,7}, K=4."""
    return build_code(3, [3])


@pytest.fixture(scope="session")
def p128():
    """The N=128, K=60 code defined by the single generator 27."""
    return build_code(7, [27])


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
