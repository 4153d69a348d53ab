import numpy as np
import pytest

from matym import DerivationCalculus


@pytest.fixture(scope="session")
def calc():
    return DerivationCalculus(2)


@pytest.fixture(scope="session")
def calc3():
    return DerivationCalculus(3)


@pytest.fixture(scope="session")
def xcalc():
    return DerivationCalculus(2, exact=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
