import numpy as np
import pytest

from randbilliards import BaseAngle


@pytest.fixture
def alpha7():
    return BaseAngle.rational(1, 7)


@pytest.fixture
def alpha9():
    return BaseAngle.rational(1, 9)


@pytest.fixture
def alpha_irr():
    return BaseAngle.real(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
