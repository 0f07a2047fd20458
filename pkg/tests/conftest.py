import numpy as np
import pytest

from recurkit import random_spectrum, validate_spectrum


@pytest.fixture
def two_level():
    return validate_spectrum([0.0, 1.0], [0.5, 0.5])


@pytest.fixture
def spectrum_d8():
    return random_spectrum(8, seed=2)


@pytest.fixture
def spectrum_d32():
    return random_spectrum(32, seed=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
