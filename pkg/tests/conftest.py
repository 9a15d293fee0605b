import numpy as np
import pytest

from metatomo import calibrated_six_port, cross_polarized_state


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def six_port():
    return calibrated_six_port()


@pytest.fixture
def pair_state():
    return cross_polarized_state(0.58)


@pytest.fixture
def pair_state_incoherent():
    return cross_polarized_state(0.0)
