import numpy as np
import pytest

from csgreen.basis import BasisSpec, PotentialSpec


@pytest.fixture
def osc3():
    return BasisSpec(3, 0, 1.0), PotentialSpec({2: 0.5})


@pytest.fixture
def osc2():
    return BasisSpec(2, 0, 1.0), PotentialSpec({2: 0.5})


@pytest.fixture
def cornell():
    return BasisSpec(3, 0, 1.0), PotentialSpec({-1: -1.0, 1: 1.0})


@pytest.fixture
def coulomb_quadratic():
    return BasisSpec(2, 0, 1.0), PotentialSpec({-1: -1.0, 2: 0.5})


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
