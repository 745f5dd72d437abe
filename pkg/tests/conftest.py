import numpy as np
import pytest

from fecsim import Representation
from fecsim.mitigation import default_support
from fecsim.noise import load_preset


@pytest.fixture(scope="session")
def rep():
    return Representation()


@pytest.fixture(scope="session")
def frep():
    return Representation("fermionic")


@pytest.fixture(scope="session")
def support(rep):
    return default_support(rep, "union")


@pytest.fixture(scope="session")
def santiago():
    return load_preset("santiago-like")


@pytest.fixture(scope="session")
def melbourne():
    return load_preset("melbourne-like")


@pytest.fixture()
def rng():
    return np.random.default_rng(20210808)
