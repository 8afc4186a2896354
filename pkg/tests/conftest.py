import numpy as np
import pytest
from hypothesis import settings

from dagcompact.instances import make_instance

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def rel():
    return make_instance("rel")


@pytest.fixture(scope="session")
def matc():
    return make_instance("matc")


@pytest.fixture(scope="session")
def matr():
    return make_instance("matr")


@pytest.fixture(scope="session")
def cpmc():
    return make_instance("cpm-c")


@pytest.fixture(scope="session")
def cpmr():
    return make_instance("cpm-r")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
