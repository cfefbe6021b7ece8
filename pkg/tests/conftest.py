import warnings

import pytest

from stql.params import BUILTIN_MOLECULES, Conditions


@pytest.fixture(scope="session")
def ch3cn():
    return BUILTIN_MOLECULES["CH3CN"]


@pytest.fixture(scope="session")
def defaults():
    return Conditions()


@pytest.fixture(scope="session")
def rv(defaults):
    return defaults.reduced


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield
