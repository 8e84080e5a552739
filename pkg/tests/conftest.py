import pytest

from ringmzi import REFERENCE_GEOMETRY, derive_rates, fwm_gain


@pytest.fixture(scope="session")
def geometry():
    return REFERENCE_GEOMETRY


@pytest.fixture(scope="session")
def rates(geometry):
    return derive_rates(geometry)


@pytest.fixture(scope="session")
def gain(geometry):
    return fwm_gain(geometry).gain
