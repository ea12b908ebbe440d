import numpy as np
import pytest

from caplace.geometry import BoundaryData, limacon_curve, normal_field, unit_circle


@pytest.fixture(scope="session")
def circle512():
    return unit_circle(512)


@pytest.fixture(scope="session")
def normal512(circle512):
    return normal_field(circle512)


@pytest.fixture(scope="session")
def limacon1024():
    return limacon_curve(1024, 0.3)


@pytest.fixture()
def t512(circle512):
    return circle512.t


@pytest.fixture()
def phi_cos(circle512):
    return BoundaryData(np.cos(circle512.t))


@pytest.fixture()
def phi_one(circle512):
    return BoundaryData.constant(1.0, 512)
