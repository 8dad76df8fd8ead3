import matplotlib

matplotlib.use("Agg")

import pytest

from pyrfstat.units import DriveParams, EmitterParams, IRFParams


@pytest.fixture
def emitter():
    return EmitterParams(560.0, 360.0)


@pytest.fixture
def drive():
    return DriveParams(0.9)


@pytest.fixture
def irf():
    return IRFParams(400.0)
