import math

import numpy as np
import pytest

from pyrfstat.errors import GridMismatchError, ParameterError
from pyrfstat.instrument import convolve_irf
from pyrfstat.systems.analyticalsystems.interferometer_systems import (
    g2_cross,
    g2_parallel,
    hom_curves,
    hom_raw_asymptote,
    interference_factor,
    max_cw_visibility,
    renormalize_hom,
    visibility,
)
from pyrfstat.units import CorrelationCurve, EmitterParams, GridSpec, InterferometerParams

DELAY = 13000.0


def ideal_g2(tau):
    return np.where(np.asarray(tau) == 0.0, 0.0, 1.0)


def test_cross_curve_for_ideal_single_photons():
    ifo = InterferometerParams.balanced(DELAY)
    assert g2_cross(0.0, ideal_g2, ifo) == pytest.approx(0.5)
    assert g2_cross(DELAY, ideal_g2, ifo) == pytest.approx(0.75)
    assert g2_cross(-DELAY, ideal_g2, ifo) == pytest.approx(0.75)
    assert g2_cross(5000.0, ideal_g2, ifo) == pytest.approx(1.0)


def test_raw_asymptote():
    assert hom_raw_asymptote(InterferometerParams.balanced()) == pytest.approx(1.0)
    ifo = InterferometerParams(0.3, 0.7, 0.6, 0.4)
    assert g2_cross(5000.0, ideal_g2, ifo) == pytest.approx(hom_raw_asymptote(ifo))
    curve = CorrelationCurve(0.0, 1.0, np.full(3, hom_raw_asymptote(ifo)))
    assert np.allclose(renormalize_hom(curve, ifo).values, 1.0)


def test_perfect_overlap_suppresses_zero_delay():
    emitter = EmitterParams(560.0, 1120.0)
    ifo = InterferometerParams.balanced(DELAY, overlap=1.0)
    assert g2_parallel(0.0, ideal_g2, ifo, emitter) == 0.0
    assert interference_factor(0.0, 360.0, 0.9) == pytest.approx(0.1)
    assert interference_factor(1e6, 360.0, 0.9) == pytest.approx(1.0)


def test_model_curves_with_background(emitter, drive):
    ifo = InterferometerParams.balanced(DELAY, overlap=0.9)
    cross, parallel = hom_curves(emitter, drive, ifo, GridSpec.symmetric(30000.0, 10.0), rho=0.96)
    assert cross.value_at(0.0) == pytest.approx(0.53, abs=0.03)
    assert parallel.value_at(0.0) == pytest.approx(0.06, abs=0.02)
    assert cross.value_at(DELAY) == pytest.approx(0.7696, abs=0.005)
    v = visibility(cross, parallel)
    assert v.value_at(0.0) == pytest.approx(0.9, abs=0.05)
    assert v.peak() == pytest.approx(0.9, abs=0.05)


def test_convolved_visibility_peak(emitter, drive, irf):
    ifo = InterferometerParams.balanced(DELAY, overlap=0.9)
    cross, parallel = hom_curves(emitter, drive, ifo, GridSpec.symmetric(30000.0, 10.0), rho=0.96)
    cross_c, parallel_c = convolve_irf(cross, irf), convolve_irf(parallel, irf)
    peak = visibility(cross_c, parallel_c).peak()
    assert 0.4 < peak < 0.65
    assert 0.75 < cross_c.value_at(DELAY) < 0.82


def test_visibility_undefined_where_cross_vanishes():
    cross = CorrelationCurve(0.0, 1.0, [0.0, 1.0, 1.0])
    parallel = CorrelationCurve(0.0, 1.0, [0.0, 0.5, 1.2])
    v = visibility(cross, parallel)
    assert list(v.defined) == [False, True, True]
    assert math.isnan(v.values[0])
    assert v.values[1] == pytest.approx(0.5)
    assert v.values[2] == pytest.approx(-0.2)
    assert v.peak() == pytest.approx(0.5)


def test_visibility_grid_mismatch():
    with pytest.raises(GridMismatchError):
        visibility(CorrelationCurve(0.0, 1.0, [1.0, 1.0]), CorrelationCurve(0.0, 2.0, [1.0, 1.0]))


def test_max_cw_visibility():
    assert max_cw_visibility(360.0, 400.0) == pytest.approx(0.45)
    assert max_cw_visibility(360.0, 0.0) == 1.0
    assert max_cw_visibility(1000.0, 100.0) == 1.0
    with pytest.raises(ParameterError):
        max_cw_visibility(0.0, 100.0)
