import math

import numpy as np
import pytest

from pyrfstat.errors import NumericalError, ParameterError
from pyrfstat.instrument import mix_background
from pyrfstat.systems.analyticalsystems.analytical_systems import (
    DEGENERATE,
    OSCILLATORY,
    OVERDAMPED,
    G2Coefficients,
    MollowParams,
    broaden_spectrum,
    emission_rate,
    first_rabi_maximum,
    g2_coefficients,
    g2_curve,
    g2_driven,
    g2_from_coefficients,
    mollow_spectrum,
    rabi_from_power,
    saturation_parameter,
    signal_to_background,
    steady_state_population,
    weak_drive_spectrum,
)
from pyrfstat.systems.kineticsystems.kinetic_systems import g2_quantum_regression
from pyrfstat.units import HBAR, DriveParams, EmitterParams, GridSpec


def degenerate_drive(emitter):
    return DriveParams(HBAR * abs(1.0 / emitter.t1 - 1.0 / emitter.t2) / 2.0)


def test_g2_vanishes_at_zero_delay_for_random_parameters():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        t1 = rng.uniform(10.0, 2000.0)
        emitter = EmitterParams(t1, 2.0 * t1 * rng.uniform(0.01, 1.0))
        drive = DriveParams(rng.uniform(0.0, 50.0))
        assert g2_driven(emitter, drive, 0.0) == 0.0
        assert g2_driven(emitter, drive, 1e-3) < 1e-4


def test_regimes(emitter):
    assert g2_coefficients(emitter, DriveParams(0.9)).regime == OSCILLATORY
    assert g2_coefficients(emitter, DriveParams(0.1)).regime == OVERDAMPED
    assert g2_coefficients(emitter, degenerate_drive(emitter)).regime == DEGENERATE


def test_undriven_emitter_regimes():
    assert g2_coefficients(EmitterParams(560.0, 1120.0), DriveParams(0.0)).regime == OVERDAMPED
    emitter = EmitterParams(560.0, 560.0)
    assert g2_coefficients(emitter, DriveParams(0.0)).regime == DEGENERATE
    g2 = g2_driven(emitter, DriveParams(0.0), np.array([0.0, 560.0, 1e5]))
    assert g2[0] == 0.0
    assert np.all(np.isfinite(g2))
    assert g2[-1] == pytest.approx(1.0)


@pytest.mark.parametrize("rabi_energy", [0.1, 0.9, 5.0, None])
def test_closed_form_matches_quantum_regression(emitter, rabi_energy):
    drive = degenerate_drive(emitter) if rabi_energy is None else DriveParams(rabi_energy)
    taus = np.array([0.0, 50.0, 300.0, 1000.0, 3000.0])
    assert np.allclose(g2_driven(emitter, drive, taus), g2_quantum_regression(emitter, drive, taus), atol=1e-8)


@pytest.mark.parametrize("q", [1e-6, 1e-6j])
def test_degenerate_limit_is_continuous(q):
    mean = -(1.0 / 560.0 + 1.0 / 360.0) / 2.0
    taus = np.linspace(0.0, 10000.0, 1001)
    near = g2_from_coefficients(G2Coefficients(mean + q, mean - q, complex(q), mean), taus)
    exact = g2_from_coefficients(G2Coefficients(mean, mean, 0j, mean), taus)
    assert np.max(np.abs(near - exact)) < 1e-6


def test_negative_g2_is_an_error():
    # a growing eigenvalue cannot come from a physical emitter
    mean, q = -1e-3, 2e-3
    broken = G2Coefficients(complex(mean + q), complex(mean - q), complex(q), mean)
    with pytest.raises(NumericalError):
        g2_from_coefficients(broken, np.linspace(0.0, 2000.0, 21))
    assert g2_from_coefficients(broken, 0.0) == 0.0


def test_g2_tends_to_one(emitter, drive):
    assert g2_driven(emitter, drive, 20000.0) == pytest.approx(1.0, abs=1e-9)
    assert g2_driven(emitter, drive, -500.0) == g2_driven(emitter, drive, 500.0)


def test_background_mixing_of_ideal_antibunching(emitter, drive):
    curve = g2_curve(emitter, drive, GridSpec.symmetric(5000.0, 10.0))
    mixed = mix_background(curve, 0.96)
    assert mixed.value_at(0.0) == pytest.approx(0.0784, abs=1e-12)


def test_first_rabi_maximum_under_strong_drive(emitter):
    drive = DriveParams(26.7)
    taus = np.arange(0.0, 200.0, 0.01)
    g2 = g2_driven(emitter, drive, taus)
    assert taus[np.argmax(g2)] == pytest.approx(first_rabi_maximum(drive), rel=2e-3)
    with pytest.raises(ParameterError):
        first_rabi_maximum(DriveParams(0.0))


def test_saturation(emitter):
    weak, strong = DriveParams(0.01), DriveParams(1000.0)
    assert saturation_parameter(emitter, strong) > 1e4
    assert steady_state_population(emitter, strong) == pytest.approx(0.5, rel=1e-4)
    assert emission_rate(emitter, strong) == pytest.approx(emitter.gamma0 / 2.0, rel=1e-4)
    assert steady_state_population(emitter, weak) < 1e-3


def test_power_calibration_and_signal_to_background(emitter):
    assert rabi_from_power(4.0, 2.0) == pytest.approx(4.0)
    assert list(rabi_from_power([1.0, 9.0], 2.0)) == [2.0, 6.0]
    drive = DriveParams(0.0, power_calibration=2.0)
    ratios = [signal_to_background(p, emitter, drive, 1e-6) for p in (1.0, 10.0, 100.0)]
    assert ratios[0] > ratios[1] > ratios[2]
    with pytest.raises(ParameterError):
        signal_to_background(1.0, emitter, DriveParams(1.0), 1e-6)


def test_mollow_area_ratio_and_positions():
    params = MollowParams.from_energies(0.1, 26.7)
    spectrum = mollow_spectrum(params, GridSpec.symmetric(2000.0, 0.01))
    energies, density = spectrum.energies, spectrum.density
    step = spectrum.omega_step
    split = 26.7 / 2.0
    left = np.sum(density[energies < -split]) * step
    centre = np.sum(density[np.abs(energies) <= split]) * step
    right = np.sum(density[energies > split]) * step
    assert centre / left == pytest.approx(2.0, rel=0.01)
    assert centre / right == pytest.approx(2.0, rel=0.01)
    assert spectrum.integral() == pytest.approx(1.0, rel=1e-3)
    positive = energies > split
    assert energies[positive][np.argmax(density[positive])] == pytest.approx(26.7, abs=0.01)


def test_mollow_peak_heights():
    gamma = 1.1754
    spectrum = mollow_spectrum(MollowParams.from_energies(gamma, 200.0), GridSpec.symmetric(400.0, 0.01))
    centre = spectrum.density[np.argmin(np.abs(spectrum.energies))]
    side = spectrum.density[np.argmin(np.abs(spectrum.energies - 200.0))]
    assert centre == pytest.approx(1.0 / (2.0 * math.pi * gamma), rel=1e-3)
    assert side / centre == pytest.approx(1.0 / 3.0, rel=1e-2)


def test_mollow_params_round_trip():
    params = MollowParams.from_energies(1.1754, 26.7)
    assert params.gamma_energy == pytest.approx(1.1754)
    assert params.rabi_energy == pytest.approx(26.7)
    with pytest.raises(ParameterError):
        MollowParams(0.0, 1.0)


def test_weak_drive_spectrum_linewidth(emitter):
    spectrum = weak_drive_spectrum(emitter, GridSpec.symmetric(50.0, 0.001))
    peak = spectrum.density.max()
    above = spectrum.energies[spectrum.density >= peak / 2.0]
    assert above[-1] - above[0] == pytest.approx(2.0 * HBAR / emitter.t2, abs=0.005)


def test_broadening_conserves_area():
    spectrum = mollow_spectrum(MollowParams.from_energies(1.1754, 26.7), GridSpec.symmetric(400.0, 0.05))
    broadened = broaden_spectrum(spectrum)
    assert broadened.integral() == pytest.approx(spectrum.integral(), rel=1e-4)
    assert broadened.density.max() < spectrum.density.max()
    with pytest.raises(ParameterError):
        broaden_spectrum(spectrum, 0.0)
