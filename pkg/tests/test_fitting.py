import json
import math

import numpy as np
import pytest

from pyrfstat.errors import DegenerateDataError, GridMismatchError, ParameterError
from pyrfstat.fitting import (
    G2_INIT,
    HOM_INIT,
    NOT_CONVERGED,
    TRIPLET_DEGENERATE,
    FitResult,
    fit_g2,
    fit_hom,
    fit_mollow,
    fit_power_calibration,
    fit_purcell,
    g2_model,
    hom_model,
    model_grid,
)
from pyrfstat.instrument import Histogram
from pyrfstat.systems.analyticalsystems.analytical_systems import MollowParams, mollow_spectrum
from pyrfstat.systems.analyticalsystems.cavity_systems import CavityParams, purcell_lifetime
from pyrfstat.units import CorrelationCurve, GridSpec, IRFParams, Spectrum

TRUTH = dict(G2_INIT, amplitude=1.0)
GRID = GridSpec.symmetric(20000.0, 100.0)


def test_model_grid_holds_the_data_points(irf):
    fine, pad, factor = model_grid(GRID, irf, 5000.0)
    assert factor == 2
    assert fine.step == 50.0
    assert fine.values()[pad] == pytest.approx(GRID.start)
    assert fine.values()[pad + (GRID.count - 1) * factor] == pytest.approx(-GRID.start)


def test_noiseless_g2_round_trip(irf):
    data = CorrelationCurve.from_grid(GRID, g2_model(TRUTH, GRID, irf))
    result = fit_g2(data, irf, init={"rabi_energy": 0.7, "rho": 0.9})
    assert result.converged
    assert result["rabi_energy"] == pytest.approx(0.9, rel=1e-3)
    assert result["rho"] == pytest.approx(0.96, rel=1e-3)
    assert result["amplitude"] == pytest.approx(1.0, rel=1e-3)
    assert result.derived["g2_zero_emitter"] == 0.0
    assert result.derived["g2_zero_deconvolved"] == pytest.approx(0.0784, abs=1e-3)
    assert 0.10 < result.derived["g2_zero_convolved"] < 0.22
    assert set(result.uncertainties) == {"rabi_energy", "rho", "amplitude"}


def test_noisy_histogram_round_trip(irf):
    rng = np.random.default_rng(8)
    expected = 2000.0 * g2_model(TRUTH, GRID, irf)
    data = Histogram(GRID.start, GRID.step, rng.poisson(expected))
    result = fit_g2(data, irf, init={"rabi_energy": 0.7})
    assert result["rabi_energy"] == pytest.approx(0.9, rel=0.05)
    assert result["amplitude"] == pytest.approx(2000.0, rel=0.05)


def test_one_percent_noise_round_trip(irf):
    rng = np.random.default_rng(9)
    values = g2_model(TRUTH, GRID, irf) * (1.0 + 0.01 * rng.standard_normal(GRID.count))
    result = fit_g2(CorrelationCurve.from_grid(GRID, values), irf, init={"rabi_energy": 0.7})
    assert result["rabi_energy"] == pytest.approx(0.9, rel=0.05)
    assert result["rho"] == pytest.approx(0.96, rel=0.05)


def test_g2_fit_rejects_bad_data(irf):
    with pytest.raises(DegenerateDataError):
        fit_g2(CorrelationCurve.from_grid(GRID, np.ones(GRID.count)), irf)
    short = GridSpec.symmetric(3000.0, 100.0)
    with pytest.raises(ParameterError):
        fit_g2(CorrelationCurve.from_grid(short, g2_model(TRUTH, short, irf)), irf)
    with pytest.raises(ParameterError):
        fit_g2(np.ones(10), irf)


def test_one_sided_grid_uses_its_full_reach(irf):
    grid = GridSpec(0.0, 100.0, 201)
    data = CorrelationCurve.from_grid(grid, g2_model(TRUTH, grid, irf))
    result = fit_g2(data, irf, init={"rabi_energy": 0.7, "rho": 0.9})
    assert result["rabi_energy"] == pytest.approx(0.9, rel=5e-3)
    assert result["rho"] == pytest.approx(0.96, rel=5e-3)


def test_start_at_bounds_corner_finds_the_same_optimum(irf):
    data = CorrelationCurve.from_grid(GRID, g2_model(TRUTH, GRID, irf))
    limits = {"rabi_energy": (0.5, 1.5), "rho": (0.8, 1.0)}
    centred = fit_g2(data, irf, init={"rabi_energy": 1.0, "rho": 0.9}, bounds=limits)
    corner = fit_g2(data, irf, init={"rabi_energy": 1.5, "rho": 0.8}, bounds=limits)
    for name in ("rabi_energy", "rho", "amplitude"):
        assert corner[name] == pytest.approx(centred[name], rel=0.01)
    assert corner["rabi_energy"] == pytest.approx(0.9, rel=0.01)


def test_tiny_budget_is_reported_not_raised(irf):
    data = CorrelationCurve.from_grid(GRID, g2_model(TRUTH, GRID, irf))
    result = fit_g2(data, irf, init={"rabi_energy": 0.5}, budget=5)
    assert not result.converged
    assert NOT_CONVERGED in result.flags


def test_noiseless_hom_round_trip(irf):
    grid = GridSpec.symmetric(25000.0, 100.0)
    truth = dict(HOM_INIT, overlap=0.9, amplitude=1.0)
    cross, parallel = hom_model(truth, grid, irf)
    result = fit_hom(
        CorrelationCurve.from_grid(grid, cross), CorrelationCurve.from_grid(grid, parallel), irf,
        init={"rabi_energy": 0.8},
    )
    assert result["overlap"] == pytest.approx(0.9, rel=1e-3)
    assert result["rabi_energy"] == pytest.approx(0.9, rel=1e-3)
    assert result.derived["g2_cross_zero_deconvolved"] == pytest.approx(0.539, abs=0.01)
    assert result.derived["g2_parallel_zero_deconvolved"] == pytest.approx(0.054, abs=0.01)
    assert result.derived["visibility_zero_deconvolved"] == pytest.approx(0.9, abs=1e-3)
    assert 0.4 < result.derived["visibility_peak_convolved"] < 0.65


def test_hom_fit_needs_shared_grid(irf):
    a = CorrelationCurve.from_grid(GRID, g2_model(TRUTH, GRID, irf))
    other = GridSpec.symmetric(20000.0, 50.0)
    b = CorrelationCurve.from_grid(other, g2_model(TRUTH, other, irf))
    with pytest.raises(GridMismatchError):
        fit_hom(a, b, irf)


def test_hom_fit_ending_inside_the_side_dips_is_rejected(irf):
    grid = GridSpec.symmetric(15000.0, 100.0)
    cross, parallel = hom_model(dict(HOM_INIT, overlap=0.9, amplitude=1.0), grid, irf)
    with pytest.raises(ParameterError):
        fit_hom(CorrelationCurve.from_grid(grid, cross), CorrelationCurve.from_grid(grid, parallel), irf)


def test_zero_overlap_model_cannot_describe_indistinguishable_photons(irf):
    grid = GridSpec.symmetric(25000.0, 100.0)
    rng = np.random.default_rng(12)
    cross, parallel = hom_model(dict(HOM_INIT, overlap=0.9, amplitude=1.0), grid, irf)
    cross = CorrelationCurve.from_grid(grid, cross * (1.0 + 0.003 * rng.standard_normal(grid.count)))
    parallel = CorrelationCurve.from_grid(grid, parallel * (1.0 + 0.003 * rng.standard_normal(grid.count)))
    free = fit_hom(cross, parallel, irf, init={"rabi_energy": 0.8})
    fixed = fit_hom(
        cross, parallel, irf, free=("rabi_energy", "rho", "amplitude"), init={"rabi_energy": 0.8, "overlap": 0.0},
    )
    assert fixed["overlap"] == 0.0
    assert free["overlap"] == pytest.approx(0.9, abs=0.05)
    assert fixed.residual >= 5.0 * free.residual


def test_purcell_two_point_fit():
    result = fit_purcell([(0.0, 65.0, 10.0), (250.0, 820.0, 10.0)], kappa=104.4)
    assert "two_point" in result.flags
    assert result.derived["enhancement_ratio"] == pytest.approx(12.6, abs=0.05)
    assert result.derived["t1_resonant"] == pytest.approx(65.0)
    with pytest.raises(ParameterError):
        fit_purcell([(0.0, 65.0, 10.0)], kappa=104.4)
    with pytest.raises(ParameterError):
        fit_purcell([(0.0, 65.0, 10.0), (250.0, 820.0, 10.0)], kappa=104.4, kappa_free=True)


def test_purcell_many_point_fit():
    cavity = CavityParams.from_kappa(104.4, 24.5, 1660.0)
    detunings = np.linspace(-300.0, 300.0, 13)
    points = [(d, purcell_lifetime(d, cavity), 5.0) for d in detunings]
    result = fit_purcell(points, kappa=104.4)
    assert result.converged
    assert result["f_eff"] == pytest.approx(24.5, rel=1e-3)
    assert result["t1_off"] == pytest.approx(1660.0, rel=1e-3)
    free_kappa = fit_purcell(points, kappa=90.0, kappa_free=True)
    assert free_kappa["kappa"] == pytest.approx(104.4, rel=1e-2)


def test_noisy_purcell_fit():
    cavity = CavityParams.from_kappa(104.4, 24.5, 1660.0)
    rng = np.random.default_rng(21)
    detunings = np.linspace(-300.0, 300.0, 10)
    exact = purcell_lifetime(detunings, cavity)
    measured = exact * (1.0 + 0.02 * rng.standard_normal(len(exact)))
    result = fit_purcell(list(zip(detunings, measured, 0.02 * exact)), kappa=104.4)
    assert result.converged
    for name, truth, rel in (("f_eff", 24.5, 0.15), ("t1_off", 1660.0, 0.1)):
        assert result[name] == pytest.approx(truth, rel=rel)
        assert abs(result[name] - truth) < 4.0 * result.uncertainties[name]


def test_mollow_fit_recovers_splitting():
    grid = GridSpec.symmetric(80.0, 0.05)
    spectrum = mollow_spectrum(MollowParams.from_energies(1.1754, 26.7), grid)
    data = Spectrum(spectrum.omega_start, spectrum.omega_step, 3.0 * spectrum.density)
    result = fit_mollow(data)
    assert TRIPLET_DEGENERATE not in result.flags
    assert result["rabi_energy"] == pytest.approx(26.7, rel=1e-3)
    assert result["gamma"] == pytest.approx(1.1754, rel=1e-3)
    assert result["amplitude"] == pytest.approx(3.0, rel=1e-3)
    assert result.derived["single_lorentzian_residual"] > result.residual


def test_unresolved_triplet_is_flagged():
    grid = GridSpec.symmetric(40.0, 0.05)
    spectrum = mollow_spectrum(MollowParams.from_energies(1.1754, 0.5), grid)
    result = fit_mollow(spectrum)
    assert TRIPLET_DEGENERATE in result.flags
    assert math.isnan(result["rabi_energy"])


def test_flat_spectrum_is_rejected():
    with pytest.raises(DegenerateDataError):
        fit_mollow(Spectrum(-10.0, 0.1, np.ones(201)))


def test_power_calibration():
    powers = np.linspace(1.0, 100.0, 12)
    rng = np.random.default_rng(2)
    rabi = 2.67 * np.sqrt(powers) * (1.0 + 0.005 * rng.standard_normal(len(powers)))
    result = fit_power_calibration(powers, rabi)
    assert result["calibration"] == pytest.approx(2.67, rel=0.03)
    assert result.derived["r_squared"] > 0.999
    with pytest.raises(ParameterError):
        fit_power_calibration([1.0], [2.0])
    with pytest.raises(DegenerateDataError):
        fit_power_calibration([0.0, 0.0], [0.0, 0.0])


def _noisy_triplet(rabi, rng, gamma=1.1754):
    grid = GridSpec.symmetric(80.0, 0.05)
    spectrum = mollow_spectrum(MollowParams.from_energies(gamma, rabi), grid)
    # 1e4 counts at the central peak, one percent counting noise there
    counts = rng.poisson(1e4 * spectrum.density / np.max(spectrum.density))
    return Spectrum(spectrum.omega_start, spectrum.omega_step, counts.astype(float))


def test_mollow_fit_with_one_percent_noise():
    result = fit_mollow(_noisy_triplet(26.7, np.random.default_rng(5)))
    assert TRIPLET_DEGENERATE not in result.flags
    assert result["rabi_energy"] == pytest.approx(26.7, rel=0.01)
    assert result["gamma"] == pytest.approx(1.1754, rel=0.05)


def test_power_series_through_mollow_fits_is_linear_in_root_power():
    rng = np.random.default_rng(6)
    powers = np.array([20.0, 35.0, 50.0, 65.0, 80.0])
    fitted = []
    for power in powers:
        result = fit_mollow(_noisy_triplet(3.0 * math.sqrt(power), rng))
        assert TRIPLET_DEGENERATE not in result.flags
        fitted.append(result["rabi_energy"])
    calibration = fit_power_calibration(powers, fitted)
    assert calibration["calibration"] == pytest.approx(3.0, rel=0.01)
    assert calibration.derived["r_squared"] > 0.999


def test_fit_result_serialisation(tmp_path):
    result = FitResult(
        kind="mollow",
        parameters={"gamma": 1.0, "rabi_energy": math.nan},
        free=("gamma", "rabi_energy"),
        residual=0.5,
        iterations=10,
        converged=True,
        uncertainties={"gamma": 0.1},
        derived={"gamma_sp": 0.0015},
        flags=[TRIPLET_DEGENERATE],
    )
    data = json.loads(result.to_json())
    assert data["parameters"]["rabi_energy"] is None
    assert data["uncertainties"] == {"gamma": 0.1}
    report = result.to_report()
    assert report.startswith("# rfstat-fit v1 kind=mollow\n")
    assert "gamma\t1.0\t0.1\tyes" in report
    assert "flags\ttriplet_degenerate" in report
    result.write_report(tmp_path / "fit.txt")
    assert (tmp_path / "fit.txt").read_text() == report
    with pytest.raises(ParameterError):
        FitResult("g2", {}, (), -1.0, 0, True)
