"""
Forward-model parameter estimation

Measured or synthetic data are compared with the model pushed through the same
instrument chain (background, IRF) and the physical parameters are adjusted by
a derivative-free simplex through lmfit. "Deconvolved" values are read off the
model at the optimum, never obtained by inverse filtering.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import lmfit
import numpy as np
from scipy.signal import find_peaks, peak_widths
from scipy.stats import linregress

from pyrfstat.errors import DegenerateDataError, GridMismatchError, ParameterError
from pyrfstat.instrument import (
    IRF_SAMPLES_PER_FWHM,
    Histogram,
    convolve_padded,
    gaussian_kernel,
    mix_background,
)
from pyrfstat.systems.analyticalsystems.analytical_systems import (
    g2_driven,
    lorentzian_density,
    mollow_density,
)
from pyrfstat.systems.analyticalsystems.cavity_systems import (
    DEFAULT_MODE_ENERGY,
    CavityParams,
    purcell_lifetime,
    solve_purcell_two_point,
)
from pyrfstat.systems.analyticalsystems.interferometer_systems import (
    g2_cross,
    g2_parallel,
    visibility,
)
from pyrfstat.units import (
    HBAR,
    CorrelationCurve,
    DriveParams,
    EmitterParams,
    GridSpec,
    InterferometerParams,
    IRFParams,
    Spectrum,
)

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 4000
# Model grids extend this many lifetimes beyond the data so IRF edges are flat
TAIL_LIFETIMES = 15.0
# Data must reach this many lifetimes into the g2 tail
REQUIRED_TAIL = 10.0

G2_PARAMETERS = ("t1", "t2", "rabi_energy", "rho", "amplitude")
G2_FREE = ("rabi_energy", "rho", "amplitude")
G2_INIT = {"t1": 560.0, "t2": 360.0, "rabi_energy": 0.9, "rho": 0.96}
G2_BOUNDS = {
    "t1": (1.0, 1e4),
    "t2": (1.0, 2e4),
    "rabi_energy": (0.0, 100.0),
    "rho": (0.0, 1.0),
    "amplitude": (0.0, np.inf),
}

HOM_PARAMETERS = ("t1", "t2", "rabi_energy", "rho", "overlap", "r1", "r2", "delay", "amplitude")
HOM_FREE = ("rabi_energy", "rho", "overlap", "amplitude")
HOM_INIT = dict(G2_INIT, overlap=0.5, r1=0.5, r2=0.5, delay=13000.0)
HOM_BOUNDS = dict(G2_BOUNDS, overlap=(0.0, 1.0), r1=(0.0, 1.0), r2=(0.0, 1.0), delay=(1.0, 1e6))

MOLLOW_PARAMETERS = ("gamma", "rabi_energy", "amplitude", "center")

# A triplet fit is only trusted when the single Lorentzian is clearly worse
TRIPLET_RESIDUAL_MARGIN = 1.1
# Side peaks of a resolved triplet stand this fraction of the full range above their surroundings
MOLLOW_PEAK_PROMINENCE = 0.05
TRIPLET_DEGENERATE = "triplet_degenerate"
NOT_CONVERGED = "not_converged"


@dataclass
class FitResult:
    """
    Outcome of a fit

    parameters holds every model parameter, free or fixed; uncertainties only
    the free ones. residual is the weighted sum of squares at the optimum.
    derived carries scalars computed from the optimum (deconvolved g2(0),
    visibilities, ratios) and flags names conditions worth a second look.
    """

    kind: str
    parameters: dict
    free: tuple
    residual: float
    iterations: int
    converged: bool
    budget: int = DEFAULT_BUDGET
    covariance_estimate: Optional[np.ndarray] = field(default=None, repr=False)
    uncertainties: dict = field(default_factory=dict)
    derived: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if not self.residual >= 0:
            raise ParameterError(f"residual must be non-negative, got {self.residual}")

    def __getitem__(self, name):
        return self.parameters[name]

    def to_dict(self) -> dict:
        def clean(value):
            value = float(value)
            return None if math.isnan(value) else value

        return {
            "kind": self.kind,
            "parameters": {k: clean(v) for k, v in self.parameters.items()},
            "uncertainties": {k: None if v is None else clean(v) for k, v in self.uncertainties.items()},
            "free": list(self.free),
            "residual": self.residual,
            "iterations": self.iterations,
            "budget": self.budget,
            "converged": self.converged,
            "derived": {k: clean(v) for k, v in self.derived.items()},
            "flags": list(self.flags),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_report(self) -> str:
        """Tab-separated report: parameter, value, uncertainty, free"""
        lines = [f"# rfstat-fit v1 kind={self.kind}", "parameter\tvalue\tuncertainty\tfree"]
        for name, value in self.parameters.items():
            error = self.uncertainties.get(name)
            lines.append(
                f"{name}\t{value!r}\t{'' if error is None else repr(error)}\t"
                f"{'yes' if name in self.free else 'no'}"
            )
        lines.append(f"residual\t{self.residual!r}")
        lines.append(f"iterations\t{self.iterations}")
        lines.append(f"converged\t{'yes' if self.converged else 'no'}")
        for name, value in self.derived.items():
            lines.append(f"derived.{name}\t{float(value)!r}")
        if self.flags:
            lines.append(f"flags\t{','.join(self.flags)}")
        return "\n".join(lines) + "\n"

    def write_report(self, path):
        path = Path(path)
        path.write_text(self.to_report(), encoding="utf-8")
        logger.info("wrote fit report %s", path)


# Minimisation engine


def _build_parameters(names, free, init, bounds):
    params = lmfit.Parameters()
    for name in names:
        if name not in init:
            raise ParameterError(f"no initial value for {name}")
        low, high = bounds.get(name, (-np.inf, np.inf))
        value = float(init[name])
        if name in free and not low <= value <= high:
            raise ParameterError(f"initial {name} = {value} outside bounds [{low}, {high}]")
        params.add(name, value=value, min=low, max=high, vary=name in free)
    return params


def _values(params) -> dict:
    return {name: float(params[name].value) for name in params}


def _jacobian(evaluate, values, free, params):
    base = evaluate(values)
    columns = []
    for name in free:
        x = values[name]
        h = 1e-6 * max(abs(x), 1e-3)
        upper = min(x + h, params[name].max)
        lower = max(x - h, params[name].min)
        plus = evaluate(dict(values, **{name: upper}))
        minus = evaluate(dict(values, **{name: lower}))
        columns.append((plus - minus) / (upper - lower))
    return base, np.column_stack(columns) if columns else np.zeros((len(base), 0))


def _covariance(evaluate, values, free, params):
    base, jacobian = _jacobian(evaluate, values, free, params)
    dof = len(base) - len(free)
    if not free or dof <= 0:
        return None, {}
    scale = float(np.sum(base ** 2)) / dof
    covariance = np.linalg.pinv(jacobian.T @ jacobian) * scale
    errors = {name: float(math.sqrt(max(covariance[i, i], 0.0))) for i, name in enumerate(free)}
    return covariance, errors


def _minimize(kind, evaluate, names, free, init, bounds, budget):
    """
    Nelder-Mead through lmfit with one deterministic restart from the optimum

    evaluate maps a full parameter dict to the weighted residual vector.
    """
    free = tuple(name for name in names if name in free)
    params = _build_parameters(names, free, init, bounds)

    def residual(p):
        return evaluate(_values(p))

    best = None
    for attempt in range(2):
        minimizer = lmfit.Minimizer(residual, params, max_nfev=budget)
        result = minimizer.minimize(
            method="nelder",
            options={"maxiter": 2 * budget, "xatol": 1e-8, "fatol": 1e-10},
        )
        logger.debug("%s fit attempt %d: chisqr %.6g after %d evaluations", kind, attempt, result.chisqr, result.nfev)
        if best is None or result.chisqr <= best.chisqr:
            best = result
        params = result.params
    values = _values(best.params)
    converged = bool(best.success and not getattr(best, "aborted", False) and best.nfev <= budget)
    covariance, errors = _covariance(evaluate, values, free, best.params)
    fit = FitResult(
        kind=kind,
        parameters=values,
        free=free,
        residual=float(np.sum(evaluate(values) ** 2)),
        iterations=int(best.nfev),
        converged=converged,
        budget=budget,
        covariance_estimate=covariance,
        uncertainties=errors,
    )
    if not converged:
        fit.flags.append(NOT_CONVERGED)
        logger.warning("%s fit did not converge within %d evaluations", kind, budget)
    else:
        logger.info("%s fit converged, residual %.6g", kind, fit.residual)
    return fit


# Shared data handling


def _data_arrays(data):
    """Grid, observations and least-squares weights of a histogram or curve"""
    if isinstance(data, Histogram):
        y = data.counts.astype(float)
        weights = 1.0 / np.maximum(y, 1.0)
        grid = GridSpec(data.bin_start, data.bin_width, len(y))
    elif isinstance(data, CorrelationCurve):
        y = np.asarray(data.values, dtype=float)
        weights = np.ones_like(y)
        grid = data.grid
    else:
        raise ParameterError(f"cannot fit data of type {type(data).__name__}")
    if len(y) < 3 or np.ptp(y) == 0:
        raise DegenerateDataError("data are flat and carry no information")
    return grid, y, np.sqrt(weights)


def _tail_level(grid: GridSpec, y):
    """Mean of the tenth of the points farthest from zero delay, per side"""
    edge = max(1, len(y) // 10)
    farthest = np.argsort(np.abs(grid.values()), kind="stable")[-2 * edge:]
    return float(np.mean(y[farthest]))


def _check_tail(grid: GridSpec, t1, t2, delay=0.0):
    # g2 is even in tau, so the longer side of the grid sets the reach
    end = grid.start + grid.step * (grid.count - 1)
    reach = max(abs(grid.start), abs(end)) - delay
    if reach < REQUIRED_TAIL * max(t1, t2):
        raise ParameterError(
            f"data reach {reach:.0f} ps beyond the features but need "
            f"{REQUIRED_TAIL * max(t1, t2):.0f} ps of g2 tail"
        )


def model_grid(grid: GridSpec, irf: IRFParams, padding: float):
    """
    Padded model grid holding every data point

    Returns the fine grid, the index of the first data point and the
    subsampling factor back to the data grid.
    """
    factor = max(1, int(math.ceil(grid.step / (irf.fwhm / IRF_SAMPLES_PER_FWHM) - 1e-9)))
    step = grid.step / factor
    pad = int(math.ceil(padding / step))
    fine = GridSpec(grid.start - pad * step, step, (grid.count - 1) * factor + 1 + 2 * pad)
    return fine, pad, factor


def _sample(values, pad, factor, count):
    return values[pad: pad + (count - 1) * factor + 1: factor]


def _emitter(values):
    t1 = values["t1"]
    return EmitterParams(t1, min(values["t2"], 2.0 * t1))


def _rho(values):
    return min(max(values["rho"], 0.0), 1.0)


def g2_model(values: dict, grid: GridSpec, irf: IRFParams) -> np.ndarray:
    """Background-mixed, IRF-convolved g2 times amplitude on grid"""
    emitter = _emitter(values)
    drive = DriveParams(max(values["rabi_energy"], 0.0))
    padding = TAIL_LIFETIMES * max(emitter.t1, emitter.t2) + 5.0 * irf.sigma
    fine, pad, factor = model_grid(grid, irf, padding)
    g2 = g2_driven(emitter, drive, fine.values())
    convolved = convolve_padded(g2, gaussian_kernel(fine.step, irf.fwhm))
    mixed = mix_background(convolved, _rho(values))
    return values.get("amplitude", 1.0) * _sample(mixed, pad, factor, grid.count)


def _interferometer(values):
    r1 = min(max(values["r1"], 0.0), 1.0)
    r2 = min(max(values["r2"], 0.0), 1.0)
    overlap = min(max(values["overlap"], 0.0), 1.0)
    return InterferometerParams(r1, 1.0 - r1, r2, 1.0 - r2, values["delay"], overlap)


def hom_model(values: dict, grid: GridSpec, irf: IRFParams):
    """(cross, parallel) background-mixed, IRF-convolved curves times amplitude"""
    emitter = _emitter(values)
    drive = DriveParams(max(values["rabi_energy"], 0.0))
    ifo = _interferometer(values)
    rho = _rho(values)
    padding = TAIL_LIFETIMES * max(emitter.t1, emitter.t2) + 5.0 * irf.sigma + ifo.delay
    fine, pad, factor = model_grid(grid, irf, padding)
    taus = fine.values()

    def base(t):
        return mix_background(g2_driven(emitter, drive, t), rho)

    kernel = gaussian_kernel(fine.step, irf.fwhm)
    amplitude = values.get("amplitude", 1.0)
    cross = convolve_padded(g2_cross(taus, base, ifo), kernel)
    parallel = convolve_padded(g2_parallel(taus, base, ifo, emitter), kernel)
    return (
        amplitude * _sample(cross, pad, factor, grid.count),
        amplitude * _sample(parallel, pad, factor, grid.count),
    )


# Public fits


def fit_g2(data, irf: IRFParams, free=G2_FREE, init: dict = None, bounds: dict = None, budget: int = DEFAULT_BUDGET) -> FitResult:
    """
    Fit the instrument-convolved driven-emitter g2 to a histogram or curve

    Parameters
    ----------
    data : Histogram or CorrelationCurve
        Raw counts (weighted 1/max(count, 1)) or a normalised curve (uniform
        weights)
    irf : IRFParams
        Detector response the data were measured with
    free : iterable of str
        Subset of t1, t2, rabi_energy, rho, amplitude to vary
    init : dict, optional
        Starting values; missing entries come from G2_INIT and the data level
    bounds : dict, optional
        (min, max) per parameter, defaults to G2_BOUNDS
    budget : int
        Function evaluations allowed per simplex run

    Returns
    -------
    FitResult
        derived holds g2_zero_deconvolved (background-mixed model at tau = 0
        before convolution), g2_zero_emitter and g2_zero_convolved
    """
    grid, y, sqrt_w = _data_arrays(data)
    start = dict(G2_INIT)
    start["amplitude"] = _tail_level(grid, y)
    start.update(init or {})
    _check_tail(grid, start["t1"], start["t2"])
    limits = dict(G2_BOUNDS, **(bounds or {}))

    def evaluate(values):
        return (g2_model(values, grid, irf) - y) * sqrt_w

    result = _minimize("g2", evaluate, G2_PARAMETERS, set(free), start, limits, budget)
    values = result.parameters
    emitter = _emitter(values)
    drive = DriveParams(max(values["rabi_energy"], 0.0))
    rho = _rho(values)
    zero_grid = GridSpec.symmetric(0.0, grid.step)
    result.derived["g2_zero_emitter"] = g2_driven(emitter, drive, 0.0)
    result.derived["g2_zero_deconvolved"] = mix_background(g2_driven(emitter, drive, 0.0), rho)
    result.derived["g2_zero_convolved"] = float(g2_model(dict(values, amplitude=1.0), zero_grid, irf)[0])
    return result


def fit_hom(data_cross, data_parallel, irf: IRFParams, free=HOM_FREE, init: dict = None, bounds: dict = None, budget: int = DEFAULT_BUDGET) -> FitResult:
    """
    Joint fit of cross- and co-polarised interferometer correlations

    Both curves share the emitter, background and coupler parameters; the
    co-polarised one adds the overlap V. derived reports the deconvolved
    g2_cross(0), g2_parallel(0) and V_HOM(0) together with the convolved
    visibility peak.
    """
    grid, y_cross, w_cross = _data_arrays(data_cross)
    grid_parallel, y_parallel, w_parallel = _data_arrays(data_parallel)
    if grid != grid_parallel:
        raise GridMismatchError("cross and parallel data must share a delay grid")
    start = dict(HOM_INIT)
    start["amplitude"] = _tail_level(grid, y_cross)
    start.update(init or {})
    _check_tail(grid, start["t1"], start["t2"], start["delay"])
    limits = dict(HOM_BOUNDS, **(bounds or {}))

    def evaluate(values):
        cross, parallel = hom_model(values, grid, irf)
        return np.concatenate([(cross - y_cross) * w_cross, (parallel - y_parallel) * w_parallel])

    result = _minimize("hom", evaluate, HOM_PARAMETERS, set(free), start, limits, budget)
    values = result.parameters
    emitter = _emitter(values)
    drive = DriveParams(max(values["rabi_energy"], 0.0))
    ifo = _interferometer(values)
    rho = _rho(values)

    def base(t):
        return mix_background(g2_driven(emitter, drive, t), rho)

    cross_zero = g2_cross(0.0, base, ifo)
    parallel_zero = g2_parallel(0.0, base, ifo, emitter)
    result.derived["g2_cross_zero_deconvolved"] = cross_zero
    result.derived["g2_parallel_zero_deconvolved"] = parallel_zero
    result.derived["visibility_zero_deconvolved"] = (
        (cross_zero - parallel_zero) / cross_zero if cross_zero > 0 else math.nan
    )
    cross, parallel = hom_model(dict(values, amplitude=1.0), grid, irf)
    result.derived["visibility_peak_convolved"] = visibility(
        CorrelationCurve.from_grid(grid, cross), CorrelationCurve.from_grid(grid, parallel)
    ).peak()
    return result


def fit_purcell(points, kappa: float, kappa_free: bool = False, init: dict = None, bounds: dict = None,
                budget: int = DEFAULT_BUDGET, mode_energy: float = DEFAULT_MODE_ENERGY) -> FitResult:
    """
    Fit the Lorentzian Purcell model to lifetime-versus-detuning points

    Parameters
    ----------
    points : sequence of (detuning µeV, lifetime ps, uncertainty ps)
    kappa : float
        Cavity FWHM in µeV, starting value when kappa_free
    kappa_free : bool
        Also fit the cavity linewidth

    Returns
    -------
    FitResult
        Parameters f_eff, t1_off and kappa. Exactly two points with a fixed
        kappa are solved in closed form.
    """
    points = [tuple(float(x) for x in p) for p in points]
    if len(points) < 2:
        raise ParameterError(f"Purcell fit needs at least two points, got {len(points)}")
    if any(len(p) != 3 or not p[2] > 0 for p in points):
        raise ParameterError("points must be (detuning, lifetime, uncertainty > 0)")
    detuning, lifetime, sigma = (np.array(column) for column in zip(*points))
    if len(points) == 2:
        if kappa_free:
            raise ParameterError("two points cannot fix kappa as well; hold it fixed")
        cavity = solve_purcell_two_point(kappa, points[0][:2], points[1][:2], mode_energy)
        result = FitResult(
            kind="purcell",
            parameters={"f_eff": cavity.f_eff, "t1_off": cavity.t1_off, "kappa": kappa},
            free=("f_eff", "t1_off"),
            residual=0.0,
            iterations=0,
            converged=True,
            budget=budget,
        )
        result.flags.append("two_point")
    else:
        start = {
            "f_eff": max(lifetime.max() / lifetime.min() - 1.0, 0.0),
            "t1_off": float(lifetime.max()),
            "kappa": kappa,
        }
        start.update(init or {})
        limits = {"f_eff": (0.0, 1e4), "t1_off": (1e-3, 1e7), "kappa": (1e-6, 1e5)}
        limits.update(bounds or {})

        def evaluate(values):
            cavity = CavityParams.from_kappa(max(values["kappa"], 1e-9), max(values["f_eff"], 0.0),
                                             max(values["t1_off"], 1e-9), mode_energy)
            return (purcell_lifetime(detuning, cavity) - lifetime) / sigma

        free = ("f_eff", "t1_off", "kappa") if kappa_free else ("f_eff", "t1_off")
        result = _minimize("purcell", evaluate, ("f_eff", "t1_off", "kappa"), set(free), start, limits, budget)
    values = result.parameters
    cavity = CavityParams.from_kappa(values["kappa"], values["f_eff"], values["t1_off"], mode_energy)
    far = float(np.max(np.abs(detuning)))
    result.derived["t1_resonant"] = purcell_lifetime(0.0, cavity)
    result.derived["enhancement_ratio"] = purcell_lifetime(far, cavity) / purcell_lifetime(0.0, cavity)
    result.derived["q_factor"] = cavity.q_factor
    return result


def _mollow_start(spectrum: Spectrum):
    energies = spectrum.energies
    density = np.asarray(spectrum.density, dtype=float)
    # noise bumps on the central flank must not pass for side peaks
    peaks, _ = find_peaks(density, prominence=MOLLOW_PEAK_PROMINENCE * np.ptp(density))
    if peaks.size == 0:
        peaks = np.array([int(np.argmax(density))])
    by_height = peaks[np.argsort(density[peaks])[::-1]]
    central = int(by_height[0])
    center = float(energies[central])
    widths = peak_widths(density, [central], rel_height=0.5)[0]
    gamma = max(float(widths[0]) * spectrum.omega_step / 2.0, spectrum.omega_step)
    sides = [p for p in by_height[1:] if abs(energies[p] - center) > gamma]
    rabi = float(np.mean([abs(energies[p] - center) for p in sides[:2]])) if sides else 0.0
    amplitude = float(np.sum(density) * spectrum.omega_step)
    return {"gamma": gamma, "rabi_energy": rabi, "amplitude": amplitude, "center": center}


def fit_mollow(spectrum: Spectrum, init: dict = None, bounds: dict = None, budget: int = DEFAULT_BUDGET) -> FitResult:
    """
    Fit the three-Lorentzian resonance fluorescence spectrum

    The triplet is compared with a single Lorentzian. When the Rabi energy
    falls below the side-peak half-width 3*gamma/2, or the single line fits
    nearly as well, the result is flagged triplet_degenerate and rabi_energy
    is reported as NaN.

    Returns
    -------
    FitResult
        Parameters gamma (µeV), rabi_energy (µeV), amplitude, center; derived
        gamma_sp in ps^-1 and the single-Lorentzian residual
    """
    energies = spectrum.energies
    density = np.asarray(spectrum.density, dtype=float)
    if np.ptp(density) == 0:
        raise DegenerateDataError("spectrum is flat and carries no information")
    start = _mollow_start(spectrum)
    start.update(init or {})
    span = min(start["center"] - energies[0], energies[-1] - start["center"])
    if span < start["rabi_energy"] + 5.0 * start["gamma"]:
        raise ParameterError(
            f"spectrum spans +/-{span:.3g} µeV around the line, need beyond "
            f"{start['rabi_energy'] + 5.0 * start['gamma']:.3g} µeV"
        )
    width = energies[-1] - energies[0]
    limits = {
        "gamma": (1e-6, width),
        "rabi_energy": (0.0, width),
        "amplitude": (0.0, np.inf),
        "center": (energies[0], energies[-1]),
    }
    limits.update(bounds or {})

    def evaluate(values):
        return values["amplitude"] * mollow_density(
            energies, max(values["gamma"], 1e-9), max(values["rabi_energy"], 0.0), values["center"]
        ) - density

    result = _minimize("mollow", evaluate, MOLLOW_PARAMETERS, set(MOLLOW_PARAMETERS), start, limits, budget)

    single_start = {"fwhm": 2.0 * start["gamma"], "amplitude": start["amplitude"], "center": start["center"]}
    single_limits = {"fwhm": (1e-6, width), "amplitude": (0.0, np.inf), "center": limits["center"]}

    def evaluate_single(values):
        return values["amplitude"] * lorentzian_density(energies, max(values["fwhm"], 1e-9), values["center"]) - density

    single = _minimize("lorentzian", evaluate_single, ("fwhm", "amplitude", "center"),
                       {"fwhm", "amplitude", "center"}, single_start, single_limits, budget)
    gamma = result.parameters["gamma"]
    result.derived["gamma_sp"] = gamma / HBAR
    result.derived["single_lorentzian_residual"] = single.residual
    if (
        result.parameters["rabi_energy"] < 1.5 * gamma
        or single.residual <= TRIPLET_RESIDUAL_MARGIN * result.residual
    ):
        result.flags.append(TRIPLET_DEGENERATE)
        result.parameters["rabi_energy"] = math.nan
        result.uncertainties.pop("rabi_energy", None)
        logger.warning("spectrum is consistent with a single line; no Rabi splitting reported")
    return result


def fit_power_calibration(powers, rabi_energies) -> FitResult:
    """
    Slope c of hbar*Omega = c * sqrt(P) by least squares through the origin

    derived holds r_squared of the linear regression of hbar*Omega on sqrt(P).
    """
    powers = np.asarray(powers, dtype=float)
    rabi_energies = np.asarray(rabi_energies, dtype=float)
    if powers.shape != rabi_energies.shape or len(powers) < 2:
        raise ParameterError("need at least two matching (power, rabi energy) points")
    if np.any(powers < 0):
        raise ParameterError("excitation power must be non-negative")
    if not np.sum(powers) > 0:
        raise DegenerateDataError("all powers are zero")
    root = np.sqrt(powers)
    slope = float(np.sum(root * rabi_energies) / np.sum(powers))
    residuals = rabi_energies - slope * root
    residual = float(np.sum(residuals ** 2))
    error = math.sqrt(residual / (len(powers) - 1) / np.sum(powers))
    result = FitResult(
        kind="power_calibration",
        parameters={"calibration": slope},
        free=("calibration",),
        residual=residual,
        iterations=1,
        converged=True,
        budget=1,
        covariance_estimate=np.array([[error ** 2]]),
        uncertainties={"calibration": error},
    )
    result.derived["r_squared"] = float(linregress(root, rabi_energies).rvalue ** 2)
    return result
