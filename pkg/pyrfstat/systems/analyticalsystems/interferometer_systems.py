"""Two-photon interference in an asymmetric fibre Mach-Zehnder interferometer"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from pyrfstat.errors import GridMismatchError, ParameterError
from pyrfstat.instrument import mix_background
from pyrfstat.systems.analyticalsystems.analytical_systems import g2_driven
from pyrfstat.units import (
    CorrelationCurve,
    DriveParams,
    EmitterParams,
    GridSpec,
    InterferometerParams,
    _frozen_array,
)

logger = logging.getLogger(__name__)

# Cross-polarised values below this leave the visibility undefined
VISIBILITY_FLOOR = 1e-9


def hom_raw_asymptote(ifo: InterferometerParams) -> float:
    """Large-delay value of the cross-polarised expression, 1 for balanced couplers"""
    return 4.0 * (ifo.t1c ** 2 + ifo.r1 ** 2) * ifo.r2 * ifo.t2c + 4.0 * ifo.r1 * ifo.t1c * (
        ifo.t2c ** 2 + ifo.r2 ** 2
    )


def g2_cross(tau, base_g2, ifo: InterferometerParams):
    """
    Coincidences behind the interferometer for distinguishable photons

    Parameters
    ----------
    tau : float or array-like
        Delay between the two output ports, ps
    base_g2 : callable
        Vectorised g2 of the source, tau -> value
    ifo : InterferometerParams
        Coupler coefficients and arm delay

    Returns
    -------
    float or np.ndarray
        Same-arm term at tau plus the two cross-arm terms shifted by -/+ delay
    """
    tau = np.asarray(tau, dtype=float)
    same_arm = 4.0 * (ifo.t1c ** 2 + ifo.r1 ** 2) * ifo.r2 * ifo.t2c
    cross_arm = 4.0 * ifo.r1 * ifo.t1c
    result = same_arm * np.asarray(base_g2(tau), dtype=float)
    if cross_arm > 0:
        result = result + cross_arm * (
            ifo.t2c ** 2 * np.asarray(base_g2(tau - ifo.delay), dtype=float)
            + ifo.r2 ** 2 * np.asarray(base_g2(tau + ifo.delay), dtype=float)
        )
    if result.ndim == 0:
        return float(result)
    return result


def interference_factor(tau, t2: float, overlap: float):
    """1 - V exp(-gamma |tau|) with gamma = 2/T2"""
    return 1.0 - overlap * np.exp(-2.0 * np.abs(np.asarray(tau, dtype=float)) / t2)


def g2_parallel(tau, base_g2, ifo: InterferometerParams, emitter: EmitterParams):
    """
    Coincidences for co-polarised photons

    The whole cross-polarised expression is multiplied by the two-photon
    interference factor.
    """
    result = np.asarray(g2_cross(tau, base_g2, ifo)) * interference_factor(tau, emitter.t2, ifo.overlap)
    if result.ndim == 0:
        return float(result)
    return result


@dataclass(frozen=True)
class VisibilityCurve:
    """
    Two-photon interference visibility on a delay grid

    values is NaN where the cross-polarised curve falls below VISIBILITY_FLOOR;
    defined marks the bins that carry a value. Measured data can give negative
    visibilities, so unlike CorrelationCurve values are not clipped.
    """

    tau_start: float
    tau_step: float
    values: np.ndarray = field(repr=False)
    defined: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_array(self.values))
        object.__setattr__(self, "defined", _frozen_array(self.defined, dtype=bool))

    @property
    def taus(self) -> np.ndarray:
        return self.tau_start + self.tau_step * np.arange(len(self.values))

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.tau_start, self.tau_step, len(self.values))

    def value_at(self, tau: float) -> float:
        index = int(round((tau - self.tau_start) / self.tau_step))
        index = min(max(index, 0), len(self.values) - 1)
        return float(self.values[index])

    def peak(self) -> float:
        """Largest defined visibility"""
        if not np.any(self.defined):
            return math.nan
        return float(np.max(self.values[self.defined]))


def visibility(g2_cross_curve: CorrelationCurve, g2_parallel_curve: CorrelationCurve) -> VisibilityCurve:
    """V_HOM = (g2_cross - g2_parallel) / g2_cross, element-wise"""
    if not g2_cross_curve.same_grid(g2_parallel_curve):
        raise GridMismatchError("cross and parallel curves must share a delay grid")
    cross = g2_cross_curve.values
    defined = cross >= VISIBILITY_FLOOR
    values = np.full(len(cross), np.nan)
    values[defined] = (cross[defined] - g2_parallel_curve.values[defined]) / cross[defined]
    undefined = int(np.count_nonzero(~defined))
    if undefined:
        logger.warning("visibility undefined in %d bins where g2_cross < %g", undefined, VISIBILITY_FLOOR)
    return VisibilityCurve(g2_cross_curve.tau_start, g2_cross_curve.tau_step, values, defined)


def max_cw_visibility(t2: float, detector_response: float) -> float:
    """Largest visibility observable with a detector of time resolution detector_response"""
    if not t2 > 0:
        raise ParameterError(f"t2 must be positive, got {t2}")
    if detector_response < 0:
        raise ParameterError(f"detector response must be non-negative, got {detector_response}")
    if detector_response == 0:
        return 1.0
    return min(1.0, t2 / (2.0 * detector_response))


def renormalize_hom(curve: CorrelationCurve, ifo: InterferometerParams) -> CorrelationCurve:
    """Divide by the raw large-delay asymptote so unbalanced setups tend to one"""
    asymptote = hom_raw_asymptote(ifo)
    if asymptote <= 0:
        raise ParameterError("interferometer passes no coincidences")
    return CorrelationCurve(curve.tau_start, curve.tau_step, curve.values / asymptote,
                            None if curve.errors is None else curve.errors / asymptote)


def hom_curves(emitter: EmitterParams, drive: DriveParams, ifo: InterferometerParams, grid: GridSpec, rho: float = 1.0):
    """
    Cross- and co-polarised model curves for a background-mixed source

    Returns
    -------
    tuple of CorrelationCurve
        (cross, parallel) on grid
    """
    def base_g2(t):
        return mix_background(g2_driven(emitter, drive, t), rho)

    taus = grid.values()
    cross = CorrelationCurve.from_grid(grid, g2_cross(taus, base_g2, ifo))
    parallel = CorrelationCurve.from_grid(grid, g2_parallel(taus, base_g2, ifo, emitter))
    return cross, parallel


def system05_hom_cross__t1_t2_rabi_energy_r1_r2_delay_tau__g2(t1, t2, rabi_energy, r1, r2, delay, tau):
    emitter, drive = EmitterParams(t1, t2), DriveParams(rabi_energy)
    ifo = InterferometerParams(r1, 1.0 - r1, r2, 1.0 - r2, delay)
    return g2_cross(tau, lambda t: g2_driven(emitter, drive, t), ifo)


def system06_hom_parallel__t1_t2_rabi_energy_r1_r2_delay_overlap_tau__g2(t1, t2, rabi_energy, r1, r2, delay, overlap, tau):
    emitter, drive = EmitterParams(t1, t2), DriveParams(rabi_energy)
    ifo = InterferometerParams(r1, 1.0 - r1, r2, 1.0 - r2, delay, overlap)
    return g2_parallel(tau, lambda t: g2_driven(emitter, drive, t), ifo, emitter)
