"""Closed-form physics of a resonantly driven two-level emitter"""

import math
from dataclasses import dataclass

import numpy as np

from pyrfstat.errors import NumericalError, ParameterError
from pyrfstat.instrument import convolve_padded, gaussian_kernel
from pyrfstat.units import (
    HBAR,
    CorrelationCurve,
    DriveParams,
    EmitterParams,
    GridSpec,
    Spectrum,
)

# Below this |q| (ps^-1) g2 is evaluated with the degenerate (critically damped) form
Q_DEGENERATE = 1e-9
# Rounding may leave g2 this far below zero; anything lower is a model error
G2_NEGATIVE_TOLERANCE = 1e-9

OVERDAMPED = "overdamped"
DEGENERATE = "degenerate"
OSCILLATORY = "oscillatory"


@dataclass(frozen=True)
class G2Coefficients:
    """
    Decay rates of the second-order correlation function

    lambda_plus/lambda_minus = mean_lambda +/- q, all in ps^-1. q is real for an
    overdamped emitter and imaginary when Rabi oscillations appear.
    """

    lambda_plus: complex
    lambda_minus: complex
    q: complex
    mean_lambda: float

    @property
    def regime(self) -> str:
        if abs(self.q) < Q_DEGENERATE:
            return DEGENERATE
        if abs(self.q.imag) > abs(self.q.real):
            return OSCILLATORY
        return OVERDAMPED


def g2_coefficients(emitter: EmitterParams, drive: DriveParams) -> G2Coefficients:
    gamma0 = emitter.gamma0
    half_gamma = emitter.gamma / 2.0
    rabi = drive.rabi
    mean_lambda = -(gamma0 + half_gamma) / 2.0
    q_squared = (gamma0 - half_gamma) ** 2 / 4.0 - rabi ** 2
    if q_squared >= 0:
        q = complex(math.sqrt(q_squared), 0.0)
    else:
        q = complex(0.0, math.sqrt(-q_squared))
    return G2Coefficients(mean_lambda + q, mean_lambda - q, q, mean_lambda)


def g2_from_coefficients(coefficients: G2Coefficients, tau):
    """
    Evaluate g2 for given rates, switching to the degenerate limit at q ~ 0

    g2 = 1 + lambda_-/(2q) exp(|tau| lambda_+) - lambda_+/(2q) exp(|tau| lambda_-)
    """
    t = np.abs(np.asarray(tau, dtype=float))
    mean = coefficients.mean_lambda
    q = coefficients.q
    if abs(q) < Q_DEGENERATE:
        g2 = 1.0 + np.exp(mean * t) * (mean * t - 1.0)
    else:
        ratio = mean / q
        g2 = 1.0 - 0.5 * (
            (1.0 - ratio) * np.exp(coefficients.lambda_plus * t)
            + (1.0 + ratio) * np.exp(coefficients.lambda_minus * t)
        )
        g2 = np.real(g2)
    if np.any(g2 < -G2_NEGATIVE_TOLERANCE):
        raise NumericalError(f"g2 evaluated to {float(np.min(g2)):.3g}; check the decay rates")
    g2 = np.where(t == 0.0, 0.0, np.maximum(g2, 0.0))
    if g2.ndim == 0:
        return float(g2)
    return g2


def g2_driven(emitter: EmitterParams, drive: DriveParams, tau):
    """
    Second-order correlation of the resonantly driven two-level emitter

    Parameters
    ----------
    emitter : EmitterParams
        T1 and T2 of the emitter
    drive : DriveParams
        Rabi energy of the resonant drive
    tau : float or array-like
        Delay in ps, only |tau| matters

    Returns
    -------
    float or np.ndarray
        g2(tau), zero at tau = 0 and tending to one for large delays
    """
    return g2_from_coefficients(g2_coefficients(emitter, drive), tau)


def g2_curve(emitter: EmitterParams, drive: DriveParams, grid: GridSpec) -> CorrelationCurve:
    return CorrelationCurve.from_grid(grid, g2_driven(emitter, drive, grid.values()))


def saturation_parameter(emitter: EmitterParams, drive: DriveParams) -> float:
    """s = Omega^2 T1 T2"""
    return drive.rabi ** 2 * emitter.t1 * emitter.t2


def steady_state_population(emitter: EmitterParams, drive: DriveParams) -> float:
    s = saturation_parameter(emitter, drive)
    return 0.5 * s / (1.0 + s)


def emission_rate(emitter: EmitterParams, drive: DriveParams) -> float:
    """Photon emission rate gamma0 * rho_ee in ps^-1"""
    return emitter.gamma0 * steady_state_population(emitter, drive)


def first_rabi_maximum(drive: DriveParams) -> float:
    """Delay (ps) of the first g2 maximum in the strong-drive limit"""
    if drive.rabi <= 0:
        raise ParameterError("no Rabi oscillation without drive")
    return math.pi / drive.rabi


def rabi_from_power(power, calibration: float):
    """
    Rabi energy from excitation power, hbar*Omega = c * sqrt(P)

    Parameters
    ----------
    power : float or array-like
        Excitation power, arbitrary units
    calibration : float
        c in µeV per sqrt(power unit)
    """
    power = np.asarray(power, dtype=float)
    if np.any(power < 0):
        raise ParameterError("excitation power must be non-negative")
    if not calibration > 0:
        raise ParameterError(f"power calibration must be positive, got {calibration}")
    result = calibration * np.sqrt(power)
    if result.ndim == 0:
        return float(result)
    return result


def signal_to_background(power: float, emitter: EmitterParams, drive: DriveParams, laser_coeff: float) -> float:
    """
    Ratio of saturating fluorescence to linearly growing scattered laser light

    The drive supplies the power calibration; its own rabi_energy is ignored
    because the Rabi energy follows from the power.
    """
    if not power > 0:
        raise ParameterError(f"power must be positive, got {power}")
    if not laser_coeff > 0:
        raise ParameterError(f"laser_coeff must be positive, got {laser_coeff}")
    if drive.power_calibration is None:
        raise ParameterError("signal_to_background needs a drive power_calibration")
    driven = DriveParams(rabi_from_power(power, drive.power_calibration), drive.power_calibration)
    return emission_rate(emitter, driven) / (laser_coeff * power)


@dataclass(frozen=True)
class MollowParams:
    """
    Parameters of the strong-drive resonance fluorescence spectrum

    gamma_sp and rabi are rates in ps^-1 (rabi is the angular Omega); center is
    the line centre on the µeV axis.
    """

    gamma_sp: float
    rabi: float
    center: float = 0.0

    def __post_init__(self):
        if not self.gamma_sp > 0:
            raise ParameterError(f"gamma_sp must be positive, got {self.gamma_sp}")
        if not self.rabi >= 0:
            raise ParameterError(f"rabi must be non-negative, got {self.rabi}")

    @classmethod
    def from_energies(cls, gamma_energy: float, rabi_energy: float, center: float = 0.0):
        return cls(gamma_energy / HBAR, rabi_energy / HBAR, center)

    @property
    def gamma_energy(self) -> float:
        return self.gamma_sp * HBAR

    @property
    def rabi_energy(self) -> float:
        return self.rabi * HBAR


def mollow_density(energy, gamma_energy: float, rabi_energy: float, center: float = 0.0):
    """Three-Lorentzian Mollow density (1/µeV) on an energy axis"""
    x = np.asarray(energy, dtype=float) - center
    g = gamma_energy
    side_width = (1.5 * g) ** 2
    side = 3.0 * g / (8.0 * math.pi)
    return (
        side / ((x - rabi_energy) ** 2 + side_width)
        + (g / (2.0 * math.pi)) / (x ** 2 + g ** 2)
        + side / ((x + rabi_energy) ** 2 + side_width)
    )


def mollow_spectrum(p: MollowParams, grid: GridSpec) -> Spectrum:
    """
    Mollow triplet sampled on an energy grid

    Side peaks at +/- hbar*Omega carry a quarter of the area each with half-width
    3*gamma_sp/2, the central peak half of the area with half-width gamma_sp.
    """
    energies = grid.values()
    return Spectrum.from_grid(
        grid, mollow_density(energies + p.center, p.gamma_energy, p.rabi_energy, p.center)
    )


def lorentzian_density(energy, fwhm: float, center: float = 0.0):
    half = fwhm / 2.0
    x = np.asarray(energy, dtype=float) - center
    return (half / math.pi) / (x ** 2 + half ** 2)


def weak_drive_spectrum(emitter: EmitterParams, grid: GridSpec) -> Spectrum:
    """Single Lorentzian of FWHM 2*hbar/T2, the low-power resonance fluorescence line"""
    return Spectrum.from_grid(grid, lorentzian_density(grid.values(), 2.0 * HBAR / emitter.t2))


# Scanning Fabry-Perot resolution, µeV FWHM
FPI_RESOLUTION = 0.7


def broaden_spectrum(spectrum: Spectrum, resolution_fwhm: float = FPI_RESOLUTION) -> Spectrum:
    """Convolve a spectrum with a Gaussian spectrometer response of the given FWHM (µeV)"""
    if not resolution_fwhm > 0:
        raise ParameterError(f"resolution must be positive, got {resolution_fwhm}")
    kernel = gaussian_kernel(spectrum.omega_step, resolution_fwhm)
    return Spectrum(spectrum.omega_start, spectrum.omega_step, convolve_padded(spectrum.density, kernel))


# Query-style wrappers used by the CorrelationSystem registry


def system01_driven_tls__t1_t2_rabi_energy_tau__g2(t1, t2, rabi_energy, tau):
    return g2_driven(EmitterParams(t1, t2), DriveParams(rabi_energy), tau)


def system02_driven_tls__t1_t2_rabi_energy__ee(t1, t2, rabi_energy):
    return steady_state_population(EmitterParams(t1, t2), DriveParams(rabi_energy))


def system03_mollow__linewidth_rabi_energy_energy__density(linewidth, rabi_energy, energy):
    return float(mollow_density(energy, linewidth, rabi_energy))
