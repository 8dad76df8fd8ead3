"""Physical constants, unit conversions and shared domain types

Canonical internal units are picoseconds for time, µeV for energy and ps^-1
for rates. Angular rates (Rabi frequency) are rad/ps internally.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from pyrfstat.errors import ClickStreamError, CoherenceInconsistencyError, ParameterError

# Planck constant in µeV/GHz
H_PLANCK = 4.135667696
# Reduced Planck constant in µeV*ps, and the same in µeV*ns
HBAR = 658.2119569
HBAR_NS = 0.6582119569

# Pure dephasing time of an emitter with no pure dephasing
NO_DEPHASING = math.inf

T2_TOLERANCE = 1e-9
COUPLER_TOLERANCE = 1e-12


def energy_to_frequency(e: float) -> float:
    """
    Convert an energy to an ordinary frequency

    Parameters
    ----------
    e : float
        Energy in µeV

    Returns
    -------
    float
        Frequency in GHz
    """
    return e / H_PLANCK


def frequency_to_energy(f: float) -> float:
    """Convert an ordinary frequency in GHz to an energy in µeV"""
    return f * H_PLANCK


def rabi_angular_frequency(e: float) -> float:
    """Rabi energy ħΩ (µeV) to angular frequency Ω in rad/ns"""
    if e < 0:
        raise ParameterError(f"Rabi energy must be non-negative, got {e}")
    return e / HBAR_NS


def rabi_energy_to_frequency(e: float) -> float:
    """
    Convert a Rabi energy ħΩ to the ordinary frequency Ω/2π

    Parameters
    ----------
    e : float
        Rabi energy in µeV

    Returns
    -------
    float
        Ω/2π in GHz
    """
    return rabi_angular_frequency(e) / (2.0 * math.pi)


def rabi_frequency_to_energy(f: float) -> float:
    """Ordinary frequency Ω/2π in GHz to Rabi energy ħΩ in µeV"""
    if f < 0:
        raise ParameterError(f"Rabi frequency must be non-negative, got {f}")
    return f * 2.0 * math.pi * HBAR_NS


def linewidth_to_t2(fwhm: float) -> float:
    """
    Coherence time from a Lorentzian linewidth

    Parameters
    ----------
    fwhm : float
        Full width at half maximum in µeV

    Returns
    -------
    float
        T2 = 2ħ/FWHM in ps
    """
    if not fwhm > 0:
        raise ParameterError(f"Linewidth must be positive, got {fwhm}")
    return 2.0 * HBAR / fwhm


def t2_to_linewidth(t2: float) -> float:
    """Lorentzian FWHM in µeV of a line with coherence time t2 (ps)"""
    if not t2 > 0:
        raise ParameterError(f"T2 must be positive, got {t2}")
    return 2.0 * HBAR / t2


def fourier_compose(t1: float, t2_star: float = NO_DEPHASING) -> float:
    """
    Combine radiative decay and pure dephasing into T2

    1/T2 = 1/(2 T1) + 1/T2*

    Parameters
    ----------
    t1 : float
        Radiative lifetime in ps
    t2_star : float
        Pure dephasing time in ps, or NO_DEPHASING

    Returns
    -------
    float
        T2 in ps, never larger than 2*T1
    """
    if not t1 > 0:
        raise ParameterError(f"T1 must be positive, got {t1}")
    if t2_star == NO_DEPHASING:
        return 2.0 * t1
    if not t2_star > 0:
        raise ParameterError(f"T2* must be positive, got {t2_star}")
    return 1.0 / (1.0 / (2.0 * t1) + 1.0 / t2_star)


def solve_t2_star(t1: float, t2: float) -> float:
    """
    Pure dephasing time from T1 and T2, the inverse of fourier_compose

    Returns NO_DEPHASING when T2 sits at the Fourier limit.
    """
    if not t1 > 0 or not t2 > 0:
        raise ParameterError(f"T1 and T2 must be positive, got {t1}, {t2}")
    if t2 > 2.0 * t1 * (1.0 + T2_TOLERANCE):
        raise CoherenceInconsistencyError(
            f"T2 = {t2} ps exceeds the Fourier limit 2*T1 = {2.0 * t1} ps"
        )
    inverse = 1.0 / t2 - 1.0 / (2.0 * t1)
    if inverse <= 0.0:
        return NO_DEPHASING
    return 1.0 / inverse


def coherence_fidelity(t1: float, t2: float) -> float:
    """T2/(2 T1), equal to 1 only for Fourier transform-limited emission"""
    if not t1 > 0 or not t2 > 0:
        raise ParameterError(f"T1 and T2 must be positive, got {t1}, {t2}")
    if t2 > 2.0 * t1 * (1.0 + T2_TOLERANCE):
        raise CoherenceInconsistencyError(
            f"T2 = {t2} ps exceeds the Fourier limit 2*T1 = {2.0 * t1} ps"
        )
    return min(1.0, t2 / (2.0 * t1))


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EmitterParams:
    """
    Radiative and coherence times of a two-level emitter

    Parameters
    ----------
    t1 : float
        Radiative lifetime in ps
    t2 : float
        Coherence time in ps, 0 < t2 <= 2*t1
    emission_energy : float, optional
        Absolute transition energy in µeV, metadata only
    """

    t1: float
    t2: float
    emission_energy: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.t1) and self.t1 > 0):
            raise ParameterError(f"t1 must be positive and finite, got {self.t1}")
        if not (math.isfinite(self.t2) and self.t2 > 0):
            raise ParameterError(f"t2 must be positive and finite, got {self.t2}")
        if self.t2 > 2.0 * self.t1 * (1.0 + T2_TOLERANCE):
            raise CoherenceInconsistencyError(
                f"t2 = {self.t2} ps exceeds the Fourier limit 2*t1 = {2.0 * self.t1} ps"
            )

    @classmethod
    def from_dephasing(cls, t1: float, t2_star: float = NO_DEPHASING, **kwargs):
        return cls(t1=t1, t2=fourier_compose(t1, t2_star), **kwargs)

    @property
    def gamma0(self) -> float:
        """Natural linewidth 1/T1 in ps^-1"""
        return 1.0 / self.t1

    @property
    def gamma(self) -> float:
        """Homogeneous linewidth 2/T2 in ps^-1"""
        return 2.0 / self.t2

    @property
    def t2_star(self) -> float:
        return solve_t2_star(self.t1, min(self.t2, 2.0 * self.t1))

    @property
    def fidelity(self) -> float:
        return coherence_fidelity(self.t1, self.t2)


@dataclass(frozen=True)
class DriveParams:
    """
    Resonant drive strength

    Parameters
    ----------
    rabi_energy : float
        ħΩ in µeV
    power_calibration : float, optional
        ħΩ per square root of excitation power, µeV / sqrt(power unit)
    """

    rabi_energy: float
    power_calibration: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.rabi_energy) and self.rabi_energy >= 0):
            raise ParameterError(
                f"rabi_energy must be non-negative, got {self.rabi_energy}"
            )
        if self.power_calibration is not None and not self.power_calibration > 0:
            raise ParameterError(
                f"power_calibration must be positive, got {self.power_calibration}"
            )

    @property
    def rabi(self) -> float:
        """Angular Rabi frequency Ω in rad/ps"""
        return self.rabi_energy / HBAR


@dataclass(frozen=True)
class InterferometerParams:
    """
    Asymmetric fibre Mach-Zehnder interferometer

    r1/t1c and r2/t2c are the intensity reflectivity and transmissivity of the
    first and second coupler. Photons reflected at the first coupler take the
    short arm, transmitted ones the long arm with extra delay (ps). overlap is
    the wave-function overlap V at the second coupler.
    """

    r1: float = 0.5
    t1c: float = 0.5
    r2: float = 0.5
    t2c: float = 0.5
    delay: float = 13000.0
    overlap: float = 0.0

    def __post_init__(self):
        for name in ("r1", "t1c", "r2", "t2c", "overlap"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must lie in [0, 1], got {value}")
        if abs(self.r1 + self.t1c - 1.0) > COUPLER_TOLERANCE:
            raise ParameterError(f"r1 + t1c must equal 1, got {self.r1 + self.t1c}")
        if abs(self.r2 + self.t2c - 1.0) > COUPLER_TOLERANCE:
            raise ParameterError(f"r2 + t2c must equal 1, got {self.r2 + self.t2c}")
        if not self.delay > 0:
            raise ParameterError(f"delay must be positive, got {self.delay}")

    @classmethod
    def balanced(cls, delay: float = 13000.0, overlap: float = 0.0):
        return cls(0.5, 0.5, 0.5, 0.5, delay, overlap)


@dataclass(frozen=True)
class IRFParams:
    """Gaussian instrument response with full width at half maximum fwhm (ps)"""

    fwhm: float = 400.0

    def __post_init__(self):
        if not (math.isfinite(self.fwhm) and self.fwhm > 0):
            raise ParameterError(f"IRF fwhm must be positive, got {self.fwhm}")

    @property
    def sigma(self) -> float:
        return self.fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of count points starting at start with spacing step"""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0:
            raise ParameterError(f"grid step must be positive, got {self.step}")
        if self.count < 1:
            raise ParameterError(f"grid needs at least one point, got {self.count}")

    @classmethod
    def symmetric(cls, half_width: float, step: float):
        """Grid from -half_width to +half_width that contains zero"""
        if not step > 0:
            raise ParameterError(f"grid step must be positive, got {step}")
        n_half = int(round(half_width / step))
        return cls(-n_half * step, step, 2 * n_half + 1)

    def values(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)


@dataclass(frozen=True)
class CorrelationCurve:
    """Correlation function sampled on a uniform delay grid (ps)"""

    tau_start: float
    tau_step: float
    values: np.ndarray = field(repr=False)
    errors: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if not self.tau_step > 0:
            raise ParameterError(f"tau_step must be positive, got {self.tau_step}")
        values = _frozen_array(self.values)
        if values.ndim != 1:
            raise ParameterError("curve values must be one dimensional")
        if not np.all(np.isfinite(values)):
            raise ParameterError("curve values must be finite")
        if np.any(values < 0):
            raise ParameterError("curve values must be non-negative")
        object.__setattr__(self, "values", values)
        if self.errors is not None:
            errors = _frozen_array(self.errors)
            if errors.shape != values.shape:
                raise ParameterError("curve errors must match the values")
            object.__setattr__(self, "errors", errors)

    @classmethod
    def from_grid(cls, grid: GridSpec, values, errors=None):
        return cls(grid.start, grid.step, values, errors)

    @property
    def taus(self) -> np.ndarray:
        return self.tau_start + self.tau_step * np.arange(len(self.values))

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.tau_start, self.tau_step, len(self.values))

    def same_grid(self, other: "CorrelationCurve") -> bool:
        return (
            len(self.values) == len(other.values)
            and math.isclose(self.tau_start, other.tau_start, rel_tol=1e-12, abs_tol=1e-9)
            and math.isclose(self.tau_step, other.tau_step, rel_tol=1e-12)
        )

    def value_at(self, tau: float) -> float:
        """Value at the grid point nearest to tau"""
        index = int(round((tau - self.tau_start) / self.tau_step))
        index = min(max(index, 0), len(self.values) - 1)
        return float(self.values[index])


@dataclass(frozen=True)
class Spectrum:
    """Spectral density (1/µeV) on a uniform energy grid relative to the line centre"""

    omega_start: float
    omega_step: float
    density: np.ndarray = field(repr=False)

    def __post_init__(self):
        if not self.omega_step > 0:
            raise ParameterError(f"omega_step must be positive, got {self.omega_step}")
        density = _frozen_array(self.density)
        if np.any(density < 0) or not np.all(np.isfinite(density)):
            raise ParameterError("spectral density must be finite and non-negative")
        object.__setattr__(self, "density", density)

    @classmethod
    def from_grid(cls, grid: GridSpec, density):
        return cls(grid.start, grid.step, density)

    @property
    def energies(self) -> np.ndarray:
        return self.omega_start + self.omega_step * np.arange(len(self.density))

    def integral(self) -> float:
        return float(trapezoid(self.density, dx=self.omega_step))


@dataclass(frozen=True)
class ClickStream:
    """
    Photon detection timestamps of one detector channel

    Timestamps are integer picoseconds, strictly increasing and within
    [0, duration].
    """

    channel: int
    timestamps: np.ndarray = field(repr=False)
    duration: float = 0.0

    def __post_init__(self):
        timestamps = np.asarray(self.timestamps)
        if timestamps.size and not np.all(timestamps == np.round(timestamps)):
            raise ClickStreamError("timestamps must be integer picoseconds")
        timestamps = _frozen_array(timestamps, dtype=np.int64)
        if timestamps.ndim != 1:
            raise ClickStreamError("timestamps must be one dimensional")
        if not self.duration >= 0:
            raise ClickStreamError(f"duration must be non-negative, got {self.duration}")
        if timestamps.size:
            steps = np.diff(timestamps)
            bad = np.flatnonzero(steps <= 0)
            if bad.size:
                raise ClickStreamError(
                    f"timestamps not strictly increasing at index {bad[0] + 1}",
                    index=int(bad[0] + 1),
                )
            if timestamps[0] < 0 or timestamps[-1] > self.duration:
                raise ClickStreamError(
                    f"timestamps must lie within [0, {self.duration}]"
                )
        object.__setattr__(self, "timestamps", timestamps)

    def __len__(self):
        return len(self.timestamps)

    @property
    def rate(self) -> float:
        """Mean click rate in ps^-1"""
        if self.duration <= 0:
            return 0.0
        return len(self.timestamps) / self.duration

    def with_channel(self, channel: int) -> "ClickStream":
        return ClickStream(channel, self.timestamps, self.duration)
