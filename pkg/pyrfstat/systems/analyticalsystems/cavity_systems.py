"""Weak-coupling micropillar cavity: mode linewidth and Purcell-shortened lifetime"""

from dataclasses import dataclass

import numpy as np

from pyrfstat.errors import ParameterError

# Fundamental mode energy of the 1.75 µm pillar, µeV
DEFAULT_MODE_ENERGY = 1.357e6


def cavity_linewidth(mode_energy: float, q_factor: float) -> float:
    """Mode FWHM kappa = E/Q in µeV"""
    if not mode_energy > 0 or not q_factor > 0:
        raise ParameterError(
            f"mode energy and Q must be positive, got {mode_energy}, {q_factor}"
        )
    return mode_energy / q_factor


@dataclass(frozen=True)
class CavityParams:
    """
    Cavity mode and its empirical Purcell enhancement

    Parameters
    ----------
    q_factor : float
        Quality factor E/kappa
    mode_energy : float
        Mode energy in µeV
    f_eff : float
        Effective enhancement of the decay rate on resonance
    t1_off : float
        Lifetime far from the mode, ps
    """

    q_factor: float
    mode_energy: float = DEFAULT_MODE_ENERGY
    f_eff: float = 0.0
    t1_off: float = 1000.0

    def __post_init__(self):
        if not self.q_factor > 0:
            raise ParameterError(f"q_factor must be positive, got {self.q_factor}")
        if not self.mode_energy > 0:
            raise ParameterError(f"mode_energy must be positive, got {self.mode_energy}")
        if not self.f_eff >= 0:
            raise ParameterError(f"f_eff must be non-negative, got {self.f_eff}")
        if not self.t1_off > 0:
            raise ParameterError(f"t1_off must be positive, got {self.t1_off}")

    @classmethod
    def from_kappa(cls, kappa: float, f_eff: float, t1_off: float, mode_energy: float = DEFAULT_MODE_ENERGY):
        if not kappa > 0:
            raise ParameterError(f"kappa must be positive, got {kappa}")
        return cls(mode_energy / kappa, mode_energy, f_eff, t1_off)

    @property
    def kappa(self) -> float:
        return cavity_linewidth(self.mode_energy, self.q_factor)


def lorentzian_overlap(detuning, kappa: float):
    half = (kappa / 2.0) ** 2
    return half / (half + np.asarray(detuning, dtype=float) ** 2)


def purcell_lifetime(detuning, cavity: CavityParams):
    """
    Radiative lifetime at emitter-mode detuning (µeV)

    T1 = t1_off / (1 + f_eff * L), L the cavity Lorentzian normalised to one on
    resonance.
    """
    result = cavity.t1_off / (1.0 + cavity.f_eff * lorentzian_overlap(detuning, cavity.kappa))
    if np.ndim(result) == 0:
        return float(result)
    return result


def purcell_enhancement_ratio(cavity: CavityParams, detuning: float) -> float:
    """Lifetime at detuning relative to the lifetime on resonance"""
    return purcell_lifetime(detuning, cavity) / purcell_lifetime(0.0, cavity)


def solve_purcell_two_point(kappa: float, first, second, mode_energy: float = DEFAULT_MODE_ENERGY) -> CavityParams:
    """
    Enhancement and off-resonance lifetime through two (detuning, lifetime) points

    Parameters
    ----------
    kappa : float
        Cavity FWHM in µeV, held fixed
    first, second : tuple
        (detuning µeV, lifetime ps) anchors

    Returns
    -------
    CavityParams
        Cavity reproducing both anchors exactly
    """
    (d_a, t_a), (d_b, t_b) = first, second
    l_a = float(lorentzian_overlap(d_a, kappa))
    l_b = float(lorentzian_overlap(d_b, kappa))
    denominator = t_a * l_a - t_b * l_b
    if denominator == 0:
        raise ParameterError("two-point solve needs anchors at distinct detunings")
    f_eff = (t_b - t_a) / denominator
    t1_off = t_a * (1.0 + f_eff * l_a)
    if f_eff < 0 or t1_off <= 0:
        raise ParameterError(
            "anchors are inconsistent with a lifetime that shortens towards resonance"
        )
    return CavityParams.from_kappa(kappa, f_eff, t1_off, mode_energy)


def max_photon_rate(t1: float) -> float:
    """Saturated photon rate 1/T1 in GHz for T1 in ps"""
    if not t1 > 0:
        raise ParameterError(f"t1 must be positive, got {t1}")
    return 1000.0 / t1


def system04_purcell__detuning_kappa_f_eff_t1_off__t1(detuning, kappa, f_eff, t1_off):
    return purcell_lifetime(detuning, CavityParams.from_kappa(kappa, f_eff, t1_off))
