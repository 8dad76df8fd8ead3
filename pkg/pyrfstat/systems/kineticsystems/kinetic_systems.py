import numpy as np
import mpmath
from scipy.integrate import solve_ivp

from pyrfstat.errors import ParameterError
from pyrfstat.units import HBAR, DriveParams, EmitterParams

# Bloch vector (u, v, w) with w = rho_ee - rho_gg, starting in the ground state
GROUND_STATE = (0.0, 0.0, -1.0)


def bloch_equations(y, t1, t2, rabi):
    """Optical Bloch equations for H = (Omega/2) sigma_x, rates in ps^-1"""
    u, v, w = y
    dudt = -u / t2
    dvdt = -v / t2 - rabi * w
    dwdt = rabi * v - (w + 1.0) / t1
    return [dudt, dvdt, dwdt]


def _relaxation_horizon(t1, t2):
    return 50.0 * max(t1, t2)


def _integrate(t1, t2, rabi, end):
    if end <= 0:
        return np.array(GROUND_STATE)
    return solve_ivp(
        lambda t, y: bloch_equations(y, t1, t2, rabi),
        (0.0, end),
        list(GROUND_STATE),
        rtol=1e-12,
        atol=1e-12,
    ).y[:, -1]


# Driven two-level emitter relaxing from the ground state
def system01_bloch__t1_t2_rabi_energy__ee(t1, t2, rabi_energy, interval=None):
    if interval is None:
        interval = (0.0, _relaxation_horizon(t1, t2))
    ode_result = _integrate(t1, t2, rabi_energy / HBAR, interval[1] - interval[0])
    return {
        "u": ode_result[0],
        "v": ode_result[1],
        "w": ode_result[2],
        "ee": (1.0 + ode_result[2]) / 2.0,
    }


# Quantum regression: excited population tau after a photon emission
def system02_bloch_regression__t1_t2_rabi_energy_tau__g2(t1, t2, rabi_energy, tau):
    rabi = rabi_energy / HBAR
    steady = system01_bloch__t1_t2_rabi_energy__ee(t1, t2, rabi_energy)["ee"]
    if steady <= 0:
        raise ParameterError("g2 is undefined without drive")
    ee = (1.0 + _integrate(t1, t2, rabi, abs(tau))[2]) / 2.0
    return {"ee": ee, "g2": ee / steady}


def bloch_population(emitter: EmitterParams, drive: DriveParams, interval=None) -> float:
    """
    Excited-state population at the end of interval by direct integration

    Parameters
    ----------
    emitter : EmitterParams
    drive : DriveParams
    interval : tuple, optional
        (start, end) in ps, defaults to 50 times the longer of T1 and T2 so the
        result is the steady state

    Returns
    -------
    float
        rho_ee at the end of the interval
    """
    return float(
        system01_bloch__t1_t2_rabi_energy__ee(emitter.t1, emitter.t2, drive.rabi_energy, interval)["ee"]
    )


def bloch_generator(t1, t2, rabi):
    """Homogeneous 4x4 generator acting on (u, v, w, 1)"""
    return mpmath.matrix(
        [
            [-1 / mpmath.mpf(t2), 0, 0, 0],
            [0, -1 / mpmath.mpf(t2), -mpmath.mpf(rabi), 0],
            [0, mpmath.mpf(rabi), -1 / mpmath.mpf(t1), -1 / mpmath.mpf(t1)],
            [0, 0, 0, 0],
        ]
    )


def g2_quantum_regression(emitter: EmitterParams, drive: DriveParams, tau, dps=30):
    """
    g2 from the matrix exponential of the Bloch generator

    After a detection the emitter is in the ground state; g2(tau) is the
    excited population a time |tau| later over its steady-state value.
    Evaluated in mpmath at dps significant digits, independent of the
    closed form.
    """
    s = drive.rabi ** 2 * emitter.t1 * emitter.t2
    if s <= 0:
        raise ParameterError("g2 is undefined without drive")
    taus = np.atleast_1d(np.abs(np.asarray(tau, dtype=float)))
    result = np.empty(len(taus))
    with mpmath.workdps(dps):
        generator = bloch_generator(emitter.t1, emitter.t2, drive.rabi)
        start = mpmath.matrix([0, 0, -1, 1])
        steady = mpmath.mpf(s) / 2 / (1 + mpmath.mpf(s))
        for index, t in enumerate(taus):
            state = mpmath.expm(generator * mpmath.mpf(t)) * start
            result[index] = float((1 + state[2]) / 2 / steady)
    if np.ndim(tau) == 0:
        return float(result[0])
    return result
