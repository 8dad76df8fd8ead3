"""
Quantum-jump Monte Carlo of the driven two-level emitter

Photon click streams are generated by the Monte-Carlo wave-function method and
routed through beam splitters and the Mach-Zehnder interferometer at click
level. These are independent stochastic checks of the closed forms.
"""

import logging
import math
import multiprocessing
from dataclasses import dataclass
from typing import Optional

import numpy as np

from pyrfstat.errors import ParameterError
from pyrfstat.units import ClickStream, DriveParams, EmitterParams, InterferometerParams

logger = logging.getLogger(__name__)

# Integrator steps evaluated per vectorised norm check
CHUNK_STEPS = 512
# Jump times are bisected to this fraction of the integrator step
BISECTION_TOLERANCE = 1e-3
# Steps per shortest time scale (T1, T2 or a Rabi period)
STEPS_PER_TIMESCALE = 50

ORTHOGONAL = "orthogonal"
PARALLEL = "parallel"

SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
GROUND = np.array([1.0, 0.0], dtype=complex)


def max_time_step(emitter: EmitterParams, drive: DriveParams) -> float:
    """Largest integrator step accepted for the given emitter and drive"""
    rabi_period = 2.0 * math.pi / drive.rabi if drive.rabi > 0 else math.inf
    return min(emitter.t1, emitter.t2, rabi_period) / STEPS_PER_TIMESCALE


@dataclass(frozen=True)
class TrajectoryConfig:
    """
    Monte-Carlo run description

    Parameters
    ----------
    emitter : EmitterParams
    drive : DriveParams
    duration : float
        Simulated time in ps
    seed : int
        Root seed; batch generators are spawned from it
    time_step : float, optional
        Integrator step in ps, defaults to max_time_step
    batches : int
        Independent trajectories, each covering duration / batches and starting
        in the ground state
    workers : int
        Processes running batches; results do not depend on it
    """

    emitter: EmitterParams
    drive: DriveParams
    duration: float
    seed: int = 0
    time_step: Optional[float] = None
    batches: int = 1
    workers: int = 1

    def __post_init__(self):
        if not self.duration > 0:
            raise ParameterError(f"duration must be positive, got {self.duration}")
        limit = max_time_step(self.emitter, self.drive)
        if self.time_step is None:
            object.__setattr__(self, "time_step", limit)
        elif not 0 < self.time_step <= limit * (1.0 + 1e-12):
            raise ParameterError(
                f"time_step must lie in (0, {limit:.6g}] ps for these parameters, got {self.time_step}"
            )
        if self.batches < 1:
            raise ParameterError(f"batches must be at least 1, got {self.batches}")
        if self.workers < 1:
            raise ParameterError(f"workers must be at least 1, got {self.workers}")
        if self.seed < 0:
            raise ParameterError(f"seed must be non-negative, got {self.seed}")

    @property
    def dephasing_rate(self) -> float:
        """Rate of sigma_z jumps, half the pure dephasing rate 1/T2*"""
        return 0.5 / self.emitter.t2_star


def effective_generator(gamma0: float, dephasing: float, rabi: float) -> np.ndarray:
    """A in d(c_g, c_e)/dt = A (c_g, c_e) for H_eff = (Omega/2) sigma_x - i/2 sum L^dag L"""
    return np.array(
        [
            [-0.5 * dephasing, -0.5j * rabi],
            [-0.5j * rabi, -0.5 * (gamma0 + dephasing)],
        ],
        dtype=complex,
    )


def rk4_propagator(generator: np.ndarray, step: float) -> np.ndarray:
    """One classical Runge-Kutta step of a linear system as a matrix"""
    x = step * generator
    x2 = x @ x
    x3 = x2 @ x
    return np.eye(2) + x + x2 / 2.0 + x3 / 6.0 + (x3 @ x) / 24.0


def _propagator_powers(generator, step, count):
    single = rk4_propagator(generator, step)
    powers = np.empty((count, 2, 2), dtype=complex)
    powers[0] = single
    for k in range(1, count):
        powers[k] = single @ powers[k - 1]
    return powers


def _norm2(state) -> float:
    return float(state[0].real ** 2 + state[0].imag ** 2 + state[1].real ** 2 + state[1].imag ** 2)


def _bisect_jump(generator, state, threshold, step):
    lo, hi = 0.0, step
    while hi - lo > BISECTION_TOLERANCE * step:
        mid = 0.5 * (lo + hi)
        if _norm2(rk4_propagator(generator, mid) @ state) < threshold:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _run_trajectory(emitter, drive, dephasing, duration, step, seed_sequence):
    rng = np.random.default_rng(seed_sequence)
    gamma0 = emitter.gamma0
    generator = effective_generator(gamma0, dephasing, drive.rabi)
    powers = _propagator_powers(generator, step, CHUNK_STEPS)
    state = GROUND.copy()
    threshold = rng.random()
    t = 0.0
    clicks = []
    dephasing_jumps = 0
    while t < duration:
        states = powers @ state
        norms = np.einsum("ij,ij->i", states.real, states.real) + np.einsum(
            "ij,ij->i", states.imag, states.imag
        )
        below = np.flatnonzero(norms < threshold)
        if below.size == 0:
            t += CHUNK_STEPS * step
            threshold /= norms[-1]
            state = states[-1] / math.sqrt(norms[-1])
            continue
        k = int(below[0])
        start = state if k == 0 else states[k - 1]
        offset = _bisect_jump(generator, start, threshold, step)
        t_jump = t + k * step + offset
        if t_jump >= duration:
            break
        jumped = rk4_propagator(generator, offset) @ start
        radiative = gamma0 * (abs(jumped[1]) ** 2)
        dephasing_weight = dephasing * _norm2(jumped)
        if rng.random() * (radiative + dephasing_weight) < radiative:
            clicks.append(t_jump)
            state = GROUND.copy()
        else:
            dephasing_jumps += 1
            state = SIGMA_Z @ jumped
            state = state / math.sqrt(_norm2(state))
        t = t_jump
        threshold = rng.random()
    logger.debug("trajectory of %g ps: %d clicks, %d dephasing jumps", duration, len(clicks), dephasing_jumps)
    return np.asarray(clicks, dtype=float)


def _run_batch(arguments):
    return _run_trajectory(*arguments)


def separate_ties(timestamps) -> np.ndarray:
    """Round to integer ps and push equal timestamps apart by 1 ps"""
    t = np.rint(np.sort(np.asarray(timestamps, dtype=float))).astype(np.int64)
    index = np.arange(len(t), dtype=np.int64)
    separated = np.maximum.accumulate(t - index) + index
    moved = int(np.count_nonzero(separated != t))
    if moved:
        logger.warning("moved %d coincident timestamps by whole picoseconds", moved)
    return separated


def _bounded_stream(channel, times, duration):
    timestamps = separate_ties(times)
    limit = math.floor(duration)
    if timestamps.size and timestamps[-1] > limit:
        timestamps = timestamps[timestamps <= limit]
    return ClickStream(channel, timestamps, duration)


def simulate_clicks(cfg: TrajectoryConfig, channel: int = 0) -> ClickStream:
    """
    Photon emission timestamps of one quantum-jump trajectory

    The two-amplitude state evolves under the non-Hermitian generator with a
    fixed-step fourth-order Runge-Kutta propagator; a jump occurs when the
    squared norm falls below a uniform random threshold. Radiative jumps
    (rate gamma0 |c_e|^2) record a click and reset to the ground state,
    dephasing jumps (sigma_z, rate 1/(2 T2*)) only flip the relative phase.

    Parameters
    ----------
    cfg : TrajectoryConfig
    channel : int
        Channel of the returned stream

    Returns
    -------
    ClickStream
        Integer-ps timestamps over [0, cfg.duration]
    """
    batch_duration = cfg.duration / cfg.batches
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.batches)
    arguments = [
        (cfg.emitter, cfg.drive, cfg.dephasing_rate, batch_duration, cfg.time_step, child)
        for child in children
    ]
    if cfg.workers > 1 and cfg.batches > 1:
        with multiprocessing.Pool(min(cfg.workers, cfg.batches)) as pool:
            results = pool.map(_run_batch, arguments)
    else:
        results = [_run_batch(a) for a in arguments]
    times = np.concatenate(
        [batch * batch_duration + clicks for batch, clicks in enumerate(results)]
    )
    logger.info("simulated %d clicks over %g ps in %d batches", len(times), cfg.duration, cfg.batches)
    return _bounded_stream(channel, times, cfg.duration)


def split_stream(s: ClickStream, r: float, seed: int):
    """
    Route each click independently to the first output with probability r

    Returns
    -------
    tuple of ClickStream
        Channels 0 and 1, same duration as the input
    """
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"splitting ratio must lie in [0, 1], got {r}")
    rng = np.random.default_rng(seed)
    first = rng.random(len(s)) < r
    return (
        ClickStream(0, s.timestamps[first], s.duration),
        ClickStream(1, s.timestamps[~first], s.duration),
    )


def simulate_mz(s: ClickStream, ifo: InterferometerParams, mode: str, seed: int, t2: Optional[float] = None):
    """
    Send a click stream through the unbalanced Mach-Zehnder interferometer

    Each click takes the short arm with probability r1 or the long arm (extra
    ifo.delay) and leaves the second coupler through port 0 with probability
    r2. In parallel mode, consecutive photons at the second coupler that came
    through different arms and would leave through different ports coalesce with
    probability V exp(-2 |dt| / T2); the later photon then follows the earlier
    one. This thinning reproduces the shape of the co-polarised correlation
    and is a heuristic, not an amplitude simulation.

    Parameters
    ----------
    s : ClickStream
    ifo : InterferometerParams
    mode : str
        "orthogonal" or "parallel"
    seed : int
    t2 : float, optional
        Coherence time in ps, required in parallel mode

    Returns
    -------
    tuple of ClickStream
        Ports 0 and 1; every input click appears in exactly one port
    """
    if mode not in (ORTHOGONAL, PARALLEL):
        raise ParameterError(f"mode must be {ORTHOGONAL!r} or {PARALLEL!r}, got {mode!r}")
    if mode == PARALLEL and (t2 is None or not t2 > 0):
        raise ParameterError("parallel mode needs the emitter coherence time t2")
    rng = np.random.default_rng(seed)
    n = len(s)
    long_arm = rng.random(n) >= ifo.r1
    port_zero = rng.random(n) < ifo.r2
    delay = int(round(ifo.delay))
    arrivals = s.timestamps + delay * long_arm
    order = np.argsort(arrivals, kind="stable")
    arrivals, long_arm, port_zero = arrivals[order], long_arm[order], port_zero[order]
    if mode == PARALLEL and ifo.overlap > 0:
        port_zero = _coalesce(arrivals, long_arm, port_zero, ifo.overlap, t2, rng)
    duration = s.duration + delay
    return (
        _bounded_stream(0, arrivals[port_zero], duration),
        _bounded_stream(1, arrivals[~port_zero], duration),
    )


def _coalesce(arrivals, long_arm, port_zero, overlap, t2, rng):
    """Neighbouring photons from different arms bunch into one port, each photon in at most one pair"""
    port_zero = port_zero.copy()
    if len(arrivals) < 2:
        return port_zero
    separation = np.diff(arrivals).astype(float)
    candidate = (long_arm[1:] != long_arm[:-1]) & (port_zero[1:] != port_zero[:-1])
    accept = candidate & (rng.random(len(separation)) < overlap * np.exp(-2.0 * separation / t2))
    # within a run of accepted neighbouring pairs, every other pair from the run start
    index = np.arange(len(accept))
    opens = accept & ~np.concatenate(([False], accept[:-1]))
    run_start = np.maximum.accumulate(np.where(opens, index, 0))
    later = np.flatnonzero(accept & ((index - run_start) % 2 == 0)) + 1
    port_zero[later] = port_zero[later - 1]
    logger.debug("coalesced %d of %d candidate photon pairs", len(later), int(candidate.sum()))
    return port_zero


def waiting_times(stream: ClickStream) -> np.ndarray:
    """Intervals between consecutive clicks in ps"""
    return np.diff(stream.timestamps)
