"""Gillespie (direct-method) sampling of the level-hopping process.

Used as an independent check of the master-equation spectrum: trajectories
are generated with exponential waiting times and the spectrum is estimated
from them without touching the eigen-decomposition.

Random numbers come from numpy's PCG64 bit generator seeded with the
user's integer seed, so a given (system, t_total, seed) always yields the
same trajectory.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .fluctuator import FluctuatorSystem

RNG_ALGORITHM = "numpy PCG64, Gillespie direct method"

_CHUNK = 65536


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Piecewise-constant level path: level ``levels[k]`` on [times[k], times[k+1])."""

    times: np.ndarray      # jump times, times[0] = 0, last entry = t_total
    levels: np.ndarray     # len(times) - 1 entries
    t_total: float
    seed: int
    short: bool            # t_total not >> slowest rate

    @property
    def n_jumps(self) -> int:
        return int(self.levels.size - 1)


def gillespie_sample(sys: FluctuatorSystem, t_total: float, seed: int,
                     initial_level: int | None = None) -> Trajectory:
    """Simulate the jump process for a time ``t_total`` (atomic units).

    The start level is drawn from the Boltzmann law unless given.  The
    result is flagged ``short`` when t_total * (smallest nonzero rate) < 100.
    """
    if sys.temperature <= 0:
        raise ValueError("Gillespie sampling needs T > 0 (the T = 0 chain is absorbing)")
    rates = np.asarray(sys.rates, dtype=float)
    exit_rate = rates.sum(axis=1)
    if np.any(exit_rate <= 0):
        raise ValueError("every level needs at least one outgoing transition")
    jump_cdf = np.cumsum(rates / exit_rate[:, None], axis=1)
    jump_cdf[:, -1] = 1.0
    rng = np.random.Generator(np.random.PCG64(seed))
    n = sys.n_levels
    level = int(rng.choice(n, p=sys.boltzmann())) if initial_level is None else int(initial_level)

    cdf_rows = [list(row) for row in jump_cdf]
    times = [np.zeros(1)]
    levels = []
    t = 0.0
    while True:
        waits_unit = rng.standard_exponential(_CHUNK)
        picks = rng.random(_CHUNK).tolist()
        seq = np.empty(_CHUNK, dtype=np.int64)
        for k in range(_CHUNK):
            seq[k] = level
            level = min(bisect_right(cdf_rows[level], picks[k]), n - 1)
        dts = waits_unit / exit_rate[seq]
        ends = t + np.cumsum(dts)
        stop = int(np.searchsorted(ends, t_total))
        if stop < _CHUNK:
            times.append(ends[:stop])
            levels.append(seq[: stop + 1])
            break
        times.append(ends)
        levels.append(seq)
        t = float(ends[-1])
    times = np.concatenate(times + [np.array([t_total])])
    levels = np.concatenate(levels)
    positive = rates[rates > 0]
    short = bool(t_total * positive.min() < 100.0)
    return Trajectory(times=times, levels=levels, t_total=float(t_total), seed=seed, short=short)


def empirical_occupation(traj: Trajectory, n_levels: int, n_batches: int = 20):
    """Time-averaged occupation and its batch-means standard error."""
    edges = np.linspace(0.0, traj.t_total, n_batches + 1)
    per_batch = np.zeros((n_batches, n_levels))
    for b in range(n_batches):
        per_batch[b] = _occupation_window(traj, n_levels, edges[b], edges[b + 1])
    p = per_batch.mean(axis=0)
    err = per_batch.std(axis=0, ddof=1) / np.sqrt(n_batches)
    return p, err


def _occupation_window(traj, n_levels, t0, t1):
    start = np.clip(traj.times[:-1], t0, t1)
    stop = np.clip(traj.times[1:], t0, t1)
    occ = np.bincount(traj.levels, weights=stop - start, minlength=n_levels)
    return occ / (t1 - t0)


def _segment_transform(starts, stops, values, omegas):
    """Fourier integral of a piecewise-constant signal at each omega."""
    out = np.empty(omegas.size, dtype=complex)
    for i, w in enumerate(omegas):
        if w == 0.0:
            out[i] = np.sum(values * (stops - starts))
        else:
            out[i] = np.sum(values * (np.exp(1j * w * stops) - np.exp(1j * w * starts))) / (1j * w)
    return out


def empirical_spectrum(traj: Trajectory, dipoles, omegas, n_segments: int = 400):
    """Segment-averaged periodogram of mu(t) - <mu>_traj.

    Returns ``(mean, standard_error)`` at each omega.  Each segment of
    length t_total / n_segments contributes |X(omega)|^2 / T_seg, whose
    expectation tends to S_mu(omega) once T_seg greatly exceeds the
    slowest relaxation time.
    """
    mu = np.asarray(dipoles, dtype=float)[traj.levels]
    omegas = np.asarray(omegas, dtype=float)
    dur = np.diff(traj.times)
    mean = float(np.sum(mu * dur) / traj.t_total)
    signal = mu - mean
    edges = np.linspace(0.0, traj.t_total, n_segments + 1)
    t_seg = edges[1] - edges[0]
    power = np.empty((n_segments, omegas.size))
    lo = np.searchsorted(traj.times, edges[:-1], side="right") - 1
    hi = np.searchsorted(traj.times, edges[1:], side="left")
    for s in range(n_segments):
        sl = slice(lo[s], hi[s])
        starts = np.clip(traj.times[:-1][sl], edges[s], edges[s + 1]) - edges[s]
        stops = np.clip(traj.times[1:][sl], edges[s], edges[s + 1]) - edges[s]
        x = _segment_transform(starts, stops, signal[sl], omegas)
        power[s] = np.abs(x) ** 2 / t_seg
    return power.mean(axis=0), power.std(axis=0, ddof=1) / np.sqrt(n_segments)


def empirical_autocorrelation(traj: Trajectory, dipoles, taus, dt: float):
    """C(tau) from mu(t) sampled every ``dt``; ``taus`` are rounded to multiples of dt."""
    grid = np.arange(0.0, traj.t_total, dt)
    idx = np.searchsorted(traj.times, grid, side="right") - 1
    mu = np.asarray(dipoles, dtype=float)[traj.levels[np.clip(idx, 0, traj.levels.size - 1)]]
    mu = mu - mu.mean()
    out = []
    for tau in np.atleast_1d(taus):
        lag = int(round(tau / dt))
        out.append(float(np.mean(mu[: mu.size - lag] * mu[lag:])) if lag < mu.size else np.nan)
    return np.array(out)
