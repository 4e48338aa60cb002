"""Phonon-driven multi-level dipole fluctuator.

A bound adatom hops between vibrational levels |n> by absorbing and
emitting substrate phonons.  The level populations obey the Pauli master
equation dp/dt = Q p with Q[m, n] = Gamma_{n->m}.  Because the golden-rule
rates satisfy detailed balance, Q is similar to a symmetric matrix

    S = P^{-1/2} Q P^{1/2},   S[m, n] = sqrt(Q[m, n] Q[n, m]),

whose eigenvectors give the dipole autocorrelation as a sum of decaying
exponentials and the spectrum as a sum of Lorentzians,

    S_mu(omega) = sum_a w_a 2 lambda_a / (lambda_a^2 + omega^2).

The stationary (lambda = 0) mode carries <mu>^2 and is dropped, which is
the mean subtraction in the correlation function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse.csgraph import connected_components

from . import units
from .boundstates import BoundStateSet, level_dipoles, uprime_matrix
from .phonons import PhononModel, bose_occupation
from .potentials import PotentialModel


class PhononSilentError(RuntimeError):
    """No level pair has a transition frequency inside the phonon band."""


class NumericalDegeneracyError(RuntimeError):
    """Rate matrix is reducible or its eigen-decomposition is unreliable."""


@dataclass(frozen=True, eq=False)
class FluctuatorSystem:
    """Levels, dipoles and the full rate matrix ``rates[n, m] = Gamma_{n->m}``."""

    energies: np.ndarray
    dipoles: np.ndarray
    rates: np.ndarray
    temperature: float

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        mu = np.asarray(self.dipoles, dtype=float)
        r = np.array(self.rates, dtype=float)
        n = e.size
        if n < 2 or mu.shape != (n,) or r.shape != (n, n):
            raise ValueError("need >= 2 levels with matching dipoles and an n x n rate matrix")
        np.fill_diagonal(r, 0.0)
        if np.any(r < 0) or not np.all(np.isfinite(r)):
            raise ValueError("rates must be finite and non-negative")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        for name, arr in (("energies", e), ("dipoles", mu), ("rates", r)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_downward_rates(cls, energies, downward, dipoles, T):
        """Build from Gamma_{n->m} (n > m, lower triangle); upward rates
        follow from detailed balance at temperature ``T``."""
        e = np.asarray(energies, dtype=float)
        down = np.tril(np.asarray(downward, dtype=float), -1)
        if T == 0:
            up = np.zeros_like(down)
        else:
            gap = e[:, None] - e[None, :]
            up = down * np.exp(-np.where(down > 0, gap, 0.0) / (units.KB * T))
        return cls(e, dipoles, down + up.T, T)

    @property
    def n_levels(self) -> int:
        return int(self.energies.size)

    def generator(self) -> np.ndarray:
        """Q with dp/dt = Q p."""
        q = self.rates.T.copy()
        q[np.diag_indices_from(q)] = -self.rates.sum(axis=1)
        return q

    def boltzmann(self) -> np.ndarray:
        if self.temperature == 0:
            p = np.zeros(self.n_levels)
            p[np.argmin(self.energies)] = 1.0
            return p
        x = -(self.energies - self.energies.min()) / (units.KB * self.temperature)
        w = np.exp(x)
        return w / w.sum()

    @cached_property
    def stationary(self) -> np.ndarray:
        return stationary_distribution(self)

    def mean_dipole(self) -> float:
        return float(self.stationary @ self.dipoles)

    def dipole_variance(self) -> float:
        d = self.dipoles - self.mean_dipole()
        return float(self.stationary @ (d * d))


def transition_rates(states: BoundStateSet, model: PotentialModel, phonons: PhononModel,
                     T: float, n_levels: int = 8, dipole_curve=None) -> FluctuatorSystem:
    """Golden-rule phonon rates between the lowest ``n_levels`` bound states.

    For n > m, with nu = (E_n - E_m)/hbar and |U'_nm|^2 = |<n|U'|m>|^2::

        Gamma_{n->m} = pi g(nu) / (3 hbar M nu) |U'_nm|^2 (n_B(nu) + 1)
        Gamma_{m->n} = pi g(nu) / (3 hbar M nu) |U'_nm|^2 n_B(nu)

    All arguments are in atomic units; ``T`` is k_B T in hartree.
    """
    if T < 0:
        raise ValueError("temperature must be non-negative")
    k = min(n_levels, states.n_states)
    if k < 2:
        raise ValueError("need at least two levels")
    e = np.asarray(states.energies[:k], dtype=float)
    uprime = uprime_matrix(states, model, k)
    M = phonons.host.M
    rates = np.zeros((k, k))
    coupled = False
    for n in range(1, k):
        for m in range(n):
            nu = (e[n] - e[m]) / units.HBAR
            g = float(phonons(nu))
            if g <= 0.0:
                continue
            coupled = True
            base = math.pi * g / (3.0 * units.HBAR * M * nu) * uprime[n, m] ** 2
            nb = bose_occupation(nu, T)
            rates[n, m] = base * (nb + 1.0)
            rates[m, n] = base * nb
    if not coupled:
        raise PhononSilentError("every transition frequency lies outside the phonon band")
    dipoles = np.zeros(k) if dipole_curve is None else level_dipoles(states, dipole_curve, k)
    return FluctuatorSystem(e, dipoles, rates, T)


def stationary_distribution(sys: FluctuatorSystem) -> np.ndarray:
    """Null vector of the generator normalised to sum 1.

    At T = 0 the ground state is absorbing and the law is a point mass.
    """
    n = sys.n_levels
    if sys.temperature == 0:
        return sys.boltzmann()
    n_comp, _ = connected_components(sys.rates > 0, directed=True, connection="strong")
    if n_comp > 1:
        raise NumericalDegeneracyError(
            f"rate matrix is reducible ({n_comp} disconnected level groups) at T > 0"
        )
    q = sys.generator()
    a = np.vstack([q / np.abs(q).max(), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    p, *_ = np.linalg.lstsq(a, b, rcond=None)
    p = np.clip(p, 0.0, None)
    return p / p.sum()


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Lorentzian modes of the mean-subtracted dipole autocorrelation."""

    weights: np.ndarray
    decays: np.ndarray
    mean_dipole: float
    variance: float

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        lam = self.decays[:, None]
        vals = (self.weights[:, None] * 2.0 * lam / (lam**2 + omega.reshape(1, -1) ** 2)).sum(axis=0)
        return vals.reshape(omega.shape) if omega.ndim else float(vals[0])

    def autocorrelation(self, tau):
        tau = np.abs(np.asarray(tau, dtype=float))
        return (self.weights[:, None] * np.exp(-self.decays[:, None] * tau.reshape(1, -1))).sum(axis=0).reshape(tau.shape)

    def sum_rule(self) -> float:
        """(1/2 pi) int S_mu d omega over the real line, mode by mode."""
        return float(self.weights.sum())

    def dominant(self) -> tuple[float, float]:
        """(weight, decay) of the heaviest mode; (0, nan) if there is none."""
        if self.weights.size == 0 or self.weights.max() == 0:
            return 0.0, float("nan")
        i = int(np.argmax(self.weights))
        return float(self.weights[i]), float(self.decays[i])


def decompose(sys: FluctuatorSystem) -> SpectralDecomposition:
    q = sys.generator()
    sym = np.sqrt(q * q.T)
    sym[np.diag_indices_from(sym)] = np.diag(q)
    try:
        lam, vec = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(sym)
        raise NumericalDegeneracyError(f"eigendecomposition failed (cond={cond:.3e}): {exc}") from exc
    scale = np.abs(sys.rates).max()
    i0 = int(np.argmin(np.abs(lam)))
    if abs(lam[i0]) >= 1e-10 * scale:
        raise NumericalDegeneracyError(
            f"no stationary mode: smallest |eigenvalue| {abs(lam[i0]):.3e} vs rate scale {scale:.3e}"
        )
    p = sys.stationary
    mean = float(p @ sys.dipoles)
    dmu = sys.dipoles - mean
    proj = vec.T @ (np.sqrt(p) * dmu)
    keep = np.arange(lam.size) != i0
    weights = proj[keep] ** 2
    decays = -lam[keep]
    live = decays > 0
    return SpectralDecomposition(weights=weights[live], decays=decays[live],
                                 mean_dipole=mean, variance=float(p @ (dmu * dmu)))


def dipole_spectrum(sys: FluctuatorSystem, omega_grid):
    """Return ``(decomposition, S_mu(omega_grid))``."""
    omega = np.asarray(omega_grid, dtype=float)
    if np.any(omega < 0):
        raise ValueError("omega grid must be non-negative")
    dec = decompose(sys)
    return dec, dec(omega)


def two_level_spectrum(delta_mu, gamma0, nu10, T, omega):
    """Low-temperature two-level form

        (delta_mu)^2 2 gamma0 / (gamma0^2 + omega^2) exp(-hbar nu10 / k_B T),

    which is 0 at T = 0.
    """
    omega = np.asarray(omega, dtype=float)
    if T == 0:
        return np.zeros_like(omega) if omega.ndim else 0.0
    boltz = math.exp(-units.HBAR * nu10 / (units.KB * T))
    out = delta_mu**2 * 2.0 * gamma0 / (gamma0**2 + omega**2) * boltz
    return out if omega.ndim else float(out)


def gamma0(states: BoundStateSet, model: PotentialModel, phonons: PhononModel) -> float:
    """Gamma_{1->0} at T = 0, the characteristic phonon relaxation rate."""
    return float(transition_rates(states, model, phonons, 0.0, n_levels=2).rates[1, 0])
