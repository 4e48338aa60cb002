"""Vibrational bound states of an adatom in a 1D surface potential.

The Hamiltonian -hbar^2/(2m) d^2/dz^2 + U(z) is discretised with
second-order central differences and Dirichlet walls, which gives a
symmetric tridiagonal matrix.  Only the lowest ``n_max`` eigenpairs are
extracted (LAPACK stebz/stein via ``scipy.linalg.eigh_tridiagonal``), so
grids of 10^5 points are cheap.

The scheme converges as (h/sigma)^2 where sigma is the oscillator length
of the well; :func:`default_grid` picks h from sigma so that the lowest
levels reach ~1e-6 relative accuracy on E_n + U0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import eigh_tridiagonal

from . import units
from .potentials import PotentialModel


class GridError(ValueError):
    """Grid does not bracket the well as required."""


class InsufficientBoundStatesError(RuntimeError):
    """Fewer than two bound levels: no vibrational transitions possible."""


# grid points per oscillator length in the default grid
POINTS_PER_SIGMA = 800
MIN_POINTS = 2048


@dataclass(frozen=True)
class Grid1D:
    z_min: float
    z_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 128:
            raise GridError("grid needs at least 128 points")
        if not self.z_max > self.z_min:
            raise GridError("z_max must exceed z_min")

    @property
    def h(self) -> float:
        return (self.z_max - self.z_min) / (self.n_points - 1)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_points)

    def refined(self, factor: int = 2) -> "Grid1D":
        """Same interval with the spacing divided by ``factor``."""
        return Grid1D(self.z_min, self.z_max, factor * (self.n_points - 1) + 1)

    def validate(self, model: PotentialModel) -> None:
        z0 = model.z0
        if not self.z_min < z0 < self.z_max:
            raise GridError(f"grid [{self.z_min:g}, {self.z_max:g}] does not contain z0={z0:g}")
        if not model.value(self.z_min) > 0:
            raise GridError("z_min is not inside the repulsive wall (U(z_min) <= 0)")
        if not abs(model.value(self.z_max)) < 1e-3 * model.U0:
            raise GridError("z_max too close: |U(z_max)| >= 1e-3 U0")


def oscillator_length(model: PotentialModel, m: float) -> float:
    """sqrt(hbar / (m omega)) for the harmonic frequency at the minimum."""
    omega = math.sqrt(model.curvature() / m)
    return math.sqrt(units.HBAR / (m * omega))


def default_grid(model: PotentialModel, m: float,
                 points_per_sigma: float = POINTS_PER_SIGMA) -> Grid1D:
    """Grid from z0 - 5/a to z0 + 20/a, resolved to the oscillator length.

    The lower end is pulled back into z > 0 when z0 - 5/a would be
    negative; for tabulated wells it is placed where U = +2 U0 if the table
    reaches that high.
    """
    a = model.width
    z0 = model.z0
    z_min = z0 - 5.0 / a
    z_max = z0 + 20.0 / a
    wall = getattr(model, "wall_point", None)
    if wall is not None:
        zw = wall(2.0 * model.U0)
        if model.kind in ("tabulated", "tailed"):
            z_min = zw if zw is not None else _table_start(model)
    if z_min <= 0:
        z_min = 0.1 * z0
    if model.kind == "tabulated":
        z_max = min(z_max, float(model.z_grid[-1]))
    elif model.kind == "tailed" and model.base.kind == "tabulated":
        z_max = max(z_max, model.z_match)
    sigma = oscillator_length(model, m)
    n = max(MIN_POINTS, int(math.ceil((z_max - z_min) / sigma * points_per_sigma)) + 1)
    return Grid1D(z_min, z_max, n)


def _table_start(model):
    base = getattr(model, "base", model)
    return float(base.z_grid[0])


@dataclass(frozen=True, eq=False)
class BoundStateSet:
    """Eigenpairs on a grid.  Row n of ``wavefunctions`` is psi_n(z)."""

    grid: Grid1D
    energies: np.ndarray
    wavefunctions: np.ndarray
    adatom_mass: float

    @property
    def n_states(self) -> int:
        return int(self.energies.size)

    @property
    def z(self) -> np.ndarray:
        return self.grid.z

    def frequencies(self) -> np.ndarray:
        """Level frequencies E_n / hbar."""
        return self.energies / units.HBAR

    def nu10(self) -> float:
        return float(self.energies[1] - self.energies[0]) / units.HBAR

    def overlap(self) -> np.ndarray:
        w = _trapezoid_weights(self.grid)
        return (self.wavefunctions * w) @ self.wavefunctions.T

    def node_counts(self, rel_tol: float = 1e-6) -> list[int]:
        counts = []
        for psi in self.wavefunctions:
            sig = psi[np.abs(psi) > rel_tol * np.abs(psi).max()]
            counts.append(int(np.count_nonzero(np.diff(np.sign(sig)))))
        return counts


def _trapezoid_weights(grid: Grid1D) -> np.ndarray:
    w = np.full(grid.n_points, grid.h)
    w[0] = w[-1] = 0.5 * grid.h
    return w


def solve_bound_states(model: PotentialModel, m: float, grid: Grid1D | None = None,
                       n_max: int = 8) -> BoundStateSet:
    """Lowest bound vibrational states of mass ``m`` in ``model``.

    Parameters
    ----------
    model : PotentialModel
    m : float
        Adatom mass (electron masses).
    grid : Grid1D, optional
        Defaults to :func:`default_grid`.
    n_max : int
        Maximum number of levels returned; only levels with E_n < 0 are kept.

    Raises
    ------
    InsufficientBoundStatesError
        If fewer than two levels lie below the continuum.
    """
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    if grid is None:
        grid = default_grid(model, m)
    grid.validate(model)
    z = grid.z
    h = grid.h
    kinetic = units.HBAR**2 / (2.0 * m * h * h)
    diag = 2.0 * kinetic + model.value(z)
    off = np.full(grid.n_points - 1, -kinetic)
    n_eig = min(n_max, grid.n_points)
    energies, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, n_eig - 1))
    keep = energies < 0
    energies = energies[keep]
    if energies.size < 2:
        raise InsufficientBoundStatesError(
            f"only {energies.size} bound state(s) found; at least 2 are needed"
        )
    psi = vecs[:, keep].T / math.sqrt(h)
    # sign convention: first significant lobe positive
    for row in psi:
        first = np.argmax(np.abs(row) > 1e-3 * np.abs(row).max())
        if row[first] < 0:
            row *= -1.0
    psi.setflags(write=False)
    energies.setflags(write=False)
    return BoundStateSet(grid=grid, energies=energies, wavefunctions=psi, adatom_mass=m)


def _check_index(states: BoundStateSet, *idx: int) -> None:
    for i in idx:
        if not 0 <= i < states.n_states:
            raise IndexError(f"level {i} out of range (0..{states.n_states - 1})")


def matrix_element_Uprime(states: BoundStateSet, model: PotentialModel, n: int, m: int) -> float:
    """<n|U'(z)|m> by trapezoid quadrature on the solver grid."""
    _check_index(states, n, m)
    z = states.z
    return float(trapezoid(states.wavefunctions[n] * model.derivative(z) * states.wavefunctions[m], z))


def uprime_matrix(states: BoundStateSet, model: PotentialModel, n_levels: int | None = None) -> np.ndarray:
    """All <n|U'|m> for n, m < n_levels at once (symmetric)."""
    k = states.n_states if n_levels is None else n_levels
    _check_index(states, k - 1)
    psi = states.wavefunctions[:k]
    w = _trapezoid_weights(states.grid) * model.derivative(states.z)
    mat = (psi * w) @ psi.T
    return 0.5 * (mat + mat.T)


def dipole_expectation(states: BoundStateSet, curve, n: int) -> float:
    """mu_n = <n|mu(z)|n>.  ``curve`` is any callable of z (atomic units)."""
    _check_index(states, n)
    z = states.z
    psi = states.wavefunctions[n]
    return float(trapezoid(psi * psi * np.asarray(curve(z), dtype=float), z))


def level_dipoles(states: BoundStateSet, curve, n_levels: int | None = None) -> np.ndarray:
    k = states.n_states if n_levels is None else n_levels
    return np.array([dipole_expectation(states, curve, i) for i in range(k)])


def dump_wavefunctions(states: BoundStateSet, path, max_rows: int = 2000) -> None:
    """CSV ``z_angstrom,psi_0,...`` (psi in bohr^-1/2), thinned to ``max_rows``."""
    stride = max(1, int(math.ceil(states.grid.n_points / max_rows)))
    z = units.from_au(states.z[::stride], "angstrom")
    cols = states.wavefunctions[:, ::stride]
    header = "z_angstrom," + ",".join(f"psi_{i}" for i in range(states.n_states))
    lines = [header]
    for j in range(z.size):
        lines.append(",".join([f"{z[j]:.10g}"] + [f"{cols[i, j]:.10g}" for i in range(states.n_states)]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
