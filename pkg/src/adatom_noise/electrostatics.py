"""Plane-averaged slab potentials, work functions and surface dipoles.

Grid values are electrostatic potentials; internally they are kept in
atomic units (hartree per e), so with e = 1 they double as electron
energies and W = V(vacuum) - E_F needs no sign juggling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import units
from .potentials import TableParseError


class NoVacuumPlateauError(ValueError):
    """The chosen window is not flat enough to define V(infinity)."""


@dataclass(frozen=True, eq=False)
class PotentialGrid3D:
    """``values[i, j, k]`` at x_i, y_j, z_k; z is the surface normal."""

    values: np.ndarray
    a: float
    b: float
    c: float
    gamma_deg: float = 90.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or min(v.shape) < 2:
            raise ValueError("grid must be 3D with at least 2 points per axis")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid contains non-finite values")
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError("cell lengths must be positive")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    @property
    def area(self) -> float:
        """(x, y) cell area a b sin(gamma)."""
        return self.a * self.b * math.sin(math.radians(self.gamma_deg))

    @property
    def z(self) -> np.ndarray:
        nz = self.values.shape[2]
        return np.arange(nz) * (self.c / nz)


@dataclass(frozen=True, eq=False)
class Profile:
    z: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class WorkFunctionReport:
    V_infinity: float
    E_F: float
    W: float
    window: tuple[float, float]
    flatness: float
    tolerance: float


def plane_average(grid: PotentialGrid3D) -> Profile:
    """Mean of V over each z slice; on a uniform grid this is the
    cell-area integral divided by the area."""
    return Profile(grid.z, grid.values.mean(axis=(0, 1)))


def work_function(profile: Profile, E_F: float, window: tuple[float, float],
                  tolerance: float = units.to_au(10.0, "meV")) -> WorkFunctionReport:
    """W = V(infinity) - E_F with V(infinity) the profile mean over ``window``.

    Raises
    ------
    NoVacuumPlateauError
        If max - min over the window exceeds ``tolerance``.
    """
    z0, z1 = window
    if not (z0 < z1 and z0 >= profile.z[0] and z1 <= profile.z[-1]):
        raise ValueError("window must be an increasing range inside the profile")
    sel = (profile.z >= z0) & (profile.z <= z1)
    if not np.any(sel):
        raise ValueError("window contains no profile points")
    v = profile.V[sel]
    flat = float(v.max() - v.min())
    if flat > tolerance:
        raise NoVacuumPlateauError(
            f"no vacuum plateau: variation {units.from_au(flat, 'meV'):.3f} meV "
            f"exceeds {units.from_au(tolerance, 'meV'):.3f} meV"
        )
    v_inf = float(v.mean())
    return WorkFunctionReport(v_inf, E_F, v_inf - E_F, (z0, z1), flat, tolerance)


def dipole_from_workfunction(delta_W: float, A: float) -> float:
    """Per-adatom normal dipole change eps0 A delta_W / e."""
    if A <= 0:
        raise ValueError("area per adatom must be positive")
    return delta_W * units.EPS0 * A / units.E_CHARGE


def workfunction_from_dipole(delta_mu: float, A: float) -> float:
    if A <= 0:
        raise ValueError("area per adatom must be positive")
    return units.E_CHARGE * delta_mu / (units.EPS0 * A)


# -- file I/O ---------------------------------------------------------------

def read_grid(path) -> PotentialGrid3D:
    """Parse the text grid format.

    Line 1 ``nx ny nz``; line 2 ``a b c`` in angstrom; then nx*ny*nz values
    in volts with x fastest, then y, then z.  ``#`` lines are comments; a
    comment ``# gamma_deg: <angle>`` sets the in-plane cell angle.
    """
    path = Path(path)
    tokens = []
    gamma = 90.0
    header = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s.lstrip("#").strip()
            if body.lower().startswith("gamma_deg:"):
                gamma = float(body.split(":", 1)[1])
            continue
        if len(header) < 2:
            header.append((lineno, s.split()))
            continue
        tokens.extend(s.split())
    if len(header) < 2:
        raise TableParseError(f"{path}: missing 'nx ny nz' and 'a b c' header lines")
    try:
        nx, ny, nz = (int(t) for t in header[0][1])
        a, b, c = (float(t) for t in header[1][1])
    except ValueError:
        raise TableParseError(f"{path}:{header[0][0]}: malformed grid header") from None
    if len(tokens) != nx * ny * nz:
        raise TableParseError(f"{path}: expected {nx * ny * nz} values, found {len(tokens)}")
    try:
        vals = np.array(tokens, dtype=float)
    except ValueError:
        raise TableParseError(f"{path}: non-numeric grid value") from None
    vals = vals.reshape(nz, ny, nx).transpose(2, 1, 0)
    return PotentialGrid3D(units.to_au(vals, "volt"), units.to_au(a, "angstrom"),
                           units.to_au(b, "angstrom"), units.to_au(c, "angstrom"), gamma)


def write_grid(path, grid: PotentialGrid3D, comment: str = "") -> None:
    nx, ny, nz = grid.shape
    lines = []
    if comment:
        lines.append(f"# {comment}")
    if grid.gamma_deg != 90.0:
        lines.append(f"# gamma_deg: {grid.gamma_deg:g}")
    lines.append(f"{nx} {ny} {nz}")
    lines.append(" ".join(f"{units.from_au(x, 'angstrom'):.10g}" for x in (grid.a, grid.b, grid.c)))
    flat = units.from_au(grid.values, "volt").transpose(2, 1, 0).ravel()
    for i in range(0, flat.size, 8):
        lines.append(" ".join(f"{v:.12g}" for v in flat[i:i + 8]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_profile(path, profile: Profile) -> None:
    z = units.from_au(profile.z, "angstrom")
    v = units.from_au(profile.V, "volt")
    rows = ["z_angstrom,vbar_volts"] + [f"{a:.10g},{b:.12g}" for a, b in zip(z, v)]
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def synthetic_slab(nx, ny, nz, a, b, c, V_bulk, V_vac, z_surface, width,
                   corrugation=0.0, dipole_sheet=None) -> PotentialGrid3D:
    """Model slab potential for demos and tests.

    The plane average is ``V_bulk + (V_vac - V_bulk)(1 + tanh((z - z_surface)/width))/2``
    plus, if ``dipole_sheet=(delta_mu, area, z_sheet, spread)`` is given, the
    step obtained by integrating Poisson's equation for two opposite
    Gaussian charge sheets carrying ``delta_mu`` per ``area``.  The lateral
    corrugation averages to zero on every plane.
    """
    z = np.arange(nz) * (c / nz)
    prof = V_bulk + (V_vac - V_bulk) * 0.5 * (1.0 + np.tanh((z - z_surface) / width))
    if dipole_sheet is not None:
        prof = prof + dipole_sheet_potential(z, *dipole_sheet)
    x = np.arange(nx) / nx
    y = np.arange(ny) / ny
    lateral = corrugation * np.cos(2 * np.pi * x)[:, None] * np.cos(2 * np.pi * y)[None, :]
    vals = prof[None, None, :] + lateral[:, :, None] * np.exp(-((z - z_surface) / width) ** 2)[None, None, :]
    return PotentialGrid3D(vals, a, b, c)


def dipole_sheet_potential(z, delta_mu, area, z_sheet, spread):
    """Potential energy of an electron across a smeared dipole layer.

    Charge +q at z_sheet - s/2 and -q at z_sheet + s/2 with q s = delta_mu
    per ``area``; a positive ``delta_mu`` (negative end facing the vacuum)
    raises the vacuum level by delta_mu / (eps0 area).
    Poisson's equation is integrated twice on a fine auxiliary grid.
    """
    s = 2.0 * spread
    q = delta_mu / s
    fine = np.linspace(z[0], z[-1], 40 * z.size)
    gauss = lambda c0: np.exp(-0.5 * ((fine - c0) / (0.25 * spread)) ** 2) / (0.25 * spread * math.sqrt(2 * math.pi))
    rho = (q / area) * (gauss(z_sheet - s / 2) - gauss(z_sheet + s / 2))
    # phi'' = -rho / eps0; electron energy = -e phi
    dphi = -np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(fine))]) / units.EPS0
    phi = np.concatenate([[0.0], np.cumsum(0.5 * (dphi[1:] + dphi[:-1]) * np.diff(fine))])
    return np.interp(z, fine, -units.E_CHARGE * phi)
