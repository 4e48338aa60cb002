"""Adatom-surface binding potentials U(z) and induced dipole curves mu(z).

All models use atomic units and the convention U(z -> inf) = 0, so a bound
well has U(z0) = -U0 < 0.  Models are immutable after construction and
evaluate vectorised over numpy arrays.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from . import units


class DomainError(ValueError):
    """Evaluation point outside the region where a model is defined."""


class TableParseError(ValueError):
    """Malformed tabulated input file."""


class PotentialModel:
    """Common interface of all 1D binding potentials.

    Subclasses provide ``value``, ``derivative``, the well depth ``U0``,
    the minimum position ``z0`` and a characteristic inverse width
    ``width`` (the Morse ``a`` or its equivalent) used for default grids.
    """

    kind = "abstract"
    U0: float
    z0: float

    def value(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    @property
    def width(self) -> float:
        raise NotImplementedError

    def curvature(self) -> float:
        """U''(z0), by a centred difference of the first derivative."""
        h = 1e-4 / self.width
        return float((self.derivative(self.z0 + h) - self.derivative(self.z0 - h)) / (2 * h))

    def __call__(self, z):
        return self.value(z)


@dataclass(frozen=True)
class MorsePotential(PotentialModel):
    """U(z) = U0 [(1 - exp(-a (z - z0)))^2 - 1]."""

    U0: float
    z0: float
    a: float
    kind = "morse"

    def __post_init__(self):
        if not self.U0 > 0:
            raise ValueError("Morse well depth U0 must be positive")
        if not (self.z0 > 0 and self.a > 0):
            raise ValueError("Morse z0 and a must be positive")

    def value(self, z):
        x = np.exp(-self.a * (np.asarray(z, dtype=float) - self.z0))
        return self.U0 * ((1.0 - x) ** 2 - 1.0)

    def derivative(self, z):
        x = np.exp(-self.a * (np.asarray(z, dtype=float) - self.z0))
        return 2.0 * self.U0 * self.a * (1.0 - x) * x

    def curvature(self) -> float:
        return 2.0 * self.U0 * self.a**2

    @property
    def width(self) -> float:
        return self.a

    def harmonic_frequency(self, m: float) -> float:
        return self.a * math.sqrt(2.0 * self.U0 / m)

    def exact_levels(self, m: float, n_max: int) -> np.ndarray:
        """Closed-form Morse eigenvalues E_n for n < n_max (bound ones only)."""
        w0 = self.harmonic_frequency(m)
        n = np.arange(n_max)
        x = units.HBAR * w0 * (n + 0.5)
        e = -self.U0 + x - x**2 / (4.0 * self.U0)
        return e[e < 0]


@dataclass(frozen=True)
class HarmonicPotential(PotentialModel):
    """Parabolic well -U0 + m_ref omega^2 (z - z0)^2 / 2.

    The wall side (z < z0) is the unbounded parabola.  On the vacuum side
    the parabola is capped at zero so that U(z -> inf) = 0 holds; states
    well below the rim are unaffected by the cap.
    """

    U0: float
    z0: float
    omega: float
    m_ref: float
    kind = "harmonic"

    def __post_init__(self):
        if not self.U0 > 0:
            raise ValueError("harmonic well depth U0 must be positive")
        if not (self.z0 > 0 and self.omega > 0 and self.m_ref > 0):
            raise ValueError("harmonic z0, omega and m_ref must be positive")

    @property
    def spring(self) -> float:
        return self.m_ref * self.omega**2

    def value(self, z):
        z = np.asarray(z, dtype=float)
        u = -self.U0 + 0.5 * self.spring * (z - self.z0) ** 2
        return np.where(z > self.z0, np.minimum(u, 0.0), u)

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        du = self.spring * (z - self.z0)
        rim = self.z0 + math.sqrt(2.0 * self.U0 / self.spring)
        return np.where(z > rim, 0.0, du)

    def curvature(self) -> float:
        return self.spring

    @property
    def width(self) -> float:
        # inverse width of the Morse well with the same depth and curvature
        return self.omega * math.sqrt(self.m_ref / (2.0 * self.U0))


@dataclass(frozen=True, eq=False)
class TabulatedPotential(PotentialModel):
    """Natural cubic spline through sampled (z, U) pairs."""

    z_grid: np.ndarray
    U_values: np.ndarray
    provenance: str = ""
    _spline: CubicSpline = field(init=False, repr=False)
    kind = "tabulated"

    def __post_init__(self):
        z = np.asarray(self.z_grid, dtype=float)
        u = np.asarray(self.U_values, dtype=float)
        if z.ndim != 1 or z.shape != u.shape:
            raise ValueError("z_grid and U_values must be 1D arrays of equal length")
        if z.size < 4:
            raise ValueError("a tabulated potential needs at least 4 points")
        if not np.all(np.isfinite(z)) or not np.all(np.isfinite(u)):
            raise ValueError("tabulated potential contains non-finite values")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z_grid must be strictly increasing")
        object.__setattr__(self, "z_grid", z)
        object.__setattr__(self, "U_values", u)
        object.__setattr__(self, "_spline", CubicSpline(z, u, bc_type="natural"))
        if not self.U0 > 0:
            raise ValueError("tabulated potential has no attractive well (U0 <= 0)")

    def _check(self, z):
        z = np.asarray(z, dtype=float)
        lo, hi = self.z_grid[0], self.z_grid[-1]
        if np.any(z < lo) or np.any(z > hi):
            raise DomainError(f"z outside tabulated range [{lo:g}, {hi:g}] bohr")
        return z

    def value(self, z):
        return self._spline(self._check(z))

    def derivative(self, z):
        return self._spline(self._check(z), 1)

    def curvature(self) -> float:
        return float(self._spline(self.z0, 2))

    @cached_property
    def z0(self) -> float:
        i = int(np.argmin(self.U_values))
        lo = self.z_grid[max(i - 1, 0)]
        hi = self.z_grid[min(i + 1, self.z_grid.size - 1)]
        # stationary points of the spline near the lowest sample
        roots = self._spline.derivative().roots(extrapolate=False)
        roots = roots[(roots >= lo) & (roots <= hi)]
        if roots.size == 0:
            return float(self.z_grid[i])
        return float(roots[np.argmin(self._spline(roots))])

    @cached_property
    def U0(self) -> float:
        return -float(self._spline(self.z0))

    @property
    def width(self) -> float:
        return math.sqrt(max(self.curvature(), 1e-300) / (2.0 * self.U0))

    def wall_point(self, level: float) -> float | None:
        """Position left of z0 where U = level, or None if the table never gets there."""
        z0 = self.z0
        zs = self.z_grid[self.z_grid < z0]
        above = zs[self._spline(zs) > level]
        if above.size == 0:
            return None
        return float(brentq(lambda x: float(self._spline(x)) - level, above[-1], z0))


@dataclass(frozen=True, eq=False)
class TailedPotential(PotentialModel):
    """Wrap a short-range model with the polarizable-atom tail.

    For z >= z_match the potential is -(eps - 1)/(eps + 1) * C3 / z^3.
    When ``C3`` is omitted it is chosen to make U continuous at z_match.
    """

    base: PotentialModel
    epsilon: float
    z_match: float
    C3: float | None = None
    kind = "tailed"

    def __post_init__(self):
        if not self.epsilon > 1:
            raise ValueError("dielectric constant must exceed 1 for an attractive tail")
        if not self.z_match > self.base.z0:
            raise ValueError("z_match must lie outside the well minimum")
        u_match = float(self.base.value(self.z_match))
        if self.C3 is None:
            object.__setattr__(self, "C3", -u_match * self.z_match**3 / self.screening)
        jump = abs(self._tail(self.z_match) - u_match)
        if jump > 1e-6 * self.base.U0:
            raise ValueError(f"tail is discontinuous at z_match by {jump:.3e} hartree")

    @property
    def screening(self) -> float:
        return (self.epsilon - 1.0) / (self.epsilon + 1.0)

    @property
    def U0(self) -> float:
        return self.base.U0

    @property
    def z0(self) -> float:
        return self.base.z0

    @property
    def width(self) -> float:
        return self.base.width

    def curvature(self) -> float:
        return self.base.curvature()

    def _tail(self, z):
        return -self.screening * self.C3 / np.asarray(z, dtype=float) ** 3

    def value(self, z):
        z = np.asarray(z, dtype=float)
        inner = np.minimum(z, self.z_match)
        return np.where(z >= self.z_match, self._tail(z), self.base.value(inner))

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        inner = np.minimum(z, self.z_match)
        tail = 3.0 * self.screening * self.C3 / z**4
        return np.where(z >= self.z_match, tail, self.base.derivative(inner))

    def derivative_jump(self) -> float:
        """|U'(z_match+) - U'(z_match-)|; zero for consistent tables."""
        inside = float(self.base.derivative(self.z_match))
        outside = 3.0 * self.screening * self.C3 / self.z_match**4
        return abs(outside - inside)

    def wall_point(self, level):
        return getattr(self.base, "wall_point", lambda _: None)(level)


def eval_potential(model: PotentialModel, z, derivative: bool = False):
    """U(z), or (U(z), U'(z)) when ``derivative`` is set."""
    if np.any(np.asarray(z) <= 0):
        raise DomainError("z must be positive")
    if derivative:
        return model.value(z), model.derivative(z)
    return model.value(z)


def morse_from_observables(U0: float, z0: float, nu10: float, m: float) -> MorsePotential:
    """Morse well whose harmonic frequency at the minimum is ``nu10``.

    Inverts m * nu10^2 = U''(z0) = 2 U0 a^2.
    """
    if min(U0, z0, nu10, m) <= 0:
        raise ValueError("U0, z0, nu10 and m must all be positive")
    return MorsePotential(U0=U0, z0=z0, a=nu10 * math.sqrt(m / (2.0 * U0)))


# -- dipole curves ---------------------------------------------------------

class DipoleCurve:
    kind = "abstract"

    def value(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return self.value(z)


@dataclass(frozen=True)
class PowerLawDipole(DipoleCurve):
    """mu(z) = mu_contact (z0/z)^4 beyond z0, saturated at mu_contact inside."""

    mu_contact: float
    z0: float
    kind = "power-law-saturating"
    exponent = 4

    def __post_init__(self):
        if not self.z0 > 0:
            raise ValueError("dipole z0 must be positive")

    def value(self, z):
        z = np.asarray(z, dtype=float)
        return self.mu_contact * np.where(z > self.z0, (self.z0 / np.maximum(z, self.z0)) ** 4, 1.0)


@dataclass(frozen=True, eq=False)
class TabulatedDipole(DipoleCurve):
    z_grid: np.ndarray
    mu_values: np.ndarray
    provenance: str = ""
    kind = "tabulated"

    def __post_init__(self):
        z = np.asarray(self.z_grid, dtype=float)
        mu = np.asarray(self.mu_values, dtype=float)
        if z.shape != mu.shape or z.size < 4:
            raise ValueError("tabulated dipole needs >= 4 matching (z, mu) pairs")
        if np.any(np.diff(z) <= 0):
            raise ValueError("z_grid must be strictly increasing")
        object.__setattr__(self, "z_grid", z)
        object.__setattr__(self, "mu_values", mu)
        object.__setattr__(self, "_spline", CubicSpline(z, mu, bc_type="natural"))

    def value(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(z < self.z_grid[0]) or np.any(z > self.z_grid[-1]):
            raise DomainError("z outside tabulated dipole range")
        return self._spline(z)


def eval_dipole(curve: DipoleCurve, z):
    if np.any(np.asarray(z) <= 0):
        raise DomainError("z must be positive")
    return curve.value(z)


# -- table I/O -------------------------------------------------------------

def read_table(path, expected_dimension: str | None = None):
    """Parse a ``z_angstrom,value`` CSV with a ``# unit: <name>`` comment.

    Returns ``(z_bohr, values_au, provenance)``.  Errors name the offending
    line number.
    """
    path = Path(path)
    raw = path.read_bytes()
    text = raw.decode("utf-8")
    unit = None
    header_seen = False
    rows = []
    comments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            body = s.lstrip("#").strip()
            if body.lower().startswith("unit:"):
                unit = body.split(":", 1)[1].strip()
            else:
                comments.append(body)
            continue
        if not header_seen:
            cols = [c.strip() for c in s.split(",")]
            if cols[0] != "z_angstrom" or len(cols) != 2:
                raise TableParseError(f"{path}:{lineno}: expected header 'z_angstrom,value'")
            header_seen = True
            continue
        parts = s.split(",")
        if len(parts) != 2:
            raise TableParseError(f"{path}:{lineno}: expected 2 columns, got {len(parts)}")
        try:
            z, v = float(parts[0]), float(parts[1])
        except ValueError:
            raise TableParseError(f"{path}:{lineno}: non-numeric entry") from None
        if not (math.isfinite(z) and math.isfinite(v)):
            raise TableParseError(f"{path}:{lineno}: NaN or infinite entry")
        if rows and z <= rows[-1][1]:
            raise TableParseError(f"{path}:{lineno}: z column not strictly increasing")
        rows.append((lineno, z, v))
    if unit is None:
        raise TableParseError(f"{path}: missing '# unit: ...' comment line")
    if len(rows) < 4:
        raise TableParseError(f"{path}: need at least 4 data rows, found {len(rows)}")
    try:
        scale = units.to_au(1.0, unit, expected_dimension)
    except units.UnitError as exc:
        raise TableParseError(f"{path}: {exc}") from None
    z = units.to_au(np.array([r[1] for r in rows]), "angstrom")
    v = np.array([r[2] for r in rows]) * scale
    digest = hashlib.sha256(raw).hexdigest()[:16]
    provenance = f"{path.name} sha256:{digest}"
    if comments:
        provenance += " | " + "; ".join(comments)
    return z, v, provenance


def load_tabulated_potential(path) -> TabulatedPotential:
    z, u, prov = read_table(path, "energy")
    return TabulatedPotential(z, u, provenance=prov)


def load_tabulated_dipole(path) -> TabulatedDipole:
    z, mu, prov = read_table(path, "dipole")
    return TabulatedDipole(z, mu, provenance=prov)


def write_table(path, z, values, unit: str, comment: str = ""):
    """Write samples in the same CSV layout ``read_table`` accepts."""
    z_a = units.from_au(np.asarray(z, dtype=float), "angstrom")
    v = units.from_au(np.asarray(values, dtype=float), unit)
    lines = []
    if comment:
        lines.append(f"# {comment}")
    lines.append(f"# unit: {unit}")
    lines.append("z_angstrom,value")
    lines += [f"{a:.12g},{b:.12g}" for a, b in zip(z_a, v)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
