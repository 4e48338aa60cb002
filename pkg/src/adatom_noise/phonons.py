"""Phonon density of states of the host surface and thermal occupation.

Normalisation convention
------------------------
g(omega) counts modes per surface atom per unit angular frequency with
integral 3.  With this choice the golden-rule rate

    Gamma_{1->0} = pi g(nu) / (3 hbar M nu) |<1|U'|0>|^2

evaluated for a harmonic well, |<1|U'|0>|^2 = m hbar nu^3 / 2, and the
Debye form g = 3 M omega^2 / (2 pi^2 v^3 rho), reduces exactly to
Gamma_0 = nu^4 m / (4 pi v^3 rho).  That identity is what fixes the
prefactor; it is tested in ``test_fluctuator``.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import units
from .potentials import TableParseError


@dataclass(frozen=True)
class HostMaterial:
    """Surface-atom mass M, mass density rho and sound speed v (atomic units)."""

    M: float
    rho: float
    v: float
    name: str = ""

    def __post_init__(self):
        if min(self.M, self.rho, self.v) <= 0:
            raise ValueError("host M, rho and v must be positive")

    @property
    def omega_D(self) -> float:
        """Debye cutoff v (6 pi^2 n)^(1/3), n = rho / M."""
        return self.v * (6.0 * math.pi**2 * self.rho / self.M) ** (1.0 / 3.0)

    @classmethod
    def gold(cls) -> "HostMaterial":
        """Au with handbook v = 3200 m/s and rho = 19300 kg/m^3."""
        return cls(M=units.to_au(196.966570, "amu"),
                   rho=units.to_au(19300.0, "kg/m^3"),
                   v=units.to_au(3200.0, "m/s"),
                   name="Au")


class PhononModel:
    kind = "abstract"
    host: HostMaterial

    def __call__(self, omega):
        raise NotImplementedError

    def total_modes(self) -> float:
        raise NotImplementedError

    @property
    def omega_max(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class DebyePDOS(PhononModel):
    host: HostMaterial
    kind = "debye"

    def __call__(self, omega):
        omega = np.asarray(omega, dtype=float)
        h = self.host
        g = 3.0 * h.M * omega**2 / (2.0 * math.pi**2 * h.v**3 * h.rho)
        return np.where((omega >= 0) & (omega <= h.omega_D), g, 0.0)

    def total_modes(self) -> float:
        h = self.host
        return h.M * h.omega_D**3 / (2.0 * math.pi**2 * h.v**3 * h.rho)

    @property
    def omega_max(self) -> float:
        return self.host.omega_D


@dataclass(frozen=True, eq=False)
class TabulatedPDOS(PhononModel):
    """Linear interpolation of sampled g(omega), zero outside the table.

    The samples are rescaled on construction so that the trapezoid
    integral equals 3 modes per atom.
    """

    omega_grid: np.ndarray
    g_values: np.ndarray
    host: HostMaterial
    provenance: str = ""
    kind = "tabulated"

    def __post_init__(self):
        w = np.asarray(self.omega_grid, dtype=float)
        g = np.asarray(self.g_values, dtype=float)
        if w.ndim != 1 or w.shape != g.shape or w.size < 2:
            raise ValueError("PDOS table needs matching 1D arrays of >= 2 points")
        if np.any(np.diff(w) <= 0) or w[0] < 0:
            raise ValueError("PDOS frequencies must be non-negative and increasing")
        if np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ValueError("PDOS values must be finite and non-negative")
        total = np.trapezoid(g, w)
        if not total > 0:
            raise ValueError("PDOS table integrates to zero")
        object.__setattr__(self, "omega_grid", w)
        object.__setattr__(self, "g_values", g * (3.0 / total))

    def __call__(self, omega):
        return np.interp(omega, self.omega_grid, self.g_values, left=0.0, right=0.0)

    def total_modes(self) -> float:
        return float(np.trapezoid(self.g_values, self.omega_grid))

    @property
    def omega_max(self) -> float:
        return float(self.omega_grid[-1])


def pdos_eval(model: PhononModel, omega):
    return model(omega)


def bose_occupation(omega, T):
    """n(omega) = 1 / (exp(hbar omega / k_B T) - 1); identically 0 at T = 0.

    ``T`` is k_B T in hartree (see :mod:`adatom_noise.units`).
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise ValueError("bose_occupation needs omega > 0")
    if T < 0:
        raise ValueError("temperature must be non-negative")
    if T == 0:
        return np.zeros_like(omega) if omega.ndim else 0.0
    with np.errstate(over="ignore"):
        n = 1.0 / np.expm1(units.HBAR * omega / (units.KB * T))
    return n if omega.ndim else float(n)


def load_pdos_table(path, host: HostMaterial) -> TabulatedPDOS:
    """Read a ``freq_thz,g_per_thz_per_atom`` CSV (``#`` comments allowed)."""
    path = Path(path)
    raw = path.read_bytes()
    freqs, gs, comments = [], [], []
    header = False
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            comments.append(s.lstrip("#").strip())
            continue
        if not header:
            if [c.strip() for c in s.split(",")] != ["freq_thz", "g_per_thz_per_atom"]:
                raise TableParseError(f"{path}:{lineno}: expected header 'freq_thz,g_per_thz_per_atom'")
            header = True
            continue
        try:
            f, g = (float(x) for x in s.split(","))
        except ValueError:
            raise TableParseError(f"{path}:{lineno}: expected two numeric columns") from None
        if not (math.isfinite(f) and math.isfinite(g)):
            raise TableParseError(f"{path}:{lineno}: NaN or infinite entry")
        freqs.append(f)
        gs.append(g)
    if len(freqs) < 2:
        raise TableParseError(f"{path}: PDOS table needs at least 2 rows")
    omega = units.to_au(np.array(freqs), "2pi*THz")
    # per THz of ordinary frequency -> per unit angular frequency
    g_omega = np.array(gs) / (2.0 * math.pi * units.to_au(1.0, "THz"))
    prov = f"{path.name} sha256:{hashlib.sha256(raw).hexdigest()[:16]}"
    if comments:
        prov += " | " + "; ".join(comments)
    try:
        return TabulatedPDOS(omega, g_omega, host, provenance=prov)
    except ValueError as exc:
        raise TableParseError(f"{path}: {exc}") from None
