"""Lateral hopping of adatoms between adsorption sites.

Thermal (Arrhenius) and ground-state tunneling jump rates, the fcc(111)
diffusion coefficient, a linear Redhead rule for the migration
temperature and the thermal de Broglie wavelength.  Atomic units
throughout; temperatures are k_B T in hartree.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from . import units

_GAMMA_LO = units.to_au(1e11, "rate-Hz")
_GAMMA_HI = units.to_au(1e14, "rate-Hz")

# Redhead rule of thumb: E [kcal/mol] = 0.06 T [K]
REDHEAD_KCAL_PER_MOL_PER_K = 0.06


@dataclass(frozen=True)
class DiffusionInput:
    E_a: float
    gamma_pref: float
    T: float
    m: float
    b: float
    r0: float

    def __post_init__(self):
        if min(self.gamma_pref, self.m, self.b, self.r0) <= 0 or self.E_a < 0 or self.T < 0:
            raise ValueError("diffusion inputs must be positive (E_a, T may be 0)")
        if not _GAMMA_LO <= self.gamma_pref <= _GAMMA_HI:
            warnings.warn("attempt prefactor outside the usual 1e11-1e14 Hz range", stacklevel=3)

    def with_T(self, T: float) -> "DiffusionInput":
        return DiffusionInput(self.E_a, self.gamma_pref, T, self.m, self.b, self.r0)


class ZeroTemperatureError(ValueError):
    """Thermal activation is identically zero at T = 0."""


def arrhenius_rate(inp: DiffusionInput) -> float:
    if inp.T <= 0:
        raise ZeroTemperatureError("Arrhenius rate vanishes at T = 0")
    return inp.gamma_pref * math.exp(-inp.E_a / (units.KB * inp.T))


def redhead_temperature(E_a: float) -> float:
    """Migration temperature from the linear rule E = 0.06 T kcal/mol/K."""
    if E_a <= 0:
        raise ValueError("activation energy must be positive")
    kelvin = units.from_au(E_a, "kcal-per-mol") / REDHEAD_KCAL_PER_MOL_PER_K
    return units.to_au(kelvin, "K")


def barrier_frequency(inp: DiffusionInput) -> float:
    return math.sqrt(2.0 * inp.E_a / (inp.m * inp.b**2))


def tunneling_rate(inp: DiffusionInput) -> float:
    """Ground-state tunneling through a parabolic double well,

    (2 w / pi^1.5) sqrt(2 E_a / hbar w) exp(-2 E_a / hbar w),  w = sqrt(2 E_a / (m b^2)).
    """
    if inp.E_a <= 0:
        raise ValueError("tunneling needs a positive barrier")
    w = barrier_frequency(inp)
    x = 2.0 * inp.E_a / (units.HBAR * w)
    return 2.0 * w / math.pi**1.5 * math.sqrt(x) * math.exp(-x)


def debroglie_wavelength(m: float, T: float) -> float:
    if m <= 0 or T <= 0:
        raise ValueError("mass and temperature must be positive")
    return 2.0 * math.pi * units.HBAR / math.sqrt(3.0 * m * units.KB * T)


def diffusion_coefficient(r0: float, jump_rate: float) -> float:
    """D = (sqrt 3 / 4) r0^2 Gamma on an fcc(111) surface."""
    if r0 <= 0 or jump_rate < 0:
        raise ValueError("r0 must be positive and the jump rate non-negative")
    return math.sqrt(3.0) / 4.0 * r0**2 * jump_rate


def crossover_temperature(inp: DiffusionInput) -> float:
    """T* where thermal hopping equals tunneling: E_a / (k_B ln(gamma / Gamma_tunnel))."""
    g_t = tunneling_rate(inp)
    if g_t >= inp.gamma_pref:
        raise ValueError("tunneling exceeds the attempt frequency; no crossover")
    return inp.E_a / (units.KB * math.log(inp.gamma_pref / g_t))
