"""Physical constants and unit conversion.

Everything inside the package is computed in Hartree atomic units
(hbar = m_e = e = 4*pi*eps0 = 1).  Temperatures are carried as k_B*T in
hartree, so the Boltzmann constant is also 1 internally.  Conversion to
and from laboratory units happens only at I/O boundaries through
:func:`to_au`, :func:`from_au` and :func:`convert_quantity`.

Constant values are CODATA-2018 recommended values
(https://physics.nist.gov/cuu/Constants/, 2018 adjustment).  They are
hard-coded rather than taken from ``scipy.constants`` so results do not
drift when scipy updates its CODATA table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CONSTANTS_VERSION = "CODATA-2018"

# SI values, CODATA-2018
HBAR_SI = 1.054571817e-34            # J s
PLANCK_SI = 6.62607015e-34           # J s (exact)
KB_SI = 1.380649e-23                 # J/K (exact)
E_CHARGE_SI = 1.602176634e-19        # C (exact)
EPS0_SI = 8.8541878128e-12           # F/m
C_LIGHT_SI = 299792458.0             # m/s (exact)
AVOGADRO = 6.02214076e23             # 1/mol (exact)
ELECTRON_MASS_SI = 9.1093837015e-31  # kg
AMU_SI = 1.66053906660e-27           # kg
HARTREE_SI = 4.3597447222071e-18     # J
BOHR_SI = 5.29177210903e-11          # m
AU_TIME_SI = 2.4188843265857e-17     # s
HARTREE_EV = 27.211386245988         # eV
AMU_IN_ME = 1822.888486209           # m_u / m_e
DEBYE_SI = 1e-21 / C_LIGHT_SI        # C m
KCAL_SI = 4184.0                     # J (thermochemical calorie)

# derived atomic units
AU_FIELD_SI = HARTREE_SI / (E_CHARGE_SI * BOHR_SI)   # V/m
AU_DIPOLE_SI = E_CHARGE_SI * BOHR_SI                 # C m
AU_VOLT = HARTREE_SI / E_CHARGE_SI                   # V

# atomic-unit constants, kept for readability in formulas
HBAR = 1.0
KB = 1.0
EPS0 = 1.0 / (4.0 * math.pi)
E_CHARGE = 1.0

_TWO_PI = 2.0 * math.pi

# unit name -> (dimension, multiplicative factor taking a value in that unit
# to Hartree atomic units)
_UNITS: dict[str, tuple[str, float]] = {
    # energy
    "hartree": ("energy", 1.0),
    "eV": ("energy", 1.0 / HARTREE_EV),
    "meV": ("energy", 1e-3 / HARTREE_EV),
    "joule": ("energy", 1.0 / HARTREE_SI),
    "kcal-per-mol": ("energy", KCAL_SI / AVOGADRO / HARTREE_SI),
    # length
    "bohr": ("length", 1.0),
    "angstrom": ("length", 1e-10 / BOHR_SI),
    "nanometer": ("length", 1e-9 / BOHR_SI),
    "micrometer": ("length", 1e-6 / BOHR_SI),
    "centimeter": ("length", 1e-2 / BOHR_SI),
    "meter": ("length", 1.0 / BOHR_SI),
    # inverse length (Morse width)
    "1/bohr": ("inverse-length", 1.0),
    "1/angstrom": ("inverse-length", BOHR_SI / 1e-10),
    "1/meter": ("inverse-length", BOHR_SI),
    # area
    "bohr^2": ("area", 1.0),
    "angstrom^2": ("area", 1e-20 / BOHR_SI**2),
    "meter^2": ("area", 1.0 / BOHR_SI**2),
    # surface density
    "1/bohr^2": ("surface-density", 1.0),
    "1/angstrom^2": ("surface-density", BOHR_SI**2 / 1e-20),
    "1/centimeter^2": ("surface-density", BOHR_SI**2 / 1e-4),
    "1/meter^2": ("surface-density", BOHR_SI**2),
    # mass
    "electron-mass": ("mass", 1.0),
    "amu": ("mass", AMU_IN_ME),
    "kg": ("mass", 1.0 / ELECTRON_MASS_SI),
    # mass density
    "au-density": ("mass-density", 1.0),
    "kg/m^3": ("mass-density", BOHR_SI**3 / ELECTRON_MASS_SI),
    "g/cm^3": ("mass-density", 1e3 * BOHR_SI**3 / ELECTRON_MASS_SI),
    # velocity
    "au-velocity": ("velocity", 1.0),
    "m/s": ("velocity", AU_TIME_SI / BOHR_SI),
    # time
    "au-time": ("time", 1.0),
    "s": ("time", 1.0 / AU_TIME_SI),
    "ps": ("time", 1e-12 / AU_TIME_SI),
    "fs": ("time", 1e-15 / AU_TIME_SI),
    # ordinary frequency (cycles per time)
    "Hz": ("frequency", AU_TIME_SI),
    "MHz": ("frequency", 1e6 * AU_TIME_SI),
    "GHz": ("frequency", 1e9 * AU_TIME_SI),
    "THz": ("frequency", 1e12 * AU_TIME_SI),
    # angular frequency; "2pi*THz" means the quoted number is omega/2pi in THz
    "au-angular": ("angular-frequency", 1.0),
    "rad/s": ("angular-frequency", AU_TIME_SI),
    "2pi*Hz": ("angular-frequency", _TWO_PI * AU_TIME_SI),
    "2pi*MHz": ("angular-frequency", _TWO_PI * 1e6 * AU_TIME_SI),
    "2pi*GHz": ("angular-frequency", _TWO_PI * 1e9 * AU_TIME_SI),
    "2pi*THz": ("angular-frequency", _TWO_PI * 1e12 * AU_TIME_SI),
    # rates (events per time)
    "au-rate": ("rate", 1.0),
    "1/s": ("rate", AU_TIME_SI),
    "rate-Hz": ("rate", AU_TIME_SI),
    "rate-MHz": ("rate", 1e6 * AU_TIME_SI),
    "rate-THz": ("rate", 1e12 * AU_TIME_SI),
    # temperature, internally k_B T in hartree
    "au-temperature": ("temperature", 1.0),
    "K": ("temperature", KB_SI / HARTREE_SI),
    "mK": ("temperature", 1e-3 * KB_SI / HARTREE_SI),
    # charge
    "e": ("charge", 1.0),
    "coulomb": ("charge", 1.0 / E_CHARGE_SI),
    # electric potential
    "au-potential": ("electric-potential", 1.0),
    "volt": ("electric-potential", 1.0 / AU_VOLT),
    # dipole
    "e*bohr": ("dipole", 1.0),
    "debye": ("dipole", DEBYE_SI / AU_DIPOLE_SI),
    "coulomb*meter": ("dipole", 1.0 / AU_DIPOLE_SI),
    # dipole fluctuation spectrum, dipole^2 * time
    "au-dipole-spectrum": ("dipole-spectral-density", 1.0),
    "(coulomb*meter)^2*s": ("dipole-spectral-density", 1.0 / (AU_DIPOLE_SI**2 * AU_TIME_SI)),
    "debye^2/THz": ("dipole-spectral-density",
                    (DEBYE_SI / AU_DIPOLE_SI) ** 2 * 1e-12 / AU_TIME_SI),
    # diffusion coefficient
    "au-diffusion": ("diffusion-coefficient", 1.0),
    "m^2/s": ("diffusion-coefficient", AU_TIME_SI / BOHR_SI**2),
    "cm^2/s": ("diffusion-coefficient", 1e-4 * AU_TIME_SI / BOHR_SI**2),
    # electric-field spectral density, (V/m)^2 / Hz == (V/m)^2 s
    "au-field-spectrum": ("electric-field-spectral-density", 1.0),
    "V^2/m^2/Hz": ("electric-field-spectral-density", 1.0 / (AU_FIELD_SI**2 * AU_TIME_SI)),
    # dimensionless
    "1": ("dimensionless", 1.0),
}

_ALIASES = {
    "Ha": "hartree", "Eh": "hartree", "J": "joule", "kcal/mol": "kcal-per-mol",
    "a0": "bohr", "A": "angstrom", "Å": "angstrom", "nm": "nanometer",
    "um": "micrometer", "μm": "micrometer", "cm": "centimeter", "m": "meter",
    "1/A": "1/angstrom", "A^2": "angstrom^2", "m^2": "meter^2",
    "m^-2": "1/meter^2", "cm^-2": "1/centimeter^2", "A^-2": "1/angstrom^2",
    "u": "amu", "Da": "amu", "me": "electron-mass", "s^-1": "1/s",
    "D": "debye", "C*m": "coulomb*meter", "C": "coulomb", "V": "volt",
    "dimensionless": "1",
}


class UnitError(ValueError):
    """Unknown unit name or conversion between incompatible dimensions."""


def _lookup(unit: str) -> tuple[str, float]:
    try:
        return _UNITS[_ALIASES.get(unit, unit)]
    except KeyError:
        raise UnitError(f"unknown unit {unit!r}") from None


def dimension_of(unit: str) -> str:
    return _lookup(unit)[0]


def units_for(dimension: str) -> list[str]:
    """All canonical unit names of one dimension."""
    return [name for name, (dim, _) in _UNITS.items() if dim == dimension]


def to_au(value, unit: str, dimension: str | None = None):
    """Convert ``value`` given in ``unit`` to atomic units.

    If ``dimension`` is given, the unit must belong to it.
    """
    dim, factor = _lookup(unit)
    if dimension is not None and dim != dimension:
        raise UnitError(f"unit {unit!r} is a {dim}, expected a {dimension}")
    if isinstance(value, (list, tuple)):
        value = np.asarray(value, dtype=float)
    return value * factor


def from_au(value, unit: str, dimension: str | None = None):
    dim, factor = _lookup(unit)
    if dimension is not None and dim != dimension:
        raise UnitError(f"unit {unit!r} is a {dim}, expected a {dimension}")
    if isinstance(value, (list, tuple)):
        value = np.asarray(value, dtype=float)
    return value / factor


@dataclass(frozen=True)
class Quantity:
    """A value tagged with a unit; the dimension follows from the unit."""

    value: float
    unit: str

    def __post_init__(self):
        _lookup(self.unit)

    @property
    def dimension(self) -> str:
        return dimension_of(self.unit)

    @property
    def au(self) -> float:
        return to_au(self.value, self.unit)

    def to(self, unit: str) -> "Quantity":
        return convert_quantity(self, unit)


def convert_quantity(q: Quantity, target_unit: str) -> Quantity:
    """Express ``q`` in ``target_unit``.

    Raises
    ------
    UnitError
        If the target unit belongs to another dimension.
    """
    src_dim, src_factor = _lookup(q.unit)
    dst_dim, dst_factor = _lookup(target_unit)
    if src_dim != dst_dim:
        raise UnitError(
            f"cannot convert {q.unit!r} ({src_dim}) to {target_unit!r} ({dst_dim})"
        )
    if src_factor == dst_factor:
        return Quantity(q.value, target_unit)
    return Quantity(q.value * (src_factor / dst_factor), target_unit)
