"""From single-adatom dipole noise to ion heating in a planar trap."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from . import units
from .phonons import HostMaterial

_MIN_DISTANCE = units.to_au(1.0, "nanometer")


@dataclass(frozen=True)
class TrapGeometry:
    """Ion charge q, ion mass m_I, trap frequency omega_t, ion height d and
    adsorbate surface density sigma, all in atomic units."""

    q: float
    m_I: float
    omega_t: float
    d: float
    sigma: float

    def __post_init__(self):
        if min(self.q, self.m_I, self.omega_t, self.d, self.sigma) <= 0:
            raise ValueError("trap geometry entries must all be positive")
        if self.d <= _MIN_DISTANCE:
            raise ValueError("ion-surface distance must exceed 1 nm")


def field_spectrum(sigma, d, S_mu):
    """Planar-electrode field noise (3 pi / 4) sigma S_mu / ((4 pi eps0)^2 d^4)."""
    if sigma < 0 or d <= 0:
        raise ValueError("need sigma >= 0 and d > 0")
    return 0.75 * math.pi * sigma / (4.0 * math.pi * units.EPS0) ** 2 * S_mu / d**4


def heating_rate(geom: TrapGeometry, S_E_at_trap):
    """Motional quanta gained per unit time, q^2 S_E(omega_t) / (4 m_I hbar omega_t)."""
    return geom.q**2 / (4.0 * geom.m_I * units.HBAR * geom.omega_t) * S_E_at_trap


class Scales(NamedTuple):
    nu10: float
    Gamma0: float


def gamma0_estimate(nu10: float, m: float, host: HostMaterial) -> float:
    """nu10^4 m / (4 pi v^3 rho), the Debye-phonon relaxation of a harmonic well."""
    return nu10**4 * m / (4.0 * math.pi * host.v**3 * host.rho)


def harmonic_estimates(U0: float, z0: float, m: float, host: HostMaterial,
                       zeta: float = 1.0) -> Scales:
    """Order-of-magnitude nu10 = zeta sqrt(U0 / (m z0^2)) and the matching Gamma0."""
    if min(U0, z0, m, zeta) <= 0:
        raise ValueError("U0, z0, m and zeta must be positive")
    nu10 = zeta * math.sqrt(U0 / (m * z0**2))
    return Scales(nu10, gamma0_estimate(nu10, m, host))


def mass_rescale(reference: Scales, m_ref: float, m_new: float) -> Scales:
    """Carry (nu10, Gamma0) to a new adatom mass at fixed well shape.

    nu10 scales as m^-1/2 and Gamma0 ~ nu10^4 m as m^-1.
    """
    if m_ref <= 0 or m_new <= 0:
        raise ValueError("masses must be positive")
    r = m_ref / m_new
    return Scales(reference.nu10 * math.sqrt(r), reference.Gamma0 * r)
