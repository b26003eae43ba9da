"""Physical constants and kinematic conversions shared by all modules.

Unit conventions used throughout the package:

* energies in MeV, lengths in fm, momenta in fm^-1,
* masses (reduced masses) in MeV/c^2,
* the relative velocity is measured in units of c:  v = hbar*c*k / mu,
  which keeps every flux-normalisation factor dimensionally trivial.

With these conventions E = (hbar*c*k)^2 / (2 mu) and the Sommerfeld
parameter is zeta = Z1*Z2*e^2*mu / ((hbar*c)^2 * k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

HBAR_C = 197.3269631  # MeV fm
E2 = 1.43996  # e^2 = alpha * hbar c, MeV fm
NUCLEON_MASS = 938.918  # average nucleon mass, MeV/c^2


@dataclass(frozen=True)
class PhysicalConstants:
    """Bundle of the unit-defining constants (immutable)."""

    hbar_c: float = HBAR_C  # MeV fm
    mass_unit: float = NUCLEON_MASS  # MeV/c^2
    fine_structure_product: float = E2  # MeV fm


CONSTANTS = PhysicalConstants()


class ClosedChannelError(ValueError):
    """Raised when a momentum is requested below threshold."""


def reduced_mass(mass_a: float, mass_b: float) -> float:
    """Reduced mass of two fragments with masses in MeV/c^2."""
    return mass_a * mass_b / (mass_a + mass_b)


def reduced_mass_from_a(a_projectile: float, a_target: float,
                        nucleon_mass: float = NUCLEON_MASS) -> float:
    """Reduced mass from mass numbers, using the average nucleon mass."""
    return reduced_mass(a_projectile * nucleon_mass, a_target * nucleon_mass)


def momentum_from_energy(energy: float, mu: float) -> float:
    """Relative-motion momentum k (fm^-1) from energy above threshold (MeV).

    Raises :class:`ClosedChannelError` for negative energy.
    """
    if energy < 0.0:
        raise ClosedChannelError(
            f"closed channel at this energy: E = {energy} MeV < 0")
    return math.sqrt(2.0 * mu * energy) / HBAR_C


def energy_from_momentum(k: float, mu: float) -> float:
    """Energy (MeV) from momentum k (fm^-1)."""
    return (HBAR_C * k) ** 2 / (2.0 * mu)


def velocity(k: float, mu: float) -> float:
    """Relative velocity v = hbar*c*k/mu in units of c."""
    return HBAR_C * k / mu


def oscillator_radius(hbar_omega: float, mu: float) -> float:
    """Oscillator radius r0 = hbar*c / sqrt(mu * hbar_omega) in fm."""
    if hbar_omega <= 0.0:
        raise ValueError(f"hbar_omega must be positive, got {hbar_omega}")
    if mu <= 0.0:
        raise ValueError(f"reduced mass must be positive, got {mu}")
    return HBAR_C / math.sqrt(mu * hbar_omega)


def sommerfeld_parameter(z1z2: float, mu: float, k: float) -> float:
    """Sommerfeld parameter zeta = Z1*Z2*e^2*mu / ((hbar c)^2 k)."""
    if k <= 0.0:
        raise ValueError(f"momentum must be positive, got k = {k}")
    return z1z2 * E2 * mu / (HBAR_C ** 2 * k)


@dataclass(frozen=True)
class Kinematics:
    """Energy/momentum pair for one open channel.

    Attributes
    ----------
    energy : float
        Relative-motion energy above the channel threshold, MeV.
    k : float
        Momentum, fm^-1.
    mu : float
        Reduced mass, MeV/c^2.
    v : float
        Velocity hbar*c*k/mu in units of c.
    """

    energy: float
    k: float
    mu: float
    v: float

    @classmethod
    def from_energy(cls, energy: float, mu: float) -> "Kinematics":
        k = momentum_from_energy(energy, mu)
        return cls(energy=energy, k=k, mu=mu, v=velocity(k, mu))
