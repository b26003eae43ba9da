"""Oscillator-basis (J-matrix / HORSE) quantum scattering.

Continuum states are expanded in harmonic-oscillator radial functions; the
free dynamics beyond a truncation boundary N is handled analytically by the
regular/irregular solutions of the kinetic-energy three-term recurrence, so
a single diagonalization of the truncated Hamiltonian gives phase shifts,
S-matrices, P/R-matrices and wave functions at any energy.  Charged
particles are treated by cutting the Coulomb tail at a channel radius and
restoring the exterior through quasi-Wronskian matching; the coupled-channel
generalization and an independent Numerov reference solver are included.
"""

__version__ = "0.1.0"

from .basis import OscillatorBasis, asymptotic_solutions
from .constants import (CONSTANTS, HBAR_C, Kinematics, energy_from_momentum,
                        momentum_from_energy, oscillator_radius, reduced_mass,
                        reduced_mass_from_a)
from .hamiltonian import RadialPotential, TruncatedHamiltonian, diagonalize
from .single_channel import ScatteringSolution, coefficients, phase_shift

__all__ = [
    "CONSTANTS",
    "HBAR_C",
    "Kinematics",
    "OscillatorBasis",
    "RadialPotential",
    "ScatteringSolution",
    "TruncatedHamiltonian",
    "asymptotic_solutions",
    "coefficients",
    "diagonalize",
    "energy_from_momentum",
    "momentum_from_energy",
    "oscillator_radius",
    "phase_shift",
    "reduced_mass",
    "reduced_mass_from_a",
    "__version__",
]
