"""Shared fixtures: the demonstration cases and their oracle sweeps."""

import math

import numpy as np
import pytest

from jmatrix.constants import HBAR_C, reduced_mass_from_a
from jmatrix.basis import OscillatorBasis
from jmatrix.hamiltonian import diagonalize
from jmatrix.oracle import NumerovGrid, extract_phase, integrate_radial
from jmatrix.potentials import square_well, woods_saxon


MU_A15 = reduced_mass_from_a(1, 15)


def wrap_pi(x):
    """Fold an angle difference modulo pi into (-pi/2, pi/2]."""
    y = math.fmod(x, math.pi)
    if y > math.pi / 2:
        y -= math.pi
    elif y <= -math.pi / 2:
        y += math.pi
    return y


def analytic_square_well_delta0(energy, depth, radius, mu=MU_A15):
    """Closed-form s-wave phase shift of an attractive square well."""
    k = math.sqrt(2.0 * mu * energy) / HBAR_C
    kk = math.sqrt(2.0 * mu * (energy - depth)) / HBAR_C
    return math.atan2(k * math.tan(kk * radius), kk) - k * radius


@pytest.fixture(scope="session")
def basis_s():
    return OscillatorBasis(18.0, MU_A15, 0)


@pytest.fixture(scope="session")
def well20():
    return square_well(-20.0, 3.0)


@pytest.fixture(scope="session")
def ws_neutron():
    return woods_saxon(15.0)


@pytest.fixture(scope="session")
def h_ws10(basis_s, ws_neutron):
    return diagonalize(basis_s, ws_neutron, 10)


@pytest.fixture(scope="session")
def oracle_grid():
    return NumerovGrid(r_min=0.002, r_max=30.0, h=0.002, r_match=24.0)


@pytest.fixture(scope="session")
def ws_oracle_delta(ws_neutron, oracle_grid):
    def deltas(energy, l=0):
        k = math.sqrt(2.0 * MU_A15 * energy) / HBAR_C
        u = integrate_radial(ws_neutron, l, energy, oracle_grid, MU_A15)
        return extract_phase(u, l, k, 0.0, oracle_grid)[0]

    return deltas
