"""Potential constructors: square well, Woods-Saxon with surface spin-orbit,
Coulomb tail, tabulated files, and the p + A=15 demonstration preset.

The Woods-Saxon defaults (V0 = -53 MeV, R = 1.25 A^(1/3) fm, a = 0.65 fm,
surface spin-orbit strength 15 MeV fm^2 with the same geometry) are a
documented convention of this package; override any of them through the
keyword arguments or the CLI configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import E2, NUCLEON_MASS, reduced_mass_from_a
from .hamiltonian import RadialPotential

WS_V0 = -53.0  # MeV
WS_RADIUS_PARAM = 1.25  # fm
WS_DIFFUSENESS = 0.65  # fm
WS_SPIN_ORBIT = 15.0  # MeV fm^2


def square_well(depth: float, radius: float) -> RadialPotential:
    """Square well: V = depth for r < radius, 0 outside (depth < 0 attracts).

    Exactly at r = radius the midpoint value depth/2 is returned, which keeps
    grid-based integrators second-order accurate when a node lands on the jump.
    """

    def evaluator(r):
        r = np.asarray(r, dtype=float)
        return np.where(r < radius, depth, np.where(r > radius, 0.0, depth / 2.0))

    return RadialPotential(evaluator=evaluator, range_hint=radius,
                           breakpoints=(radius,))


def ls_coupling(l: int, j: float | None, s: float = 0.5) -> float:
    """<l.s> = [j(j+1) - l(l+1) - s(s+1)] / 2; zero when j is None or l = 0."""
    if j is None or l == 0:
        return 0.0
    return 0.5 * (j * (j + 1) - l * (l + 1) - s * (s + 1))


def woods_saxon(a_target: float, v0: float = WS_V0,
                radius_param: float = WS_RADIUS_PARAM,
                diffuseness: float = WS_DIFFUSENESS,
                spin_orbit: float = WS_SPIN_ORBIT,
                l: int = 0, j: float | None = None) -> RadialPotential:
    """Woods-Saxon well with a conventional surface (derivative) spin-orbit term.

    V(r) = v0 f(r) + spin_orbit * <l.s> * (1/r) df/dr,
    f(r) = 1 / (1 + exp((r - R)/a)),  R = radius_param * A^(1/3).
    """
    big_r = radius_param * a_target ** (1.0 / 3.0)
    ls = ls_coupling(l, j)

    def evaluator(r):
        r = np.asarray(r, dtype=float)
        ex = np.exp((r - big_r) / diffuseness)
        central = v0 / (1.0 + ex)
        if ls == 0.0:
            return central
        rr = np.where(r > 1e-12, r, 1e-12)
        dfdr = -ex / (diffuseness * (1.0 + ex) ** 2)
        return central + spin_orbit * ls * dfdr / rr

    # nominal range: |V| has dropped to 1% of the well depth
    range_hint = big_r + math.log(100.0) * diffuseness
    return RadialPotential(evaluator=evaluator, range_hint=range_hint)


def add_coulomb(potential: RadialPotential, z1z2: float) -> RadialPotential:
    """Add a point Coulomb tail Z1*Z2*e^2/r to a short-range potential."""
    if z1z2 == 0.0:
        return potential

    def evaluator(r):
        r = np.asarray(r, dtype=float)
        rr = np.where(r > 1e-12, r, 1e-12)
        return potential(r) + z1z2 * E2 / rr

    return RadialPotential(evaluator=evaluator, range_hint=potential.range_hint,
                           breakpoints=potential.breakpoints)


def tabulated(r_values, v_values) -> RadialPotential:
    """Cubic-spline interpolation of a two-column table; zero beyond the table."""
    from scipy.interpolate import CubicSpline

    r_values = np.asarray(r_values, dtype=float)
    v_values = np.asarray(v_values, dtype=float)
    if r_values.ndim != 1 or r_values.size < 4 or r_values.size != v_values.size:
        raise ValueError("tabulated potential needs >= 4 (r, V) rows")
    if np.any(np.diff(r_values) <= 0):
        raise ValueError("tabulated radii must be strictly increasing")
    spline = CubicSpline(r_values, v_values)
    r_last = r_values[-1]

    def evaluator(r):
        r = np.asarray(r, dtype=float)
        return np.where(r <= r_last, spline(np.clip(r, r_values[0], r_last)), 0.0)

    # splined tables are only piecewise smooth: knot kinks stall the
    # panelled quadrature below ~1e-8 MeV
    return RadialPotential(evaluator=evaluator, range_hint=r_last,
                           breakpoints=(r_last,), quad_tol=1e-8)


@dataclass(frozen=True)
class NucleonNucleusCase:
    """Kinematics + potential bundle for one projectile-nucleus partial wave."""

    potential: RadialPotential
    mu: float  # MeV/c^2
    z1z2: float
    l: int
    j: float | None = None


def p15n_case(l: int = 0, j: float | None = None, charged: bool = True,
              v0: float = WS_V0) -> NucleonNucleusCase:
    """Proton on an A = 15 nucleus (Woods-Saxon + Coulomb demonstration case)."""
    jj = j if j is not None else (l + 0.5 if l > 0 else None)
    nuclear = woods_saxon(15.0, v0=v0, l=l, j=jj)
    z1z2 = 7.0 if charged else 0.0
    return NucleonNucleusCase(potential=nuclear, mu=reduced_mass_from_a(1, 15),
                              z1z2=z1z2, l=l, j=jj)


def neutron15_case(l: int = 0, j: float | None = None,
                   v0: float = WS_V0) -> NucleonNucleusCase:
    """Neutron on an A = 15 nucleus (uncharged Woods-Saxon case)."""
    jj = j if j is not None else (l + 0.5 if l > 0 else None)
    nuclear = woods_saxon(15.0, v0=v0, l=l, j=jj)
    return NucleonNucleusCase(potential=nuclear, mu=reduced_mass_from_a(1, 15),
                              z1z2=0.0, l=l, j=jj)
