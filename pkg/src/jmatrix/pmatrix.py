"""P- and R-matrix extraction from the oscillator-basis solution.

The general expression at channel radius b,

    P = b [C_N j' + S_N n' - G_NN (C_{N+1} j' + S_{N+1} n')]
        / [C_N j + S_N n - G_NN (C_{N+1} j + S_{N+1} n)],

its plane-wave simplification, the channel-radius equation

    j_l(kb)/n_l(kb) = - S_{N+1}/C_{N+1},

whose quasiclassical solution is the energy-independent natural radius
b0 = 2 r0 sqrt(N + l/2 + 7/4), and the discrete analogues built from the
oscillator-representation coefficients a_N, a_{N+1}.  P-matrix poles are
reported as tagged values, not failures: their energies are the physics
(primitive spectra).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .basis import (OscillatorBasis, asymptotic_solutions,
                    classical_turning_point, kinetic_off_diagonal)
from .constants import HBAR_C
from .hamiltonian import TruncatedHamiltonian
from .special import spherical_bessel

_POLE_BAND = 1e-12


class BracketError(RuntimeError):
    """Root bracketing for the channel-radius equation failed."""


@dataclass(frozen=True)
class PMatrixResult:
    """P and R = 1/P at one (E, b); is_pole marks a vanishing denominator."""

    P: float
    R: float
    is_pole: bool
    denominator: float


@dataclass(frozen=True)
class ChannelRadiusSolution:
    """Root of the channel-radius equation for one branch.

    residual is the literal |j/n + S_{N+1}/C_{N+1}| at the root (it is
    ill-conditioned where n_l or C_{N+1} pass through zero);
    residual_normalized is the scale-free |jC + nS| / (|(j,n)| |(S,C)|)
    the bisection actually drives to zero.
    """

    b: float
    branch: int
    energy: float
    residual: float
    residual_normalized: float


def _sc_free(h: TruncatedHamiltonian, energy: float):
    """(k, S_N, S_{N+1}, C_N, C_{N+1}) — free-solution edge values only."""
    rel = energy - h.threshold
    if rel <= 0.0:
        raise ValueError(f"need E above threshold, got E = {energy} MeV")
    k = math.sqrt(2.0 * h.basis.mu * rel) / HBAR_C
    n = h.n_trunc
    sols = asymptotic_solutions(h.basis, n + 1, k)
    return k, sols.S[n], sols.S[n + 1], sols.C[n], sols.C[n + 1]


def _sc_edge(h: TruncatedHamiltonian, energy: float):
    """(k, S_N, S_{N+1}, C_N, C_{N+1}, G_NN) at this energy."""
    k, s_n, s_n1, c_n, c_n1 = _sc_free(h, energy)
    return k, s_n, s_n1, c_n, c_n1, h.g_nn(energy)


def p_matrix_general(h: TruncatedHamiltonian, energy: float,
                     b: float) -> PMatrixResult:
    """Exact P (and R = 1/P) at channel radius b from the G matrix."""
    if b <= 0.0:
        raise ValueError(f"channel radius must be positive, got {b}")
    k, s_n, s_n1, c_n, c_n1, g = _sc_edge(h, energy)
    l = h.basis.l
    jl, nl, jlp, nlp = spherical_bessel(l, k * b)
    jp, np_ = k * jlp, k * nlp  # d/dr at r = b
    num = c_n * jp + s_n * np_ - g * (c_n1 * jp + s_n1 * np_)
    den = c_n * jl + s_n * nl - g * (c_n1 * jl + s_n1 * nl)
    scale = max(abs(c_n * jl), abs(s_n * nl),
                abs(g * c_n1 * jl), abs(g * s_n1 * nl), 1e-300)
    if abs(den) < _POLE_BAND * scale:
        return PMatrixResult(P=math.inf, R=0.0, is_pole=True, denominator=den)
    p = b * num / den
    r = 1.0 / p if p != 0.0 else math.inf
    return PMatrixResult(P=p, R=r, is_pole=False, denominator=den)


def p_matrix_from_phase(h: TruncatedHamiltonian, energy: float, b: float) -> float:
    """P via the logarithmic-derivative route: substitute tan(delta) into

        P = b (F' + tan(delta) G') / (F + tan(delta) G)

    with F = (k/sqrt(v)) j_l(kr), G = -(k/sqrt(v)) n_l(kr).  Algebraically
    identical to p_matrix_general; kept as an independent code path.
    """
    k, s_n, s_n1, c_n, c_n1, g = _sc_edge(h, energy)
    tan_delta = -(s_n - g * s_n1) / (c_n - g * c_n1)
    l = h.basis.l
    jl, nl, jlp, nlp = spherical_bessel(l, k * b)
    num = k * jlp - tan_delta * k * nlp
    den = jl - tan_delta * nl
    return b * num / den


def natural_channel_radius(basis: OscillatorBasis, n_trunc: int) -> float:
    """b0 = 2 r0 sqrt(N + l/2 + 7/4): the turning point of R_{N+1,l}."""
    return classical_turning_point(basis, n_trunc + 1)


def plane_wave_radius(h: TruncatedHamiltonian, energy: float,
                      branch: int = 0) -> float:
    """Channel radius estimate b_i = pi l/(2k) + arctan(S_{N+1}/C_{N+1})/k + i pi/k."""
    k, _, s_n1, _, c_n1 = _sc_free(h, energy)
    l = h.basis.l
    return (math.pi * l / (2.0 * k) + math.atan2(s_n1, c_n1) / k
            + branch * math.pi / k)


def solve_channel_radius(h: TruncatedHamiltonian, energy: float,
                         branch: int = 0,
                         near: float | None = None) -> ChannelRadiusSolution:
    """Exact root of j_l(kb)/n_l(kb) = -S_{N+1}/C_{N+1} near one branch.

    The roots are spaced by ~pi/k; the one closest to `near` (default:
    the plane-wave estimate for this branch, folded positive) is bracketed
    by a scan over a 1.2 pi/k window and bisected until the normalized
    residual is below 1e-10.
    """
    k, _, s_n1, _, c_n1 = _sc_free(h, energy)
    l = h.basis.l
    norm_sc = math.hypot(s_n1, c_n1)

    def g(b):
        jl, nl, _, _ = spherical_bessel(l, k * b)
        return (jl * c_n1 + nl * s_n1) / (math.hypot(jl, nl) * norm_sc)

    spacing = math.pi / k
    if near is None:
        near = plane_wave_radius(h, energy, branch)
        while near <= 0.25 * spacing:
            near += spacing
    lo = max(near - 0.6 * spacing, 1e-4 * spacing)
    hi = near + 0.6 * spacing
    grid = [lo + (hi - lo) * i / 96.0 for i in range(97)]
    vals = [g(b) for b in grid]
    brackets = [(a, b_, fa, fb)
                for a, b_, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:])
                if fa * fb <= 0.0 and (fa != 0.0 or fb != 0.0)]
    if not brackets:
        raise BracketError(
            f"no root of the channel-radius equation in "
            f"[{lo:.4f}, {hi:.4f}] fm at E = {energy} MeV, branch {branch}")
    roots = []
    for a, b_, fa, fb in brackets:
        while b_ - a > 1e-12 * max(1.0, b_):
            mid = 0.5 * (a + b_)
            fm = g(mid)
            if fa * fm <= 0.0:
                b_, fb = mid, fm
            else:
                a, fa = mid, fm
        roots.append(0.5 * (a + b_))
    b = min(roots, key=lambda x: abs(x - near))
    jl, nl, _, _ = spherical_bessel(l, k * b)
    residual = abs(jl / nl + s_n1 / c_n1)
    res_norm = abs(jl * c_n1 + nl * s_n1) / (math.hypot(jl, nl) * norm_sc)
    return ChannelRadiusSolution(b=b, branch=branch, energy=energy,
                                 residual=residual,
                                 residual_normalized=res_norm)


def p_matrix_plane_wave(h: TruncatedHamiltonian, energy: float,
                        b: float) -> float:
    """Plane-wave form of the exact P (valid where sin/cos asymptotics hold):

        P = kb [C_N + t S_N - G(C_{N+1} + t S_{N+1})]
             / [C_N t - S_N - G(C_{N+1} t - S_{N+1})] - 1,
        t = tan(kb - pi l/2).
    """
    k, s_n, s_n1, c_n, c_n1, g = _sc_edge(h, energy)
    t = math.tan(k * b - math.pi * h.basis.l / 2.0)
    num = c_n + t * s_n - g * (c_n1 + t * s_n1)
    den = c_n * t - s_n - g * (c_n1 * t - s_n1)
    return k * b * num / den - 1.0


def p_matrix_plane_wave_at_root(h: TruncatedHamiltonian, energy: float,
                                branch: int | None = None) -> float:
    """Casoratian-reduced plane-wave P at a radius solving
    tan(kb - pi l/2) = S_{N+1}/C_{N+1}:

        P = -(2 k b T_{N,N+1}/hbar c)
            [C_{N+1}C_N + S_{N+1}S_N - G(C_{N+1}^2 + S_{N+1}^2)] - 1.

    branch = None picks the root closest to the natural channel radius
    (the branch whose P the discrete analogues approximate); an explicit
    branch index offsets the plane-wave estimate by branch*pi/k.
    """
    k, s_n, s_n1, c_n, c_n1, g = _sc_edge(h, energy)
    if branch is None:
        b = plane_wave_radius(h, energy, 0)
        b0 = natural_channel_radius(h.basis, h.n_trunc)
        spacing = math.pi / k
        b += spacing * round((b0 - b) / spacing)
    else:
        b = plane_wave_radius(h, energy, branch)
    t_edge = kinetic_off_diagonal(h.basis, h.n_trunc)
    bracket = c_n1 * c_n + s_n1 * s_n - g * (c_n1 ** 2 + s_n1 ** 2)
    return -2.0 * k * b * t_edge / HBAR_C * bracket - 1.0


def beta_factor(basis: OscillatorBasis, n_trunc: int, k: float) -> float:
    """Quasiclassical correction factor:

        beta = ((2N+l+7/2)/(2N+l+3/2))^(1/4)
               * cos[2 k r0 (sqrt(N+l/2+7/4) - sqrt(N+l/2+3/4))].
    """
    l = basis.l
    ratio = (2 * n_trunc + l + 3.5) / (2 * n_trunc + l + 1.5)
    arg = 2.0 * k * basis.r0 * (math.sqrt(n_trunc + l / 2.0 + 1.75)
                                - math.sqrt(n_trunc + l / 2.0 + 0.75))
    return ratio ** 0.25 * math.cos(arg)


def p_matrix_discrete_beta(h: TruncatedHamiltonian, energy: float) -> float:
    """Discrete analogue with the beta correction:

        P = 2 sqrt((N+1)(N+l+3/2)) (beta - G_NN) - 1.
    """
    k, _, _, _, _, g = _sc_edge(h, energy)
    n, l = h.n_trunc, h.basis.l
    return 2.0 * math.sqrt((n + 1.0) * (n + l + 1.5)) \
        * (beta_factor(h.basis, n, k) - g) - 1.0


def p_matrix_discrete_simple(h: TruncatedHamiltonian, energy: float) -> float:
    """Large-N limit of the discrete analogue: P = 2(N+l/2+5/4)(1 - G_NN) - 1."""
    _, _, _, _, _, g = _sc_edge(h, energy)
    return 2.0 * (h.n_trunc + h.basis.l / 2.0 + 1.25) * (1.0 - g) - 1.0


def p_matrix_discrete(h: TruncatedHamiltonian, energy: float) -> float:
    """Finite-difference analogue from the expansion coefficients:

        P = (2N+l+5/2) (a_{N+1} - a_N)/a_{N+1} - 1,

    with a_N = G_NN a_{N+1} so the ratio is insensitive to the overall
    normalization of the scattering solution.  Reports a pole (inf) when
    a_{N+1} vanishes.
    """
    k, s_n, s_n1, c_n, c_n1, g = _sc_edge(h, energy)
    # a_{N+1} in the asymptotic normalization (phase from the edge condition)
    delta = math.atan2(-(s_n - g * s_n1), c_n - g * c_n1)
    a_edge = math.cos(delta) * s_n1 + math.sin(delta) * c_n1
    if abs(a_edge) < 1e-14 * math.hypot(s_n1, c_n1):
        return math.inf
    a_n = g * a_edge
    return (2 * h.n_trunc + h.basis.l + 2.5) * (a_edge - a_n) / a_edge - 1.0
