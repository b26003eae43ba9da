"""Oscillator radial functions and the free solutions of the kinetic-energy
three-term recurrence.

R_nl(r) is the normalized oscillator radial function; S_nl(k) and C_nl(k)
are the regular/irregular solutions of the free tridiagonal problem in the
oscillator representation, normalized so that

    sum_n S_nl(k) R_nl(r) = (k/sqrt(v)) j_l(kr),
    sum_n C_nl(k) R_nl(r) -> -(k/sqrt(v)) n_l(kr)   (r -> infinity),

with v = hbar*c*k/mu the velocity in units of c.  The discrete Wronskian
(Casoratian) T_{n,n+1} (C_{n+1}S_n - C_nS_{n+1}) is n-independent; in the
MeV/fm units used here its value is hbar*c/2, fixed by the large-n
asymptotics of S and C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import HBAR_C, oscillator_radius, velocity
from .special import kummer, laguerre, log_norm_ratio, spherical_bessel

CASORATIAN_CONSTANT = HBAR_C / 2.0  # MeV fm


@dataclass(frozen=True)
class OscillatorBasis:
    """Radial oscillator basis for one partial wave.

    Attributes
    ----------
    hbar_omega : float
        Level spacing, MeV.
    mu : float
        Reduced mass, MeV/c^2.
    l : int
        Orbital angular momentum.
    """

    hbar_omega: float
    mu: float
    l: int = 0

    def __post_init__(self):
        if self.hbar_omega <= 0.0 or self.mu <= 0.0:
            raise ValueError("hbar_omega and mu must be positive")
        if self.l < 0:
            raise ValueError(f"l must be non-negative, got {self.l}")

    @property
    def r0(self) -> float:
        """Oscillator radius hbar*c/sqrt(mu hbar_omega), fm."""
        return oscillator_radius(self.hbar_omega, self.mu)


def radial_function(basis: OscillatorBasis, n: int, r: float) -> float:
    """Oscillator radial function R_nl(r), normalized to unit r^2-norm."""
    if n < 0 or r < 0.0:
        raise ValueError("radial_function requires n >= 0 and r >= 0")
    r0, l = basis.r0, basis.l
    x = (r / r0) ** 2
    pref = (-1.0) ** n * math.sqrt(2.0 / r0 ** 3) * math.exp(log_norm_ratio(n, l))
    return pref * (r / r0) ** l * math.exp(-x / 2.0) * laguerre(n, l + 0.5, x)


def radial_function_matrix(basis: OscillatorBasis, n_max: int,
                           r: np.ndarray) -> np.ndarray:
    """R_nl(r) for n = 0..n_max on a grid; shape (n_max+1, len(r))."""
    r = np.asarray(r, dtype=float)
    r0, l = basis.r0, basis.l
    x = (r / r0) ** 2
    alpha = l + 0.5
    out = np.empty((n_max + 1, r.size))
    lag_prev = np.ones_like(r)
    envelope = np.sqrt(2.0 / r0 ** 3) * (r / r0) ** l * np.exp(-x / 2.0)
    out[0] = math.exp(log_norm_ratio(0, l)) * envelope * lag_prev
    if n_max == 0:
        return out
    lag = 1.0 + alpha - x
    out[1] = -math.exp(log_norm_ratio(1, l)) * envelope * lag
    for m in range(1, n_max):
        lag_prev, lag = lag, ((2 * m + alpha + 1 - x) * lag
                              - (m + alpha) * lag_prev) / (m + 1)
        out[m + 1] = (-1.0) ** (m + 1) * math.exp(log_norm_ratio(m + 1, l)) \
            * envelope * lag
    return out


def kinetic_diagonal(basis: OscillatorBasis, n: int) -> float:
    """T_nn = (hbar_omega/2)(2n + l + 3/2), MeV."""
    return 0.5 * basis.hbar_omega * (2 * n + basis.l + 1.5)


def kinetic_off_diagonal(basis: OscillatorBasis, n: int) -> float:
    """T_{n,n+1} = -(hbar_omega/2) sqrt((n+1)(n+l+3/2)), MeV."""
    return -0.5 * basis.hbar_omega * math.sqrt((n + 1.0) * (n + basis.l + 1.5))


def kinetic_matrix(basis: OscillatorBasis, n_max: int) -> np.ndarray:
    """Tridiagonal kinetic-energy matrix on n = 0..n_max, MeV."""
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    n = np.arange(n_max + 1, dtype=float)
    t = np.zeros((n_max + 1, n_max + 1))
    np.fill_diagonal(t, 0.5 * basis.hbar_omega * (2 * n + basis.l + 1.5))
    off = -0.5 * basis.hbar_omega * np.sqrt((n[:-1] + 1.0) * (n[:-1] + basis.l + 1.5))
    idx = np.arange(n_max)
    t[idx, idx + 1] = off
    t[idx + 1, idx] = off
    return t


def classical_turning_point(basis: OscillatorBasis, n: int) -> float:
    """r_n^cl = 2 r0 sqrt(n + l/2 + 3/4), fm."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return 2.0 * basis.r0 * math.sqrt(n + basis.l / 2.0 + 0.75)


def _regular_prefactor(basis: OscillatorBasis, k: float) -> float:
    r0, l = basis.r0, basis.l
    v = velocity(k, basis.mu)
    x = (k * r0) ** 2
    return math.sqrt(math.pi * r0 / v) * (k * r0) ** (l + 1) * math.exp(-x / 2.0)


def _irregular_prefactor(basis: OscillatorBasis, k: float) -> float:
    r0, l = basis.r0, basis.l
    v = velocity(k, basis.mu)
    x = (k * r0) ** 2
    return ((-1.0) ** l / math.gamma(0.5 - l)) * math.sqrt(math.pi * r0 / v) \
        * (k * r0) ** (-l) * math.exp(-x / 2.0)


def regular_solution(basis: OscillatorBasis, n: int, k: float) -> float:
    """S_nl(k) by direct evaluation (log-space norm ratio x Laguerre)."""
    if k <= 0.0:
        raise ValueError(f"regular_solution requires k > 0, got {k}")
    x = (k * basis.r0) ** 2
    return _regular_prefactor(basis, k) * math.exp(log_norm_ratio(n, basis.l)) \
        * laguerre(n, basis.l + 0.5, x)


def irregular_solution_direct(basis: OscillatorBasis, n: int, k: float) -> float:
    """C_nl(k) by direct evaluation of the confluent hypergeometric form."""
    if k <= 0.0:
        raise ValueError(f"irregular_solution requires k > 0, got {k}")
    l = basis.l
    x = (k * basis.r0) ** 2
    return _irregular_prefactor(basis, k) * math.exp(log_norm_ratio(n, l)) \
        * kummer(-n - l - 0.5, 0.5 - l, x)


def irregular_solution(basis: OscillatorBasis, n: int, k: float) -> float:
    """C_nl(k); direct for n <= 1, upward recurrence seeded by n = 0, 1 above."""
    if n <= 1:
        return irregular_solution_direct(basis, n, k)
    seq = free_recurrence_sequence(
        basis, n, k,
        irregular_solution_direct(basis, 0, k),
        irregular_solution_direct(basis, 1, k))
    return float(seq[n])


def free_recurrence_sequence(basis: OscillatorBasis, n_max: int, k: float,
                             a0: float, a1: float) -> np.ndarray:
    """Propagate the free three-term recurrence upward from (a0, a1).

    The recurrence (with x = (k r0)^2 = 2E/hbar_omega) is

        a_{n+1} = [(2n+l+3/2-x) a_n - sqrt(n(n+l+1/2)) a_{n-1}]
                  / sqrt((n+1)(n+l+3/2)).
    """
    l = basis.l
    x = (k * basis.r0) ** 2
    out = np.empty(max(n_max + 1, 2))
    out[0], out[1] = a0, a1
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + l + 1.5 - x) * out[n]
                      - math.sqrt(n * (n + l + 0.5)) * out[n - 1]) \
            / math.sqrt((n + 1.0) * (n + l + 1.5))
    return out[:n_max + 1]


@dataclass(frozen=True)
class AsymptoticSolutions:
    """S_nl(k) and C_nl(k) for n = 0..n_max at fixed momentum k."""

    basis: OscillatorBasis
    k: float
    S: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)

    def casoratian(self, n: int) -> float:
        """T_{n,n+1}(C_{n+1}S_n - C_nS_{n+1}); equals hbar*c/2 for every n."""
        return kinetic_off_diagonal(self.basis, n) \
            * (self.C[n + 1] * self.S[n] - self.C[n] * self.S[n + 1])

    def recurrence_residual(self, n: int) -> float:
        """Relative residual of the three-term recurrence at row n (n >= 1)."""
        basis, k = self.basis, self.k
        res_s = res_c = 0.0
        tm = kinetic_off_diagonal(basis, n - 1)
        td = kinetic_diagonal(basis, n) - (HBAR_C * k) ** 2 / (2.0 * basis.mu)
        tp = kinetic_off_diagonal(basis, n)
        for a, out in ((self.S, "s"), (self.C, "c")):
            r = tm * a[n - 1] + td * a[n] + tp * a[n + 1]
            scale = max(abs(tm * a[n - 1]), abs(td * a[n]), abs(tp * a[n + 1]))
            val = abs(r) / scale if scale > 0 else 0.0
            if out == "s":
                res_s = val
            else:
                res_c = val
        return max(res_s, res_c)


def asymptotic_solutions(basis: OscillatorBasis, n_max: int,
                         k: float) -> AsymptoticSolutions:
    """S and C sequences for n = 0..n_max via the three-term recurrence."""
    if k <= 0.0:
        raise ValueError(f"asymptotic_solutions requires k > 0, got {k}")
    s = free_recurrence_sequence(basis, n_max, k,
                                 regular_solution(basis, 0, k),
                                 regular_solution(basis, 1, k))
    c = free_recurrence_sequence(basis, n_max, k,
                                 irregular_solution_direct(basis, 0, k),
                                 irregular_solution_direct(basis, 1, k))
    return AsymptoticSolutions(basis=basis, k=k, S=s, C=c)


def regular_asymptotic(basis: OscillatorBasis, n: int, k: float,
                       form: str = "bessel") -> float:
    """Large-n asymptotic of S_nl(k): Bessel form or its sine simplification."""
    r0, l = basis.r0, basis.l
    v = velocity(k, basis.mu)
    nu = n + l / 2.0 + 0.75
    arg = 2.0 * k * r0 * math.sqrt(nu)
    if form == "bessel":
        jl = spherical_bessel(l, arg)[0]
        return 2.0 * k * r0 * math.sqrt(r0 / v) * nu ** 0.25 * jl
    if form == "sine":
        return math.sqrt(r0 / v) * nu ** -0.25 * math.sin(arg - math.pi * l / 2.0)
    raise ValueError(f"unknown asymptotic form {form!r}")


def irregular_asymptotic(basis: OscillatorBasis, n: int, k: float,
                         form: str = "bessel") -> float:
    """Large-n asymptotic of C_nl(k): Neumann form or its cosine simplification."""
    r0, l = basis.r0, basis.l
    v = velocity(k, basis.mu)
    nu = n + l / 2.0 + 0.75
    arg = 2.0 * k * r0 * math.sqrt(nu)
    if form == "bessel":
        nl = spherical_bessel(l, arg)[1]
        return -2.0 * k * r0 * math.sqrt(r0 / v) * nu ** 0.25 * nl
    if form == "sine":
        return math.sqrt(r0 / v) * nu ** -0.25 * math.cos(arg - math.pi * l / 2.0)
    raise ValueError(f"unknown asymptotic form {form!r}")
