"""Special functions needed by the oscillator basis and the asymptotics.

Provides generalized Laguerre polynomials, log-space norm ratios, spherical
Bessel/Neumann functions with derivatives, the Kummer confluent
hypergeometric function Phi(a, b; z), and Coulomb wave functions
F_l(zeta, rho), G_l(zeta, rho) with rho-derivatives.

Coulomb functions follow the standard normalization (Abramowitz & Stegun):

    F_l -> sin(theta),  G_l -> cos(theta),
    theta = rho - zeta*ln(2 rho) - l*pi/2 + eta_l,

so the Wronskian is F'G - FG' = 1 and F_l(0, rho) = rho*j_l(rho),
G_l(0, rho) = -rho*n_l(rho).  They are computed with the continued-fraction
pair (CF1 for F'/F at the requested l, CF2 for the logarithmic derivative
of G + iF at l = 0) closed through the Wronskian; below the classical
turning point, where CF2 stops converging, F comes from the regular power
series and G from stable inward integration seeded in the oscillatory
region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import gamma  # noqa: F401  (re-exported: handles negative non-integers)

from scipy.special import loggamma

_MAX_CF_ITER = 20000
_MAX_SERIES_TERMS = 500
_TINY = 1e-300


class ConvergenceError(RuntimeError):
    """A series or continued fraction failed to converge."""


# ----------------------------------------------------------------------------
# Laguerre polynomials and oscillator norm ratios
# ----------------------------------------------------------------------------

def laguerre(n: int, alpha: float, x: float) -> float:
    """Generalized Laguerre polynomial L_n^alpha(x) by upward recurrence."""
    if n < 0:
        raise ValueError(f"Laguerre degree must be non-negative, got {n}")
    l0 = 1.0
    if n == 0:
        return l0
    l1 = 1.0 + alpha - x
    for m in range(1, n):
        l0, l1 = l1, ((2 * m + alpha + 1 - x) * l1 - (m + alpha) * l0) / (m + 1)
    return l1


def laguerre_sequence(n_max: int, alpha: float, x: float) -> list[float]:
    """L_m^alpha(x) for m = 0..n_max in a single upward sweep."""
    vals = [1.0]
    if n_max == 0:
        return vals
    vals.append(1.0 + alpha - x)
    for m in range(1, n_max):
        vals.append(((2 * m + alpha + 1 - x) * vals[m]
                     - (m + alpha) * vals[m - 1]) / (m + 1))
    return vals


def log_norm_ratio(n: int, l: int) -> float:
    """log sqrt(n! / Gamma(n+l+3/2)); stable for n up to several thousand."""
    return 0.5 * (math.lgamma(n + 1.0) - math.lgamma(n + l + 1.5))


# ----------------------------------------------------------------------------
# Spherical Bessel / Neumann
# ----------------------------------------------------------------------------

def spherical_bessel(l: int, x: float):
    """Spherical Bessel and Neumann values with x-derivatives.

    Returns (j_l, n_l, j_l', n_l').  j_l is computed by downward (Miller)
    recurrence normalized to j_0 when x < l, upward otherwise; n_l always
    upward (dominant direction).  Requires x > 0.
    """
    if l < 0:
        raise ValueError(f"order must be non-negative, got l = {l}")
    if x <= 0.0:
        raise ValueError(f"spherical Bessel/Neumann require x > 0, got {x}")
    sx, cx = math.sin(x), math.cos(x)
    j0 = sx / x
    n0 = -cx / x
    n1 = -cx / (x * x) - sx / x
    # Neumann upward to l+1
    if l == 0:
        nl, nl1 = n0, n1
    else:
        nm, nc = n0, n1
        for m in range(1, l):
            nm, nc = nc, (2 * m + 1) / x * nc - nm
        nl, nl1 = nc, (2 * l + 1) / x * nc - nm
    # Bessel
    j1 = sx / (x * x) - cx / x
    if l == 0:
        jl, jl1 = j0, j1
    elif x >= l:
        jm, jc = j0, j1
        for m in range(1, l):
            jm, jc = jc, (2 * m + 1) / x * jc - jm
        jl, jl1 = jc, (2 * l + 1) / x * jc - jm
    else:
        m_top = l + int(math.sqrt(40.0 * l)) + 20
        jp, jc = 0.0, 1e-280
        vals = {}
        for m in range(m_top, -1, -1):
            jp, jc = jc, (2 * m + 3) / x * jc - jp
            # jc now holds the unnormalized j_m
            if m <= l + 1:
                vals[m] = jc
            if abs(jc) > 1e260:
                jp *= 1e-200
                jc *= 1e-200
                for key in vals:
                    vals[key] *= 1e-200
        scale = j0 / jc
        jl = vals[l] * scale
        jl1 = vals[l + 1] * scale
    jlp = (l / x) * jl - jl1
    nlp = (l / x) * nl - nl1
    return jl, nl, jlp, nlp


def riccati_bessel(l: int, x: float):
    """Riccati-Bessel s_l = x*j_l and c_l = -x*n_l with x-derivatives.

    Returns (s, c, s', c'); these equal F_l, G_l, F_l', G_l' at zero
    Sommerfeld parameter, with Wronskian s'c - sc' = 1.
    """
    jl, nl, jlp, nlp = spherical_bessel(l, x)
    return (x * jl, -x * nl, jl + x * jlp, -nl - x * nlp)


# ----------------------------------------------------------------------------
# Confluent hypergeometric
# ----------------------------------------------------------------------------

def kummer(a: float, b: float, z: float) -> float:
    """Kummer confluent hypergeometric Phi(a, b; z) by compensated series.

    b must not be a non-positive integer.  Terms are accumulated with
    Kahan summation until |term| < 1e-16 |sum|, capped at 500 terms.
    """
    if b <= 0.0 and b == int(b):
        raise ValueError(f"Phi(a,b;z) undefined for non-positive integer b = {b}")
    total = 1.0
    comp = 0.0
    term = 1.0
    for m in range(_MAX_SERIES_TERMS):
        term *= (a + m) / (b + m) * z / (m + 1)
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) < 1e-16 * max(abs(total), _TINY):
            return total
    raise ConvergenceError(
        f"Kummer series did not converge: a={a}, b={b}, z={z}, "
        f"partial sum {total}, last term {term}")


# ----------------------------------------------------------------------------
# Coulomb wave functions
# ----------------------------------------------------------------------------

def coulomb_phase(l: int, zeta: float) -> float:
    """Coulomb phase eta_l = arg Gamma(1 + l + i*zeta) in radians."""
    return float(loggamma(complex(l + 1, zeta)).imag)


@dataclass(frozen=True)
class CoulombPair:
    """Regular/irregular Coulomb wave values at one point.

    F, G are dimensionless; dF, dG are derivatives with respect to
    rho = k*r; eta_l = arg Gamma(1+l+i*zeta).  dF*G - F*dG = 1.
    """

    F: float
    G: float
    dF: float
    dG: float
    eta_l: float

    def wronskian(self) -> float:
        return self.dF * self.G - self.F * self.dG


def _slam(lam: float, zeta: float, rho: float) -> float:
    return lam / rho + zeta / lam


def _rlam(lam: float, zeta: float) -> float:
    return math.sqrt(1.0 + (zeta / lam) ** 2)


def _cf1(l: int, zeta: float, rho: float):
    """Continued fraction for F_l'/F_l.  Returns (f, sign of F_l).

    The sign is tracked through the negative denominators of the modified
    Lentz evaluation, as for the Bessel CF1.
    """
    b = _slam(l + 1, zeta, rho)
    h = b if abs(b) > _TINY else _TINY
    c = h
    d = 0.0
    sign = 1
    lam = l + 1
    for _ in range(_MAX_CF_ITER):
        lam += 1
        a = -_rlam(lam - 1, zeta) ** 2
        b = _slam(lam - 1, zeta, rho) + _slam(lam, zeta, rho)
        d = b + a * d
        if abs(d) < _TINY:
            d = _TINY
        c = b + a / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        if d < 0.0:
            sign = -sign
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return h, sign
    raise ConvergenceError(f"Coulomb CF1 failed: l={l}, zeta={zeta}, rho={rho}")


def _cf2(zeta: float, rho: float):
    """Steed continued fraction for (G'+iF')/(G+iF) at l = 0.

    Returns (p, q) with p + i q the logarithmic derivative; q > 0 when
    converged in the oscillatory region.
    """
    f = complex(_TINY)
    c = f
    d = 0j
    for n in range(1, _MAX_CF_ITER):
        a = complex(n - 1, zeta) * complex(n, zeta)
        b = complex(2.0 * (rho - zeta), 2.0 * n)
        d = b + a * d
        if abs(d) < _TINY:
            d = complex(_TINY)
        c = b + a / c
        if abs(c) < _TINY:
            c = complex(_TINY)
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            x = complex(0.0, 1.0 - zeta / rho) + complex(0.0, 1.0 / rho) * f
            return x.real, x.imag
    raise ConvergenceError(f"Coulomb CF2 failed: zeta={zeta}, rho={rho}")


def _coulomb_cf_point(l: int, zeta: float, rho: float):
    """(F, G, F', G') at rho in the CF2-convergent region."""
    f_l, sign = _cf1(l, zeta, rho)
    # seed the downward recurrence on the exact (F, F') ray at lambda = l
    fl_seed = float(sign)
    flp_seed = f_l * fl_seed
    fc, fcp = fl_seed, flp_seed
    for lam in range(l, 0, -1):
        s = _slam(lam, zeta, rho)
        r = _rlam(lam, zeta)
        fm = (s * fc + fcp) / r
        fmp = s * fm - r * fc
        fc, fcp = fm, fmp
    f0 = fcp / fc
    p, q = _cf2(zeta, rho)
    if q <= 0.0:
        raise ConvergenceError(
            f"Coulomb CF2 returned non-positive q={q}: l={l}, zeta={zeta}, rho={rho}")
    f0_true = math.copysign(math.sqrt(q / ((f0 - p) ** 2 + q ** 2)), fc)
    omega = f0_true / fc
    g0 = (f0 - p) * f0_true / q
    g0p = p * g0 - q * f0_true
    gc, gcp = g0, g0p
    for lam in range(1, l + 1):
        s = _slam(lam, zeta, rho)
        r = _rlam(lam, zeta)
        gl = (s * gc - gcp) / r
        glp = r * gc - s * gl
        gc, gcp = gl, glp
    return omega * fl_seed, gc, omega * flp_seed, gcp


def _series_regular(l: int, zeta: float, rho: float):
    """(F, F') from the origin power series; accurate for rho <~ 8."""
    c_mm, c_m = 0.0, 1.0
    t = rho ** (l + 1)
    u = t
    up = (l + 1) * t / rho
    small = 0
    for m in range(1, _MAX_SERIES_TERMS):
        c = (2.0 * zeta * c_m - c_mm) / (m * (m + 2 * l + 1))
        c_mm, c_m = c_m, c
        t = c * rho ** (m + l + 1)
        u += t
        up += (m + l + 1) * t / rho
        small = small + 1 if abs(t) < 1e-17 * abs(u) else 0
        if small >= 2:
            break
    else:
        raise ConvergenceError(
            f"Coulomb regular series did not converge: l={l}, zeta={zeta}, rho={rho}")
    log_cl = (l * math.log(2.0) - math.pi * zeta / 2.0
              + float(loggamma(complex(l + 1, zeta)).real) - math.lgamma(2 * l + 2))
    cl = math.exp(log_cl)
    return cl * u, cl * up


def _f_coul(l: int, zeta: float, rho: float) -> float:
    return l * (l + 1) / rho ** 2 + 2.0 * zeta / rho - 1.0


def _numerov_inward(l: int, zeta: float, rho_from: float, rho_to: float,
                    u0: float, u0p: float):
    """Integrate u'' = f u inward from rho_from to rho_to; returns (u, u')."""
    # graded steps: finer where the centrifugal/Coulomb terms are large
    edges = [0.5, 1.5, 4.0]
    steps = [5e-4, 1e-3, 2.5e-3, 6e-3]
    u, up = u0, u0p
    hi = rho_from
    while hi > rho_to + 1e-14:
        band = 0
        for b_edge in edges:
            if hi > b_edge + 1e-14:
                band += 1
        lo = max(rho_to, edges[band - 1] if band > 0 else rho_to)
        h0 = steps[band]
        n = max(int(math.ceil((hi - lo) / h0)), 4)
        u, up = _numerov_segment(l, zeta, hi, lo, n, u, up)
        hi = lo
    return u, up


def _numerov_segment(l: int, zeta: float, a: float, b: float, n: int,
                     u0: float, u0p: float):
    """One uniform-step Numerov sweep from a to b (a > b), n steps."""
    h = (b - a) / n  # negative for inward
    ll = l * (l + 1)

    def f(r):
        return ll / r ** 2 + 2.0 * zeta / r - 1.0

    def fp(r):
        return -2.0 * ll / r ** 3 - 2.0 * zeta / r ** 2

    def fpp(r):
        return 6.0 * ll / r ** 4 + 4.0 * zeta / r ** 3

    # Taylor start to O(h^5)
    f0 = f(a)
    u1 = (u0 + h * u0p + h * h / 2 * f0 * u0
          + h ** 3 / 6 * (fp(a) * u0 + f0 * u0p)
          + h ** 4 / 24 * (fpp(a) * u0 + 2 * fp(a) * u0p + f0 * f0 * u0)
          + h ** 5 / 120 * ((-24 * ll / a ** 5 - 12 * zeta / a ** 4) * u0
                            + 3 * fpp(a) * u0p + 4 * f0 * fp(a) * u0
                            + f0 * f0 * u0p))
    # march one step past b so the derivative at b is centered
    um, uc = u0, u1
    fm, fc_ = f(a), f(a + h)
    u_prev2 = u0
    f_prev2 = fm
    h2 = h * h
    for i in range(2, n + 2):
        rn = a + i * h
        fn = f(rn)
        un = ((2.0 + 5.0 * h2 * fc_ / 6.0) * uc - (1.0 - h2 * fm / 12.0) * um) \
            / (1.0 - h2 * fn / 12.0)
        u_prev2, f_prev2 = um, fm
        um, uc = uc, un
        fm, fc_ = fc_, fn
    # now um = u(b), uc = u(b+h), u_prev2 = u(b-h)
    # u'(b) = (u_+ - u_-)/(2h) - (h/12)(f_+ u_+ - f_- u_-)   [O(h^4)]
    der = (uc - u_prev2) / (2 * h) - (h / 12.0) * (fc_ * uc - f_prev2 * u_prev2)
    return um, der


def coulomb_wave(l: int, zeta: float, rho: float) -> CoulombPair:
    """Coulomb wave functions F_l, G_l and rho-derivatives at (zeta, rho).

    Parameters
    ----------
    l : int
        Orbital angular momentum (>= 0).
    zeta : float
        Sommerfeld parameter (0 gives Riccati-Bessel functions).
    rho : float
        k*r > 0.

    Returns
    -------
    CoulombPair with Wronskian dF*G - F*dG = 1.
    """
    if rho <= 0.0:
        raise ValueError(f"coulomb_wave requires rho > 0, got {rho}")
    eta_l = coulomb_phase(l, zeta)
    if zeta == 0.0:
        s, c, sp, cp = riccati_bessel(l, rho)
        return CoulombPair(F=s, G=c, dF=sp, dG=cp, eta_l=eta_l)
    turning = zeta + math.sqrt(zeta * zeta + l * (l + 1))
    rho_safe = turning + 6.0
    if rho >= rho_safe:
        f, g, df, dg = _coulomb_cf_point(l, zeta, rho)
    else:
        fe, ge, dfe, dge = _coulomb_cf_point(l, zeta, rho_safe)
        g, dg = _numerov_inward(l, zeta, rho_safe, rho, ge, dge)
        if rho <= 7.0:
            f, df = _series_regular(l, zeta, rho)
        else:
            f, df = _numerov_inward(l, zeta, rho_safe, rho, fe, dfe)
    pair = CoulombPair(F=f, G=g, dF=df, dG=dg, eta_l=eta_l)
    if abs(pair.wronskian() - 1.0) > 1e-6:
        raise ConvergenceError(
            f"Coulomb functions failed Wronskian check: l={l}, zeta={zeta}, "
            f"rho={rho}, W={pair.wronskian()}")
    return pair
