"""Independent direct-integration reference solver.

Numerov propagation of the reduced radial equation

    u'' = [ l(l+1)/r^2 + 2 mu (V(r) - E)/(hbar c)^2 ] u,

phase-shift extraction by matching to Riccati-Bessel or Coulomb functions,
matrix Numerov for coupled channels with S-matrix extraction, bound-state
energies by two-sided shooting, and oscillator-representation overlaps

    a_nl(k) = int u_l(k,r) R_nl(r) r^2 dr.

This module deliberately shares only the special-function layer with the
oscillator-basis solver: the oscillator radial function used in overlaps is
evaluated locally so the two phase-shift routes stay independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR_C, velocity
from .hamiltonian import RadialPotential
from .special import coulomb_wave, log_norm_ratio, riccati_bessel


class MatchingError(RuntimeError):
    """Phase extraction at the matching radius is unreliable."""


@dataclass(frozen=True)
class NumerovGrid:
    """Uniform radial grid for the Numerov sweep.

    r_min and h default to 1e-3 of a length scale chosen by the caller;
    r_match must sit at least two steps inside r_max.
    """

    r_min: float
    r_max: float
    h: float
    r_match: float

    def __post_init__(self):
        if self.r_min <= 0.0 or self.h <= 0.0:
            raise ValueError("r_min and h must be positive")
        if self.r_match > self.r_max - 2.0 * self.h:
            raise ValueError("r_match must be <= r_max - 2h")

    @classmethod
    def for_case(cls, length_scale: float, r_max: float, r_match: float,
                 h: float | None = None) -> "NumerovGrid":
        step = h if h is not None else 1e-3 * length_scale
        return cls(r_min=step, r_max=r_max, h=step, r_match=r_match)

    def radii(self) -> np.ndarray:
        n = int(round((self.r_max - self.r_min) / self.h))
        return self.r_min + self.h * np.arange(n + 1)


def integrate_radial(potential: RadialPotential | None, l: int, energy: float,
                     grid: NumerovGrid, mu: float, zeta_k: float = 0.0) -> np.ndarray:
    """Regular solution u(r) on the grid (unnormalized), local error O(h^6).

    zeta_k = 2*mu*Z1*Z2*e^2/(hbar c)^2 is the coefficient of the 1/r
    Coulomb term already contained in `potential`; it only improves the
    series start near the origin.
    """
    r = grid.radii()
    v = potential(r) if potential is not None else np.zeros_like(r)
    f = (l * (l + 1) / r ** 2 + 2.0 * mu * (v - energy) / HBAR_C ** 2)
    h2 = grid.h ** 2
    u = np.empty_like(r)
    # series start: u ~ r^(l+1) (1 + zeta_k r / (2l+2))
    u[0] = r[0] ** (l + 1) * (1.0 + zeta_k * r[0] / (2.0 * l + 2.0))
    u[1] = r[1] ** (l + 1) * (1.0 + zeta_k * r[1] / (2.0 * l + 2.0))
    w = (1.0 - h2 / 12.0 * f)
    ulist = u.tolist()
    wlist = w.tolist()
    um, uc = ulist[0], ulist[1]
    wm, wc = wlist[0], wlist[1]
    rescale = 0
    for i in range(2, len(ulist)):
        wn = wlist[i]
        un = ((12.0 - 10.0 * wc) * uc - wm * um) / wn
        if abs(un) > 1e250:
            # renormalize in place to dodge overflow (deep closed regions)
            scale = 1e-250
            un *= scale
            uc *= scale
            for jj in range(i):
                ulist[jj] *= scale
            rescale += 1
            if rescale > 40:
                raise OverflowError("Numerov solution overflows repeatedly")
        ulist[i] = un
        um, uc = uc, un
        wm, wc = wc, wn
    return np.array(ulist)


def _derivative_5pt(u: np.ndarray, i: int, h: float) -> float:
    return (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * h)


def extract_phase(u: np.ndarray, l: int, k: float, zeta: float,
                  grid: NumerovGrid, r_match: float | None = None,
                  check_second_point: bool = True):
    """Phase shift and flux normalization from the integrated wave.

    Matches u and its 5-point derivative at r_match to the exterior pair
    (Riccati-Bessel for zeta = 0, Coulomb F/G otherwise).  Returns
    (delta, norm) with delta folded into (-pi/2, pi/2] and norm the factor
    that rescales u to cos(delta) F + sin(delta) G (times 1/sqrt(v)).

    Raises MatchingError for a node at the matching radius or if a second
    matching point two steps away disagrees by more than 1e-5 rad.
    """
    r = grid.radii()
    rm = grid.r_match if r_match is None else r_match
    i = int(round((rm - grid.r_min) / grid.h))
    i = min(max(i, 2), len(r) - 3)
    delta, norm = _match_at(u, i, r, grid.h, l, k, zeta)
    if check_second_point:
        shift = max(2, int(round(0.25 * math.pi / k / grid.h / 4)))
        i2 = min(i + shift, len(r) - 3)
        delta2, _ = _match_at(u, i2, r, grid.h, l, k, zeta)
        if abs(_wrap_pi(delta - delta2)) > 1e-5:
            raise MatchingError(
                f"phase unstable between r = {r[i]:.3f} and {r[i2]:.3f} fm: "
                f"{delta} vs {delta2}")
    return delta, norm


def _wrap_pi(x: float) -> float:
    """Reduce an angle difference modulo pi into (-pi/2, pi/2]."""
    y = math.fmod(x, math.pi)
    if y > math.pi / 2:
        y -= math.pi
    elif y <= -math.pi / 2:
        y += math.pi
    return y


def _match_at(u, i, r, h, l, k, zeta):
    rho = k * r[i]
    y = u[i]
    yp = _derivative_5pt(u, i, h)
    if zeta == 0.0:
        fa, ga, fap, gap = riccati_bessel(l, rho)
    else:
        cw = coulomb_wave(l, zeta, rho)
        fa, ga, fap, gap = cw.F, cw.G, cw.dF, cw.dG
    scale = math.hypot(y, yp / k)
    if abs(y) < 1e-9 * scale and abs(yp) < 1e-9 * scale:
        raise MatchingError(f"wave vanishes at matching radius r = {r[i]}")
    num = yp * fa - y * k * fap
    den = y * k * gap - yp * ga
    if abs(num) < 1e-14 * scale and abs(den) < 1e-14 * scale:
        raise MatchingError("degenerate matching: both projections vanish")
    delta = math.atan2(num, den)
    if delta <= -math.pi / 2:
        delta += math.pi
    elif delta > math.pi / 2:
        delta -= math.pi
    target = (math.cos(delta) * fa + math.sin(delta) * ga)
    if abs(y) < 1e-12 * scale:
        raise MatchingError(f"node at matching radius r = {r[i]}")
    norm = target / y
    return delta, norm


def phase_with_error_estimate(potential: RadialPotential | None, l: int,
                              energy: float, grid: NumerovGrid, mu: float,
                              zeta: float = 0.0, zeta_k: float = 0.0):
    """(delta, step-halving error estimate) for one energy."""
    k = math.sqrt(2.0 * mu * energy) / HBAR_C
    u = integrate_radial(potential, l, energy, grid, mu, zeta_k)
    delta, _ = extract_phase(u, l, k, zeta, grid)
    fine = NumerovGrid(r_min=grid.r_min / 2.0, r_max=grid.r_max,
                       h=grid.h / 2.0, r_match=grid.r_match)
    u2 = integrate_radial(potential, l, energy, fine, mu, zeta_k)
    delta2, _ = extract_phase(u2, l, k, zeta, fine)
    return delta2, abs(_wrap_pi(delta - delta2))


def normalized_wave(potential: RadialPotential | None, l: int, energy: float,
                    grid: NumerovGrid, mu: float, zeta: float = 0.0,
                    zeta_k: float = 0.0):
    """(r, u_bar, delta): reduced wave normalized to the flux convention.

    After normalization u_bar(r) -> (1/sqrt(v)) [cos(delta) F + sin(delta) G]
    in the asymptotic region (Riccati-Bessel at zeta = 0), i.e. u_bar = r*u_l
    with u_l the partial amplitude of the unit-flux scattering state.
    """
    k = math.sqrt(2.0 * mu * energy) / HBAR_C
    u = integrate_radial(potential, l, energy, grid, mu, zeta_k)
    delta, norm = extract_phase(u, l, k, zeta, grid)
    vfac = math.sqrt(velocity(k, mu))
    return grid.radii(), u * (norm / vfac), delta


def overlap_coefficient(r: np.ndarray, u_bar: np.ndarray, hbar_omega: float,
                        mu: float, l: int, n: int) -> float:
    """a_nl = int u_l R_nl r^2 dr = int u_bar R_nl r dr (Simpson on the grid).

    u_bar must be the reduced wave normalized by `normalized_wave`.  The
    oscillator radial function is evaluated locally from the special-function
    layer to keep this oracle independent of the basis-expansion code.
    """
    from scipy.integrate import simpson

    r0 = HBAR_C / math.sqrt(mu * hbar_omega)
    x = (r / r0) ** 2
    # vectorized Laguerre recurrence on the grid
    lprev = np.ones_like(r)
    lcur = 1.0 + (l + 0.5) - x if n >= 1 else lprev
    if n == 0:
        lval = lprev
    elif n == 1:
        lval = lcur
    else:
        for m in range(1, n):
            lprev, lcur = lcur, ((2 * m + l + 1.5 - x) * lcur
                                 - (m + l + 0.5) * lprev) / (m + 1)
        lval = lcur
    rnl = ((-1.0) ** n * math.sqrt(2.0 / r0 ** 3)
           * math.exp(log_norm_ratio(n, l)) * (r / r0) ** l
           * np.exp(-x / 2.0) * lval)
    r_cut = 2.0 * r0 * math.sqrt(n + l / 2.0 + 0.75) + 8.0 * r0
    mask = r <= r_cut
    return float(simpson(u_bar[mask] * rnl[mask] * r[mask], x=r[mask]))


def integrate_coupled(potential_blocks, channels, energy: float,
                      grid: NumerovGrid) -> np.ndarray:
    """Matrix Numerov: M regular solution columns of the coupled equations.

    potential_blocks[i][j] maps r -> V_ij(r) (RadialPotential or None);
    channels is a sequence of (l, mu, threshold) triples.  Returns the
    solution tensor with shape (n_points, M, M); columns are seeded on
    distinct channels and re-orthogonalized during the sweep.
    """
    r = grid.radii()
    m = len(channels)
    n_pts = r.size
    f = np.zeros((n_pts, m, m))
    for i, (l, mu, eps) in enumerate(channels):
        f[:, i, i] += l * (l + 1) / r ** 2
        for j, (lj, muj, epsj) in enumerate(channels):
            pot = potential_blocks[i][j]
            v = pot(r) if pot is not None else 0.0
            f[:, i, j] += 2.0 * mu / HBAR_C ** 2 * (
                v + ((eps - energy) if i == j else 0.0))
    h2 = grid.h ** 2
    w = np.eye(m)[np.newaxis, :, :] - h2 / 12.0 * f
    u = np.zeros((n_pts, m, m))
    for i, (l, mu, eps) in enumerate(channels):
        u[0, i, i] = r[0] ** (l + 1)
        u[1, i, i] = r[1] ** (l + 1)
    twelve = 12.0 * np.eye(m)
    for idx in range(2, n_pts):
        rhs = (twelve - 10.0 * w[idx - 1]) @ u[idx - 1] - w[idx - 2] @ u[idx - 2]
        u[idx] = np.linalg.solve(w[idx], rhs)
    # open channels stay oscillatory, so the columns remain independent;
    # guard against silent degeneracy anyway
    mid = u[n_pts // 2]
    if np.linalg.cond(mid) > 1e10:
        raise MatchingError("coupled Numerov columns became degenerate; "
                            "all channels must be open")
    return u


def extract_coupled_smatrix(u: np.ndarray, channels, energy: float,
                            grid: NumerovGrid,
                            charges=None) -> np.ndarray:
    """S-matrix from the coupled solution by matching at grid.r_match.

    Matches Y, Y' to (1/sqrt(v)) [c +/- i s](k r) per channel (Coulomb
    F/G combinations for charged channels):

        S = [Y'Y^-1 H+ - H+']^-1 [Y'Y^-1 H- - H-'].
    """
    r = grid.radii()
    i = int(round((grid.r_match - grid.r_min) / grid.h))
    i = min(max(i, 2), len(r) - 3)
    m = len(channels)
    y = u[i]
    yp = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * grid.h)
    hplus = np.zeros(m, dtype=complex)
    hminus = np.zeros(m, dtype=complex)
    hplus_p = np.zeros(m, dtype=complex)
    hminus_p = np.zeros(m, dtype=complex)
    for j, (l, mu, eps) in enumerate(channels):
        k = math.sqrt(2.0 * mu * (energy - eps)) / HBAR_C
        v = velocity(k, mu)
        rho = k * r[i]
        z = charges[j] if charges is not None else 0.0
        if z == 0.0:
            s, c, sp, cp = riccati_bessel(l, rho)
        else:
            from .constants import sommerfeld_parameter

            cw = coulomb_wave(l, sommerfeld_parameter(z, mu, k), rho)
            s, c, sp, cp = cw.F, cw.G, cw.dF, cw.dG
        sv = math.sqrt(v)
        hplus[j] = (c + 1j * s) / sv
        hminus[j] = (c - 1j * s) / sv
        hplus_p[j] = k * (cp + 1j * sp) / sv
        hminus_p[j] = k * (cp - 1j * sp) / sv
    logd = yp @ np.linalg.inv(y)
    lhs = logd * hplus[np.newaxis, :] - np.diag(hplus_p)
    rhs = logd * hminus[np.newaxis, :] - np.diag(hminus_p)
    return np.linalg.solve(lhs, rhs)


def coupled_eigenphases(s: np.ndarray) -> np.ndarray:
    """Sorted eigenphases delta_i of a unitary symmetric S = e^{2i delta}."""
    vals = np.linalg.eigvals(s)
    return np.sort(0.5 * np.angle(vals))


def bound_state_energy(potential: RadialPotential, l: int, mu: float,
                       e_min: float, e_max: float, grid: NumerovGrid,
                       tol: float = 1e-7) -> float:
    """Lowest bound state in (e_min, e_max) by two-sided shooting (MeV).

    Bisection on the log-derivative mismatch at the matching radius between
    the outward regular solution and the inward exp(-kappa r) solution.
    """

    def mismatch(energy):
        u_out = integrate_radial(potential, l, energy, grid, mu)
        r = grid.radii()
        i = int(round((grid.r_match - grid.r_min) / grid.h))
        kappa = math.sqrt(-2.0 * mu * energy) / HBAR_C
        # inward sweep on the same grid (decaying solution, stable inward)
        f = (l * (l + 1) / r ** 2
             + 2.0 * mu * (potential(r) - energy) / HBAR_C ** 2)
        h2 = grid.h ** 2
        w = 1.0 - h2 / 12.0 * f
        n_pts = len(r)
        u_in = np.zeros(n_pts)
        u_in[-1] = 1e-20
        u_in[-2] = u_in[-1] * math.exp(kappa * grid.h)
        for idx in range(n_pts - 3, i - 3, -1):
            u_in[idx] = ((12.0 - 10.0 * w[idx + 1]) * u_in[idx + 1]
                         - w[idx + 2] * u_in[idx + 2]) / w[idx]
        # Wronskian mismatch: smooth in E, zero at eigenvalues, no node poles
        dout = _derivative_5pt(u_out, i, grid.h)
        din = _derivative_5pt(u_in, i, grid.h)
        wr = dout * u_in[i] - din * u_out[i]
        scale = (abs(dout * u_in[i]) + abs(din * u_out[i]) + 1e-300)
        return wr / scale

    lo, hi = e_min, e_max
    flo = mismatch(lo)
    fhi = mismatch(hi)
    if flo * fhi > 0:
        # scan for a sign change
        es = np.linspace(e_min, e_max, 41)
        vals = [mismatch(e) for e in es]
        for a, b, fa, fb in zip(es[:-1], es[1:], vals[:-1], vals[1:]):
            if fa * fb <= 0:
                lo, hi, flo, fhi = a, b, fa, fb
                break
        else:
            raise ValueError(
                f"no bound state bracketed in ({e_min}, {e_max}) MeV")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = mismatch(mid)
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)
