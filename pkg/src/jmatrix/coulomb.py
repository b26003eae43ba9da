"""Charged-particle scattering through the auxiliary cut potential.

The Coulomb tail is removed beyond the channel radius b,

    V_aux = V_nuclear + Z1 Z2 e^2 / r   for r <= b,    0 for r > b,

so the auxiliary problem is short-range and solvable in the oscillator
basis with a moderate truncation.  The physical phase shift relative to
the Coulomb functions follows from equating the logarithmic derivative at
r = b of the auxiliary exterior form (Riccati-Bessel s, c) and of the
Coulomb exterior form (F, G):

    tan(delta) = - [c_osc W(s,F) - s_osc W(c,F)]
                 / [c_osc W(s,G) - s_osc W(c,G)],

with c_osc = C_N - G_NN C_{N+1}, s_osc = S_N - G_NN S_{N+1} and
W(x, y) = x'y - xy' the quasi-Wronskians at rho = k b.  The observable
total phase is delta + eta_l.  Interior waves of the auxiliary problem
are rescaled by N_ren = u(b)/u_aux(b) to carry the Coulomb normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import OscillatorBasis, asymptotic_solutions, classical_turning_point
from .constants import E2, HBAR_C, sommerfeld_parameter
from .hamiltonian import RadialPotential, TruncatedHamiltonian, diagonalize
from .single_channel import ScatteringSolution, coefficients, reconstruct_wavefunction
from .special import coulomb_wave, riccati_bessel


class ChannelRadiusWindowError(ValueError):
    """Channel radius outside [R_nucl, r_N^cl)."""


class NodeAtMatchingRadiusError(RuntimeError):
    """The auxiliary wave vanishes at r = b; pick a different radius."""


@dataclass(frozen=True)
class CoulombProblem:
    """Charged-particle scattering setup with a cut-potential channel radius.

    The window R_nucl <= b < r_N^cl must hold: the truncated basis has to
    resolve the potential jump at b, and the cut must not clip the nuclear
    interior.
    """

    nuclear: RadialPotential
    z1z2: float
    b: float
    basis: OscillatorBasis
    n_trunc: int
    enforce_window: bool = True

    def __post_init__(self):
        if not self.enforce_window:
            return
        r_cl = classical_turning_point(self.basis, self.n_trunc)
        if not (self.nuclear.range_hint <= self.b < r_cl):
            raise ChannelRadiusWindowError(
                f"need R_nucl = {self.nuclear.range_hint:.3f} fm <= b < "
                f"r_N^cl = {r_cl:.3f} fm, got b = {self.b} fm")


def build_auxiliary_potential(problem: CoulombProblem) -> RadialPotential:
    """Nuclear + point Coulomb inside r <= b, exactly zero beyond (sharp cut)."""
    b = problem.b
    z1z2 = problem.z1z2
    nuclear = problem.nuclear

    def evaluator(r):
        r = np.asarray(r, dtype=float)
        rr = np.where(r > 1e-12, r, 1e-12)
        inside = nuclear(r) + z1z2 * E2 / rr
        return np.where(r <= b, inside, 0.0)

    breakpoints = tuple(sorted({b, *nuclear.breakpoints}))
    return RadialPotential(evaluator=evaluator, range_hint=b,
                           breakpoints=breakpoints)


def auxiliary_hamiltonian(problem: CoulombProblem,
                          smoothing: bool = False) -> TruncatedHamiltonian:
    """Diagonalize the truncated Hamiltonian of the cut potential."""
    return diagonalize(problem.basis, build_auxiliary_potential(problem),
                       problem.n_trunc, smoothing=smoothing)


def _quasi_wronskians(l: int, zeta: float, rho: float):
    """(W(s,F), W(c,F), W(s,G), W(c,G)) at rho, with rho-derivatives."""
    s, c, sp, cp = riccati_bessel(l, rho)
    cw = coulomb_wave(l, zeta, rho)
    wsf = sp * cw.F - s * cw.dF
    wcf = cp * cw.F - c * cw.dF
    wsg = sp * cw.G - s * cw.dG
    wcg = cp * cw.G - c * cw.dG
    return wsf, wcf, wsg, wcg, cw


def coulomb_phase_shift(problem: CoulombProblem, h_aux: TruncatedHamiltonian,
                        energy: float, route: str = "g-matrix"):
    """(delta_l, eta_l) of the full charged problem at this energy.

    route = "g-matrix" uses the oscillator-space edge quantities directly;
    route = "aux-delta" passes through the auxiliary phase shift
    tan(delta_aux) first.  Both are the same algebra and must agree.
    """
    mu = problem.basis.mu
    if energy <= 0.0:
        raise ValueError(f"need E > 0, got {energy} MeV")
    k = math.sqrt(2.0 * mu * energy) / HBAR_C
    zeta = sommerfeld_parameter(problem.z1z2, mu, k)
    rho = k * problem.b
    n = h_aux.n_trunc
    sols = asymptotic_solutions(problem.basis, n + 1, k)
    g = h_aux.g_nn(energy)
    c_osc = sols.C[n] - g * sols.C[n + 1]
    s_osc = sols.S[n] - g * sols.S[n + 1]
    wsf, wcf, wsg, wcg, cw = _quasi_wronskians(problem.basis.l, zeta, rho)
    if route == "g-matrix":
        num = -(c_osc * wsf - s_osc * wcf)
        den = c_osc * wsg - s_osc * wcg
    elif route == "aux-delta":
        tan_aux = -s_osc / c_osc
        num = -(wsf + tan_aux * wcf)
        den = wsg + tan_aux * wcg
    else:
        raise ValueError(f"unknown route {route!r}")
    scale = math.hypot(num, den)
    if scale < 1e-300:
        raise RuntimeError(f"degenerate matching at E = {energy} MeV")
    delta = math.atan2(num, den)
    if delta <= -math.pi / 2:
        delta += math.pi
    elif delta > math.pi / 2:
        delta -= math.pi
    return delta, cw.eta_l


def auxiliary_phase_shift(h_aux: TruncatedHamiltonian, energy: float) -> float:
    """Short-range phase shift of the cut potential (oscillator formula)."""
    from .single_channel import phase_shift

    return phase_shift(h_aux, energy)


@dataclass(frozen=True)
class PlateauScan:
    """delta_l(b) table with the detected stability plateau."""

    b_values: np.ndarray = field(repr=False)
    deltas: np.ndarray = field(repr=False)
    in_window: np.ndarray = field(repr=False)
    plateau_lo: float
    plateau_hi: float
    plateau_delta: float

    @property
    def plateau_width(self) -> float:
        return self.plateau_hi - self.plateau_lo


def plateau_scan(nuclear: RadialPotential, z1z2: float, basis: OscillatorBasis,
                 n_trunc: int, energy: float, b_grid,
                 smoothing: bool = False, tol: float = 0.02) -> PlateauScan:
    """delta_l(b) over a grid of cut radii with a flatness detector.

    Every b gets its own auxiliary diagonalization.  Radii outside the
    validity window are flagged but still computed.  The plateau is the
    widest contiguous run with max - min < tol (radians).
    """
    b_grid = np.asarray(b_grid, dtype=float)
    r_cl = classical_turning_point(basis, n_trunc)
    deltas = np.empty_like(b_grid)
    window = np.empty_like(b_grid, dtype=bool)
    for i, b in enumerate(b_grid):
        window[i] = nuclear.range_hint <= b < r_cl
        prob = CoulombProblem(nuclear=nuclear, z1z2=z1z2, b=float(b),
                              basis=basis, n_trunc=n_trunc,
                              enforce_window=False)
        h_aux = auxiliary_hamiltonian(prob, smoothing=smoothing)
        deltas[i], _ = coulomb_phase_shift(prob, h_aux, energy)
    # widest contiguous run with max - min < tol
    lo_best, hi_best = float(b_grid[0]), float(b_grid[0])
    n_pts = b_grid.size
    for i in range(n_pts):
        dmin = dmax = deltas[i]
        for j in range(i, n_pts):
            dmin = min(dmin, deltas[j])
            dmax = max(dmax, deltas[j])
            if dmax - dmin >= tol:
                break
            if b_grid[j] - b_grid[i] > hi_best - lo_best:
                lo_best, hi_best = float(b_grid[i]), float(b_grid[j])
    mask = (b_grid >= lo_best) & (b_grid <= hi_best)
    value = float(np.median(deltas[mask]))
    return PlateauScan(b_values=b_grid, deltas=deltas, in_window=window,
                       plateau_lo=float(lo_best), plateau_hi=float(hi_best),
                       plateau_delta=value)


def renormalize(problem: CoulombProblem, h_aux: TruncatedHamiltonian,
                energy: float, sol_aux: ScatteringSolution | None = None,
                r_grid=None, m_max: int | None = None):
    """Renormalization factor N_ren = u(b)/u_aux(b) and the interior wave.

    With the flux-normalized exterior forms,

        N_ren = [cos(d) F + sin(d) G] / [cos(d_aux) s + sin(d_aux) c]

    at rho = k b; the renormalized interior wave N_ren * u_aux equals the
    Coulomb exterior form at r = b by construction.  Returns
    (N_ren, r_grid, wave) where wave is the renormalized reduced interior
    wave on r_grid (empty grid allowed).
    """
    mu = problem.basis.mu
    k = math.sqrt(2.0 * mu * energy) / HBAR_C
    zeta = sommerfeld_parameter(problem.z1z2, mu, k) if problem.z1z2 else 0.0
    rho = k * problem.b
    delta, _ = coulomb_phase_shift(problem, h_aux, energy)
    if sol_aux is None:
        sol_aux = coefficients(h_aux, energy, n_asym=m_max)
    d_aux = sol_aux.delta
    s, c, _, _ = riccati_bessel(problem.basis.l, rho)
    if zeta == 0.0:
        f_val, g_val = s, c
    else:
        cw = coulomb_wave(problem.basis.l, zeta, rho)
        f_val, g_val = cw.F, cw.G
    den = math.cos(d_aux) * s + math.sin(d_aux) * c
    if abs(den) < 1e-10 * math.hypot(s, c):
        raise NodeAtMatchingRadiusError(
            f"auxiliary wave has a node at b = {problem.b} fm "
            f"(E = {energy} MeV); choose a different channel radius")
    n_ren = (math.cos(delta) * f_val + math.sin(delta) * g_val) / den
    if r_grid is None:
        r_grid = np.linspace(0.0, problem.b, 201)
    wave = n_ren * reconstruct_wavefunction(sol_aux, r_grid, m_max)
    return n_ren, np.asarray(r_grid, dtype=float), wave
