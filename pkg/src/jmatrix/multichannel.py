"""Coupled-channel scattering in the oscillator representation.

Channel-space (M x M) relations used here, all with per-channel edge
quantities S_N, S_{N+1}, C_N, C_{N+1} at the channel momenta and the
spectral matrix G built from one diagonalization of the coupled truncated
Hamiltonian:

* S-matrix           [S] = {[C+_N] - [G][C+_{N+1}]}^-1 {[C-_N] - [G][C-_{N+1}]},
  with the transposed variant used as a cross-check,
* interior waves     a_n = [G rows] a^as_{N+1},
  a^as_n = delta C^-_n - S C^+_n,  C^(+/-) = C +/- i S,
* P-matrix           real form built from the free exterior pair and [G]^T,
  with [R] = [P]^-1 and the generalized symmetry
  [mu/b][P]^T = [P][mu/b],
* discrete analogue  [P] = 2[N+l/2+5/4]([1] - [b0]^(-1/2)[r0]^-1 [G] [r0][b0]^(1/2)) - [1],
* Coulomb S-matrix through the per-channel cut potentials, either from the
  auxiliary [P] or from the auxiliary [S], and the renormalization matrix
  [N] = {[G+][S] - [G-]}{[H+][S_aux] - [H-]}^-1 that rescales interior
  auxiliary waves to the Coulomb normalization.

All channels must be open at the working energy; closed channels are
rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import (OscillatorBasis, asymptotic_solutions, kinetic_matrix,
                    kinetic_off_diagonal, radial_function_matrix)
from .constants import E2, HBAR_C, sommerfeld_parameter, velocity
from .hamiltonian import (RadialPotential, _POLE_GUARD, GMatrixPoleError,
                          potential_matrix_cross)
from .pmatrix import natural_channel_radius
from .special import coulomb_wave, riccati_bessel, spherical_bessel

_ILL_CONDITIONED = 1e12


class ClosedChannelError(ValueError):
    """Total energy below some channel threshold."""


@dataclass(frozen=True)
class Channel:
    """One binary fragmentation: quantum numbers and basis parameters."""

    l: int
    mu: float  # MeV/c^2
    threshold: float = 0.0  # MeV
    z1z2: float = 0.0
    n_trunc: int = 10
    hbar_omega: float = 18.0

    @property
    def basis(self) -> OscillatorBasis:
        return OscillatorBasis(self.hbar_omega, self.mu, self.l)


@dataclass(frozen=True)
class CoupledProblem:
    """Channels plus the symmetric matrix of short-range coupling potentials.

    potentials[i][j] is the nuclear potential in channel block (i, j); the
    diagonal Coulomb tails are generated from the channel charges when a
    cut-potential (auxiliary) Hamiltonian is requested.
    """

    channels: tuple
    potentials: tuple  # tuple of tuples of RadialPotential or None

    def __post_init__(self):
        m = len(self.channels)
        if len(self.potentials) != m or any(len(row) != m for row in self.potentials):
            raise ValueError("potentials must be an MxM nested tuple")

    @property
    def m(self) -> int:
        return len(self.channels)


def channel_momenta(problem: CoupledProblem, energy: float) -> np.ndarray:
    """k_Gamma = sqrt(2 mu_G (E - eps_G))/hbar c; rejects closed channels."""
    ks = np.empty(problem.m)
    for i, ch in enumerate(problem.channels):
        rel = energy - ch.threshold
        if rel <= 0.0:
            raise ClosedChannelError(
                f"channel {i} closed: E = {energy} MeV <= threshold "
                f"{ch.threshold} MeV")
        ks[i] = math.sqrt(2.0 * ch.mu * rel) / HBAR_C
    return ks


def _cut_potential(nuclear: RadialPotential | None, z1z2: float,
                   b_row: float | None, b_col: float | None):
    """Apply the sharp channel-radius cut to one potential block."""
    if b_row is None and b_col is None and z1z2 == 0.0:
        return nuclear
    b_eff = None
    if b_row is not None or b_col is not None:
        b_eff = min(b for b in (b_row, b_col) if b is not None)

    def evaluator(r):
        r = np.asarray(r, dtype=float)
        rr = np.where(r > 1e-12, r, 1e-12)
        val = nuclear(r) if nuclear is not None else np.zeros_like(r)
        if z1z2 != 0.0:
            val = val + z1z2 * E2 / rr
        if b_eff is not None:
            val = np.where(r <= b_eff, val, 0.0)
        return val

    hint = b_eff if b_eff is not None else (
        nuclear.range_hint if nuclear is not None else 1.0)
    breaks = set(nuclear.breakpoints) if nuclear is not None else set()
    if b_eff is not None:
        breaks.add(b_eff)
    return RadialPotential(evaluator=evaluator, range_hint=hint,
                           breakpoints=tuple(sorted(breaks)))


@dataclass(frozen=True)
class CoupledHamiltonian:
    """Eigendecomposition of the coupled truncated Hamiltonian.

    The global index concatenates channels: block i occupies
    offsets[i] .. offsets[i+1]-1 and holds oscillator indices 0..N_i.
    """

    problem: CoupledProblem
    offsets: tuple
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    t_edges: np.ndarray = field(repr=False)
    cut_radii: tuple | None = None

    def edge_rows(self) -> np.ndarray:
        """gamma_{lambda, N_Gamma} for every channel; shape (M, n_lambda)."""
        rows = [self.offsets[i + 1] - 1 for i in range(self.problem.m)]
        return self.eigenvectors[rows, :]

    def g_matrix(self, energy: float) -> np.ndarray:
        """[G]_{Gamma Gamma'} = G^{GG'}_{N_G N_G'}(E), M x M."""
        denom = self.eigenvalues - energy
        lam = int(np.argmin(np.abs(denom)))
        if abs(denom[lam]) < _POLE_GUARD:
            raise GMatrixPoleError(energy, lam, float(self.eigenvalues[lam]))
        edge = self.edge_rows()
        core = (edge / denom) @ edge.T  # (M, M)
        return -core * self.t_edges[np.newaxis, :]

    def g_interior(self, energy: float, channel: int) -> np.ndarray:
        """G^{Gamma Gamma'}_{n N_Gamma'}(E) for all n in `channel`; (N_G+1, M)."""
        denom = self.eigenvalues - energy
        lam = int(np.argmin(np.abs(denom)))
        if abs(denom[lam]) < _POLE_GUARD:
            raise GMatrixPoleError(energy, lam, float(self.eigenvalues[lam]))
        edge = self.edge_rows()
        rows = self.eigenvectors[self.offsets[channel]:self.offsets[channel + 1], :]
        return -(rows / denom) @ edge.T * self.t_edges[np.newaxis, :]


def coupled_hamiltonian(problem: CoupledProblem, cut_radii=None,
                        smoothing: bool = False) -> CoupledHamiltonian:
    """Assemble and diagonalize the coupled truncated Hamiltonian.

    cut_radii, when given, builds the auxiliary short-range problem: every
    block is cut at the (smaller) channel radius and the diagonal charge
    tails are included inside the cut.
    """
    m = problem.m
    sizes = [ch.n_trunc + 1 for ch in problem.channels]
    offsets = [0]
    for s in sizes:
        offsets.append(offsets[-1] + s)
    total = offsets[-1]
    h = np.zeros((total, total))
    radii = list(cut_radii) if cut_radii is not None else [None] * m
    for i, chi in enumerate(problem.channels):
        bi = chi.basis
        sl_i = slice(offsets[i], offsets[i + 1])
        t = kinetic_matrix(bi, chi.n_trunc)
        h[sl_i, sl_i] += t + chi.threshold * np.eye(sizes[i])
        for j, chj in enumerate(problem.channels):
            if j < i:
                continue
            nuclear = problem.potentials[i][j]
            z = chi.z1z2 if i == j else 0.0
            pot = _cut_potential(nuclear, z if cut_radii is not None else 0.0,
                                 radii[i], radii[j])
            if pot is None:
                continue
            if cut_radii is None and i == j and chi.z1z2 != 0.0:
                raise ValueError(
                    "charged channels need cut_radii (auxiliary problem); "
                    "the bare Coulomb tail is not representable in a "
                    "truncated oscillator basis")
            block = potential_matrix_cross(bi, chj.basis, pot,
                                           chi.n_trunc, chj.n_trunc)
            if smoothing:
                si = _sigma(sizes[i])
                sj = _sigma(sizes[j])
                block = block * np.outer(si, sj)
            sl_j = slice(offsets[j], offsets[j + 1])
            h[sl_i, sl_j] += block
            if j > i:
                h[sl_j, sl_i] += block.T
    eigvals, eigvecs = np.linalg.eigh(0.5 * (h + h.T))
    t_edges = np.array([kinetic_off_diagonal(ch.basis, ch.n_trunc)
                        for ch in problem.channels])
    return CoupledHamiltonian(problem=problem, offsets=tuple(offsets),
                              eigenvalues=eigvals, eigenvectors=eigvecs,
                              t_edges=t_edges,
                              cut_radii=tuple(radii) if cut_radii is not None else None)


def _sigma(size: int) -> np.ndarray:
    arg = np.pi * (np.arange(size) + 1.0) / (size + 1.0)
    return np.sin(arg) / arg


def _edge_solutions(problem: CoupledProblem, energy: float):
    """Per-channel (S_N, S_{N+1}, C_N, C_{N+1}, k, v) arrays."""
    ks = channel_momenta(problem, energy)
    m = problem.m
    s_n = np.empty(m)
    s_n1 = np.empty(m)
    c_n = np.empty(m)
    c_n1 = np.empty(m)
    vs = np.empty(m)
    for i, ch in enumerate(problem.channels):
        sols = asymptotic_solutions(ch.basis, ch.n_trunc + 1, ks[i])
        n = ch.n_trunc
        s_n[i], s_n1[i] = sols.S[n], sols.S[n + 1]
        c_n[i], c_n1[i] = sols.C[n], sols.C[n + 1]
        vs[i] = velocity(ks[i], ch.mu)
    return s_n, s_n1, c_n, c_n1, ks, vs


@dataclass(frozen=True)
class SMatrix:
    """Coupled-channel scattering matrix at one total energy."""

    matrix: np.ndarray = field(repr=False)
    energy: float
    condition_number: float
    cross_check_defect: float

    @property
    def ill_conditioned(self) -> bool:
        return self.condition_number > _ILL_CONDITIONED

    def unitarity_defect(self) -> float:
        m = self.matrix
        return float(np.linalg.norm(m.conj().T @ m - np.eye(m.shape[0])))

    def symmetry_defect(self) -> float:
        return float(np.linalg.norm(self.matrix - self.matrix.T))

    def eigenphases(self) -> np.ndarray:
        """Phases delta_i with eigenvalues e^{2 i delta_i}, sorted ascending."""
        vals = np.linalg.eigvals(self.matrix)
        phases = 0.5 * np.angle(vals)
        return np.sort(phases)


def s_matrix(h: CoupledHamiltonian, energy: float) -> SMatrix:
    """[S](E) from the coupled G matrix; both matrix orderings are computed
    and their Frobenius difference is stored as cross_check_defect."""
    problem = h.problem
    s_n, s_n1, c_n, c_n1, _, _ = _edge_solutions(problem, energy)
    g = h.g_matrix(energy)
    cp_n, cm_n = c_n + 1j * s_n, c_n - 1j * s_n
    cp_n1, cm_n1 = c_n1 + 1j * s_n1, c_n1 - 1j * s_n1
    a = np.diag(cp_n) - g * cp_n1[np.newaxis, :]
    b = np.diag(cm_n) - g * cm_n1[np.newaxis, :]
    cond = float(np.linalg.cond(a))
    s = np.linalg.solve(a, b)
    # transposed route: {[C-_N] - [C-_{N+1}][G]^T}{[C+_N] - [C+_{N+1}][G]^T}^-1
    at = np.diag(cp_n) - cp_n1[:, np.newaxis] * g.T
    bt = np.diag(cm_n) - cm_n1[:, np.newaxis] * g.T
    s_alt = np.linalg.solve(at.T, bt.T).T
    defect = float(np.linalg.norm(s - s_alt))
    return SMatrix(matrix=s, energy=energy, condition_number=cond,
                   cross_check_defect=defect)


def asymptotic_coefficient_matrix(problem: CoupledProblem, energy: float,
                                  s: np.ndarray, n: int,
                                  channel: int) -> np.ndarray:
    """Row a^as_{n Gamma (.)} = delta C^-_n - S_{Gamma .} C^+_n (length M)."""
    ch = problem.channels[channel]
    k = channel_momenta(problem, energy)[channel]
    sols = asymptotic_solutions(ch.basis, n, k)
    cp = sols.C[n] + 1j * sols.S[n]
    cm = sols.C[n] - 1j * sols.S[n]
    row = -s[channel, :] * cp
    row[channel] += cm
    return row


def interior_coefficients(h: CoupledHamiltonian, energy: float,
                          s: np.ndarray, n_asym: int | None = None):
    """Channel coefficient matrices a_{n Gamma (Gamma_i)} up to n_asym.

    Returns a list over channels Gamma of complex arrays with shape
    (n_max+1, M): interior rows from the G matrix, asymptotic rows from the
    free-solution combination.
    """
    problem = h.problem
    ks = channel_momenta(problem, energy)
    m = problem.m
    # a^as at the first asymptotic index of every channel
    edge = np.empty((m, m), dtype=complex)
    for j, ch in enumerate(problem.channels):
        sols = asymptotic_solutions(ch.basis, ch.n_trunc + 1, ks[j])
        cp = sols.C[ch.n_trunc + 1] + 1j * sols.S[ch.n_trunc + 1]
        cm = sols.C[ch.n_trunc + 1] - 1j * sols.S[ch.n_trunc + 1]
        edge[j, :] = -s[j, :] * cp
        edge[j, j] += cm
    out = []
    for i, ch in enumerate(problem.channels):
        n_top = max(2 * ch.n_trunc, 50) if n_asym is None else n_asym
        sols = asymptotic_solutions(ch.basis, n_top, ks[i])
        cp = sols.C + 1j * sols.S
        cm = sols.C - 1j * sols.S
        block = -np.outer(cp, s[i, :])
        block[:, i] += cm
        interior = h.g_interior(energy, i) @ edge
        block[:ch.n_trunc + 1, :] = interior
        out.append(block)
    return out


def _free_exterior(problem: CoupledProblem, energy: float, radii):
    """Diagonal free exterior values (F, F', G, G') at r = b per channel.

    F = (k/sqrt(v)) j_l(kr), G = -(k/sqrt(v)) n_l(kr); primes are
    d/dr at r = b.
    """
    ks = channel_momenta(problem, energy)
    m = problem.m
    f = np.empty(m)
    fp = np.empty(m)
    g_ = np.empty(m)
    gp = np.empty(m)
    for i, ch in enumerate(problem.channels):
        k = ks[i]
        v = velocity(k, ch.mu)
        jl, nl, jlp, nlp = spherical_bessel(ch.l, k * radii[i])
        f[i] = k / math.sqrt(v) * jl
        fp[i] = k * k / math.sqrt(v) * jlp
        g_[i] = -k / math.sqrt(v) * nl
        gp[i] = -k * k / math.sqrt(v) * nlp
    return f, fp, g_, gp


@dataclass(frozen=True)
class PMatrixChannel:
    """Real multichannel P (and R = P^-1) with conditioning info."""

    P: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)
    energy: float
    condition_number: float

    @property
    def ill_conditioned(self) -> bool:
        return self.condition_number > _ILL_CONDITIONED

    def generalized_symmetry_defect(self, problem: CoupledProblem,
                                    radii) -> float:
        """Frobenius norm of [mu/b][P]^T - [P][mu/b], relative."""
        mu_b = np.array([ch.mu / b for ch, b in zip(problem.channels, radii)])
        lhs = mu_b[:, None] * self.P.T
        rhs = self.P * mu_b[None, :]
        return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(self.P), 1e-300))


def multichannel_p_matrix(h: CoupledHamiltonian, energy: float,
                          radii) -> PMatrixChannel:
    """Real M x M [P] at channel radii {b_Gamma} and its inverse [R]."""
    problem = h.problem
    s_n, s_n1, c_n, c_n1, _, _ = _edge_solutions(problem, energy)
    f, fp, g_, gp = _free_exterior(problem, energy, radii)
    gt = h.g_matrix(energy).T
    d_num = fp * c_n - gp * s_n
    d_num1 = fp * c_n1 - gp * s_n1
    d_den = f * c_n - g_ * s_n
    d_den1 = f * c_n1 - g_ * s_n1
    num = np.diag(d_num) - d_num1[:, None] * gt
    den = np.diag(d_den) - d_den1[:, None] * gt
    cond = float(np.linalg.cond(den))
    b_diag = np.asarray(radii, dtype=float)
    p = b_diag[:, None] * (num @ np.linalg.inv(den))
    r = np.linalg.inv(p)
    return PMatrixChannel(P=p, R=r, energy=energy, condition_number=cond)


def multichannel_natural_radii(problem: CoupledProblem) -> np.ndarray:
    """b0_Gamma = 2 r0^G sqrt(N_G + l_G/2 + 7/4), one uncoupled value per channel."""
    return np.array([natural_channel_radius(ch.basis, ch.n_trunc)
                     for ch in problem.channels])


def multichannel_discrete_p(h: CoupledHamiltonian, energy: float,
                            simplified: bool = False) -> np.ndarray:
    """Discrete analogue of [P] at the natural radii.

    The full form wraps [G] with the [r0] and [b0]^(1/2) similarity
    factors; `simplified` uses the equal-mass shortcut (valid when all r0
    coincide) that drops the [r0] factors.
    """
    problem = h.problem
    g = h.g_matrix(energy)
    b0 = multichannel_natural_radii(problem)
    r0 = np.array([ch.basis.r0 for ch in problem.channels])
    if simplified:
        wrap = np.sqrt(b0[None, :] / b0[:, None]) * g
    else:
        wrap = (r0[None, :] / r0[:, None]) * np.sqrt(b0[None, :] / b0[:, None]) * g
    pref = np.array([2.0 * (ch.n_trunc + ch.l / 2.0 + 1.25)
                     for ch in problem.channels])
    m = problem.m
    return pref[:, None] * (np.eye(m) - wrap) - np.eye(m)


def _coulomb_exterior(problem: CoupledProblem, energy: float, radii):
    """Diagonal (G+-, G+-' ) Coulomb exterior pairs at r = b per channel.

    G^(+/-) = (1/(r sqrt(v))) [G_l(zeta, kr) +/- i F_l(zeta, kr)] ->
    (1/(r sqrt(v))) exp(+/- i theta); at zero charge these reduce to the
    free combinations used in the short-range S-matrix.
    """
    ks = channel_momenta(problem, energy)
    m = problem.m
    gplus = np.empty(m, dtype=complex)
    gminus = np.empty(m, dtype=complex)
    gplus_p = np.empty(m, dtype=complex)
    gminus_p = np.empty(m, dtype=complex)
    for i, ch in enumerate(problem.channels):
        k = ks[i]
        b = radii[i]
        v = velocity(k, ch.mu)
        rho = k * b
        if ch.z1z2 == 0.0:
            s, c, sp, cp = riccati_bessel(ch.l, rho)
            fv, gv, fpv, gpv = s, c, sp, cp
        else:
            zeta = sommerfeld_parameter(ch.z1z2, ch.mu, k)
            cw = coulomb_wave(ch.l, zeta, rho)
            fv, gv, fpv, gpv = cw.F, cw.G, cw.dF, cw.dG
        sv = math.sqrt(v)
        val_p = (gv + 1j * fv) / (b * sv)
        val_m = (gv - 1j * fv) / (b * sv)
        der_p = (k * (gpv + 1j * fpv) / b - (gv + 1j * fv) / b ** 2) / sv
        der_m = (k * (gpv - 1j * fpv) / b - (gv - 1j * fv) / b ** 2) / sv
        gplus[i], gminus[i] = val_p, val_m
        gplus_p[i], gminus_p[i] = der_p, der_m
    return gplus, gminus, gplus_p, gminus_p


def _free_hankel_exterior(problem: CoupledProblem, energy: float, radii):
    """Diagonal (H+-, H+-') free exterior pairs (zero-charge G+-)."""
    ks = channel_momenta(problem, energy)
    m = problem.m
    hplus = np.empty(m, dtype=complex)
    hminus = np.empty(m, dtype=complex)
    hplus_p = np.empty(m, dtype=complex)
    hminus_p = np.empty(m, dtype=complex)
    for i, ch in enumerate(problem.channels):
        k = ks[i]
        b = radii[i]
        v = velocity(k, ch.mu)
        s, c, sp, cp = riccati_bessel(ch.l, k * b)
        sv = math.sqrt(v)
        hplus[i] = (c + 1j * s) / (b * sv)
        hminus[i] = (c - 1j * s) / (b * sv)
        hplus_p[i] = (k * (cp + 1j * sp) / b - (c + 1j * s) / b ** 2) / sv
        hminus_p[i] = (k * (cp - 1j * sp) / b - (c - 1j * s) / b ** 2) / sv
    return hplus, hminus, hplus_p, hminus_p


def multichannel_coulomb_s(problem: CoupledProblem, energy: float, radii,
                           smoothing: bool = False, route: str = "s-aux"):
    """Coulomb [S] via the per-channel cut potentials.

    route = "s-aux": from the auxiliary S-matrix (the multichannel
    generalization of the tan-delta relation); route = "p-aux": from the
    auxiliary P-matrix.  Both must agree.  Returns (SMatrix, S_aux).
    """
    h_aux = coupled_hamiltonian(problem, cut_radii=radii, smoothing=smoothing)
    s_aux = s_matrix(h_aux, energy)
    gp, gm, gpp, gmp = _coulomb_exterior(problem, energy, radii)
    if route == "p-aux":
        p_aux = multichannel_p_matrix(h_aux, energy, radii)
        binv = 1.0 / np.asarray(radii, dtype=float)
        lhs = (binv[:, None] * p_aux.P) * gp[None, :] - np.diag(gpp)
        rhs = (binv[:, None] * p_aux.P) * gm[None, :] - np.diag(gmp)
        cond = float(np.linalg.cond(lhs))
        s = np.linalg.solve(lhs, rhs)
    elif route == "s-aux":
        hp, hm, hpp, hmp = _free_hankel_exterior(problem, energy, radii)
        w_mm = hm * gmp - hmp * gm  # W(H-, G-)
        w_pm = hp * gmp - hpp * gm  # W(H+, G-)
        w_mp = hm * gpp - hmp * gp  # W(H-, G+)
        w_pp = hp * gpp - hpp * gp  # W(H+, G+)
        mu_b2 = np.array([ch.mu / b ** 2
                          for ch, b in zip(problem.channels, radii)])
        num = np.diag(w_mm) - w_pm[:, None] * s_aux.matrix
        den = np.diag(w_mp) - w_pp[:, None] * s_aux.matrix
        cond = float(np.linalg.cond(den))
        core = num @ np.linalg.inv(den)
        s = (1.0 / mu_b2)[:, None] * core * mu_b2[None, :]
    else:
        raise ValueError(f"unknown route {route!r}")
    result = SMatrix(matrix=s, energy=energy, condition_number=cond,
                     cross_check_defect=0.0)
    return result, s_aux


def multichannel_renormalize(problem: CoupledProblem, energy: float, radii,
                             s: np.ndarray, s_aux: np.ndarray) -> np.ndarray:
    """Renormalization matrix [N] = {[G+][S] - [G-]}{[H+][S_aux] - [H-]}^-1."""
    gp, gm, _, _ = _coulomb_exterior(problem, energy, radii)
    hp, hm, _, _ = _free_hankel_exterior(problem, energy, radii)
    num = gp[:, None] * s - np.diag(gm)
    den = hp[:, None] * s_aux - np.diag(hm)
    return num @ np.linalg.inv(den)


def interior_wave_matrix(h_aux: CoupledHamiltonian, energy: float,
                         s_aux: np.ndarray, r_points) -> list:
    """Auxiliary channel-wave matrix [u(r)] rows on per-channel r grids.

    Returns a list over channels Gamma of arrays (len(r_points), M) holding
    u_{Gamma(Gamma_i)}(r) = sum_n a_{n Gamma(Gamma_i)} R_{n l_Gamma}(r)
    in the delta C^- - S C^+ normalization.
    """
    problem = h_aux.problem
    coeffs = interior_coefficients(h_aux, energy, s_aux)
    out = []
    for i, ch in enumerate(problem.channels):
        block = coeffs[i]
        rmat = radial_function_matrix(ch.basis, block.shape[0] - 1,
                                      np.asarray(r_points, dtype=float))
        out.append(block.T @ rmat)  # (M, nr) -> transpose below
        out[-1] = out[-1].T
    return out
