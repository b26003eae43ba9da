"""Truncated interaction-region Hamiltonian in the oscillator basis.

Assembles H = T + V~ on oscillator indices 0..N (the potential is truncated
at N, the kinetic matrix is not), diagonalizes it once, and provides the
spectral combination

    G_{nN}(E) = - sum_lambda gamma_{lambda n} gamma_{lambda N}
                / (E_lambda - E) * T_{N,N+1}

that links interior coefficients to the asymptotic solution.  Potential
matrix elements are computed by panelled Gauss-Legendre quadrature with the
domain cut at the classical turning point plus eight oscillator radii,
where the Gaussian envelope makes the tail negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .basis import (OscillatorBasis, classical_turning_point, kinetic_matrix,
                    kinetic_off_diagonal, radial_function_matrix)

_QUAD_TOL = 1e-10  # MeV, absolute
_POLE_GUARD = 1e-9  # MeV


class QuadratureError(RuntimeError):
    """Potential matrix quadrature failed to converge."""


class GMatrixPoleError(ValueError):
    """Energy too close to an eigenvalue of the truncated Hamiltonian."""

    def __init__(self, energy: float, lam: int, eigenvalue: float):
        super().__init__(
            f"E = {energy} MeV is within {_POLE_GUARD} MeV of eigenvalue "
            f"E_{lam} = {eigenvalue} MeV")
        self.energy = energy
        self.lam = lam
        self.eigenvalue = eigenvalue


@dataclass(frozen=True)
class RadialPotential:
    """Local radial potential V(r).

    evaluator maps an array of radii (fm) to energies (MeV); range_hint is
    the radius beyond which the short-range part is negligible; breakpoints
    lists radii where V is not smooth (quadrature panels split there).
    quad_tol overrides the default 1e-10 MeV quadrature target for
    evaluators that are only piecewise smooth (e.g. splined tables).
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    range_hint: float
    breakpoints: tuple = ()
    quad_tol: float | None = None

    def __call__(self, r):
        return self.evaluator(np.asarray(r, dtype=float))


def _panel_nodes(basis: OscillatorBasis, n_max: int, order: int,
                 breakpoints: Sequence[float]):
    """Gauss-Legendre nodes/weights on [0, r_cl(n_max) + 8 r0]."""
    r_max = classical_turning_point(basis, n_max) + 8.0 * basis.r0
    edges = sorted({0.0, r_max, *(b for b in breakpoints if 0.0 < b < r_max)})
    x, w = np.polynomial.legendre.leggauss(order)
    nodes = []
    weights = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        n_panels = max(1, int(math.ceil((hi - lo) / basis.r0)))
        sub = np.linspace(lo, hi, n_panels + 1)
        for a, b in zip(sub[:-1], sub[1:]):
            half = 0.5 * (b - a)
            nodes.append(half * x + 0.5 * (a + b))
            weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def potential_matrix(basis: OscillatorBasis, potential: RadialPotential,
                     n_max: int, tol: float | None = None) -> np.ndarray:
    """V_{nn'} = int R_nl V R_n'l r^2 dr for n, n' = 0..n_max (MeV).

    The panelled Gauss-Legendre order is doubled until the matrix changes
    by less than the tolerance (1e-10 MeV unless the potential declares a
    looser quad_tol) in max-norm.
    """
    goal = tol if tol is not None else (potential.quad_tol or _QUAD_TOL)
    prev = None
    change = math.inf
    for order in (24, 48, 96, 192):
        nodes, weights = _panel_nodes(basis, n_max, order, potential.breakpoints)
        rmat = radial_function_matrix(basis, n_max, nodes)
        wv = weights * potential(nodes) * nodes ** 2
        vmat = (rmat * wv) @ rmat.T
        if prev is not None:
            change = float(np.max(np.abs(vmat - prev)))
            if change < goal:
                return 0.5 * (vmat + vmat.T)
        prev = vmat
    raise QuadratureError(
        f"potential matrix quadrature did not reach {goal} MeV at order 192; "
        f"last change {change:.3e} MeV")


def potential_matrix_element(basis: OscillatorBasis, potential: RadialPotential,
                             n: int, n_prime: int,
                             tol: float | None = None) -> float:
    """Single matrix element V_{nn'} by the same panelled quadrature."""
    goal = tol if tol is not None else (potential.quad_tol or _QUAD_TOL)
    top = max(n, n_prime)
    prev = None
    change = math.inf
    for order in (24, 48, 96, 192):
        nodes, weights = _panel_nodes(basis, top, order, potential.breakpoints)
        rmat = radial_function_matrix(basis, top, nodes)
        val = float(np.sum(rmat[n] * rmat[n_prime] * weights
                           * potential(nodes) * nodes ** 2))
        if prev is not None:
            change = abs(val - prev)
            if change < goal:
                return val
        prev = val
    raise QuadratureError(
        f"element ({n},{n_prime}) quadrature did not reach {goal} MeV; "
        f"last estimate {val}, last change {change:.3e} MeV")


def potential_matrix_cross(basis_row: OscillatorBasis, basis_col: OscillatorBasis,
                           potential: RadialPotential, n_row: int, n_col: int,
                           tol: float | None = None) -> np.ndarray:
    """Coupling block <n l_row | V | n' l_col> between two oscillator bases.

    Bases may differ in l, hbar_omega and reduced mass; the quadrature
    domain covers the larger of the two classical turning points.
    """
    goal = tol if tol is not None else (potential.quad_tol or _QUAD_TOL)
    prev = None
    change = math.inf
    wide = basis_row if (classical_turning_point(basis_row, n_row) + 8 * basis_row.r0
                         > classical_turning_point(basis_col, n_col) + 8 * basis_col.r0) \
        else basis_col
    n_wide = n_row if wide is basis_row else n_col
    for order in (24, 48, 96, 192):
        nodes, weights = _panel_nodes(wide, n_wide, order, potential.breakpoints)
        rmat_r = radial_function_matrix(basis_row, n_row, nodes)
        rmat_c = radial_function_matrix(basis_col, n_col, nodes)
        wv = weights * potential(nodes) * nodes ** 2
        vmat = (rmat_r * wv) @ rmat_c.T
        if prev is not None:
            change = float(np.max(np.abs(vmat - prev)))
            if change < goal:
                return vmat
        prev = vmat
    raise QuadratureError(
        f"cross potential block quadrature did not reach {goal} MeV; "
        f"last change {change:.3e} MeV")


def lanczos_smooth(v_matrix: np.ndarray) -> np.ndarray:
    """Apply Lanczos sigma factors: V_{nn'} <- sigma_n sigma_n' V_{nn'}.

    sigma_n = sin(pi (n+1)/(N+2)) / (pi (n+1)/(N+2)) for an (N+1)x(N+1)
    matrix; damps the edge rows that dominate truncation artifacts.
    """
    v_matrix = np.asarray(v_matrix, dtype=float)
    size = v_matrix.shape[0]
    if v_matrix.shape != (size, size):
        raise ValueError("lanczos_smooth expects a square matrix")
    arg = np.pi * (np.arange(size) + 1.0) / (size + 1.0)
    sigma = np.sin(arg) / arg
    return v_matrix * np.outer(sigma, sigma)


@dataclass(frozen=True)
class TruncatedHamiltonian:
    """Eigendecomposition of the truncated Hamiltonian on n = 0..N.

    eigenvalues are ascending; eigenvectors[n, lam] = gamma_{lambda n};
    t_edge = T_{N,N+1} couples the interaction region to the asymptotic
    recurrence.  threshold is an additive channel offset (zero for the
    single-channel problem).
    """

    basis: OscillatorBasis
    n_trunc: int
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    t_edge: float = 0.0
    threshold: float = 0.0

    def g_element(self, n: int, energy: float) -> float:
        """G_{nN}(E); raises GMatrixPoleError within 1e-9 MeV of a pole."""
        return float(self.g_row(energy)[n])

    def g_row(self, energy: float) -> np.ndarray:
        """G_{nN}(E) for all n = 0..N at once."""
        denom = self.eigenvalues - energy
        lam = int(np.argmin(np.abs(denom)))
        if abs(denom[lam]) < _POLE_GUARD:
            raise GMatrixPoleError(energy, lam, float(self.eigenvalues[lam]))
        weights = self.eigenvectors[self.n_trunc, :] / denom
        return -(self.eigenvectors @ weights) * self.t_edge

    def g_nn(self, energy: float) -> float:
        """Corner element G_{NN}(E) used by the phase-shift formula."""
        return float(self.g_row(energy)[self.n_trunc])


def diagonalize(basis: OscillatorBasis, potential: RadialPotential | None,
                n_trunc: int, smoothing: bool = False,
                threshold: float = 0.0) -> TruncatedHamiltonian:
    """Assemble and diagonalize H = T + V~ on indices 0..N.

    Parameters
    ----------
    potential : RadialPotential or None
        None means free motion (V = 0).
    smoothing : bool
        Apply Lanczos sigma smoothing to the truncated potential block.
    threshold : float
        Channel threshold added to the diagonal (MeV).
    """
    if n_trunc < 0:
        raise ValueError(f"truncation boundary must be >= 0, got {n_trunc}")
    h = kinetic_matrix(basis, n_trunc)
    if potential is not None:
        v = potential_matrix(basis, potential, n_trunc)
        if smoothing:
            v = lanczos_smooth(v)
        h = h + v
    if threshold != 0.0:
        h = h + threshold * np.eye(n_trunc + 1)
    eigvals, eigvecs = np.linalg.eigh(h)
    return TruncatedHamiltonian(
        basis=basis, n_trunc=n_trunc, eigenvalues=eigvals,
        eigenvectors=eigvecs, t_edge=kinetic_off_diagonal(basis, n_trunc),
        threshold=threshold)
