"""Single-channel short-range scattering in the oscillator representation.

The phase shift comes from the corner element of the spectral G matrix,

    tan(delta_l) = - [S_N - G_NN S_{N+1}] / [C_N - G_NN C_{N+1}],

the interior coefficients from a_n = G_{nN} a^as_{N+1}, the asymptotic ones
from a_n = cos(delta) S_n + sin(delta) C_n, and the coordinate-space wave is
reconstructed as u~(r) = r * sum_n a_n R_nl(r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import asymptotic_solutions, radial_function_matrix
from .constants import HBAR_C
from .hamiltonian import TruncatedHamiltonian


class DegeneratePhaseError(RuntimeError):
    """Both projections of the matching condition vanished."""


def _phase_parts(h: TruncatedHamiltonian, energy: float):
    """(num, den, sols, g_nn) with tan(delta) = num/den."""
    rel = energy - h.threshold
    if rel <= 0.0:
        raise ValueError(f"need E above threshold {h.threshold} MeV, got {energy}")
    k = math.sqrt(2.0 * h.basis.mu * rel) / HBAR_C
    sols = asymptotic_solutions(h.basis, h.n_trunc + 1, k)
    g_nn = h.g_nn(energy)
    n = h.n_trunc
    num = -(sols.S[n] - g_nn * sols.S[n + 1])
    den = sols.C[n] - g_nn * sols.C[n + 1]
    return num, den, sols, g_nn, k


def phase_shift(h: TruncatedHamiltonian, energy: float) -> float:
    """Phase shift delta_l (radians) folded into the (-pi/2, pi/2] branch."""
    num, den, _, _, _ = _phase_parts(h, energy)
    scale = math.hypot(num, den)
    if scale < 1e-14:
        raise DegeneratePhaseError(
            f"numerator and denominator both vanish at E = {energy} MeV")
    delta = math.atan2(num, den)
    if delta <= -math.pi / 2:
        delta += math.pi
    elif delta > math.pi / 2:
        delta -= math.pi
    return delta


def continuous_phase(deltas) -> np.ndarray:
    """Unwrap a branch-folded phase sweep into a continuous curve (mod pi)."""
    deltas = np.asarray(deltas, dtype=float)
    out = deltas.copy()
    shift = 0.0
    for i in range(1, out.size):
        step = out[i] + shift - out[i - 1]
        while step > math.pi / 2:
            shift -= math.pi
            step -= math.pi
        while step < -math.pi / 2:
            shift += math.pi
            step += math.pi
        out[i] += shift
    return out


@dataclass(frozen=True)
class ScatteringSolution:
    """Scattering state at one energy in the oscillator representation.

    a[n] holds the expansion coefficients for n = 0..n_asym: interior values
    G_{nN} a^as_{N+1} up to N, the asymptotic combination beyond.
    """

    energy: float
    k: float
    delta: float
    a: np.ndarray = field(repr=False)
    n_trunc: int
    hamiltonian: TruncatedHamiltonian = field(repr=False)

    @property
    def n_asym(self) -> int:
        return self.a.size - 1


def coefficients(h: TruncatedHamiltonian, energy: float,
                 n_asym: int | None = None) -> ScatteringSolution:
    """Oscillator-representation coefficients a_n for n = 0..n_asym."""
    n = h.n_trunc
    if n_asym is None:
        n_asym = max(2 * n, 50)
    if n_asym < n + 1:
        raise ValueError(f"n_asym must be at least N+1 = {n + 1}, got {n_asym}")
    num, den, _, _, k = _phase_parts(h, energy)
    delta = math.atan2(num, den)
    if delta <= -math.pi / 2:
        delta += math.pi
    elif delta > math.pi / 2:
        delta -= math.pi
    sols = asymptotic_solutions(h.basis, n_asym, k)
    a = math.cos(delta) * sols.S + math.sin(delta) * sols.C
    a_edge = a[n + 1]
    a[:n + 1] = h.g_row(energy) * a_edge
    return ScatteringSolution(energy=energy, k=k, delta=delta, a=a,
                              n_trunc=n, hamiltonian=h)


def matching_defect(sol: ScatteringSolution) -> float:
    """Relative mismatch at n = N between the interior and asymptotic forms."""
    h = sol.hamiltonian
    sols = asymptotic_solutions(h.basis, sol.n_trunc + 1, sol.k)
    asymp = (math.cos(sol.delta) * sols.S[sol.n_trunc]
             + math.sin(sol.delta) * sols.C[sol.n_trunc])
    scale = max(abs(asymp), abs(sol.a[sol.n_trunc]), 1e-300)
    return abs(sol.a[sol.n_trunc] - asymp) / scale


def reconstruct_wavefunction(sol: ScatteringSolution, r_grid,
                             m_max: int | None = None) -> np.ndarray:
    """u~(k,r) = r sum_{n<=M} a_n R_nl(r) on the grid."""
    m = sol.n_asym if m_max is None else m_max
    if m > sol.n_asym:
        raise ValueError(f"M = {m} exceeds stored coefficients n_asym = {sol.n_asym}")
    r_grid = np.asarray(r_grid, dtype=float)
    rmat = radial_function_matrix(sol.hamiltonian.basis, m, r_grid)
    return r_grid * (sol.a[:m + 1] @ rmat)
