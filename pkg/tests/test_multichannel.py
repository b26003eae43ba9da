import math

import numpy as np
import pytest

from jmatrix.basis import OscillatorBasis
from jmatrix.hamiltonian import diagonalize
from jmatrix.multichannel import (Channel, ClosedChannelError, CoupledProblem,
                                  channel_momenta, coupled_hamiltonian,
                                  interior_coefficients,
                                  multichannel_coulomb_s,
                                  multichannel_discrete_p,
                                  multichannel_natural_radii,
                                  multichannel_p_matrix,
                                  multichannel_renormalize, s_matrix,
                                  _coulomb_exterior, _free_hankel_exterior)
from jmatrix.oracle import (NumerovGrid, coupled_eigenphases,
                            extract_coupled_smatrix, integrate_coupled)
from jmatrix.pmatrix import (natural_channel_radius, p_matrix_discrete_simple,
                             p_matrix_general)
from jmatrix.potentials import square_well
from jmatrix.single_channel import coefficients, phase_shift

from conftest import MU_A15, wrap_pi


V11 = square_well(-20.0, 3.0)
V22 = square_well(-15.0, 3.0)
V12 = square_well(-5.0, 3.0)


def two_channel(n_trunc=10, z1z2=0.0, thresholds=(0.0, 2.0), ls=(0, 0),
                hbar_omegas=(18.0, 18.0)):
    chs = tuple(Channel(l=l, mu=MU_A15, threshold=t, z1z2=z1z2,
                        n_trunc=n_trunc, hbar_omega=hw)
                for l, t, hw in zip(ls, thresholds, hbar_omegas))
    return CoupledProblem(channels=chs, potentials=((V11, V12), (V12, V22)))


def test_closed_channel_rejected():
    prob = two_channel()
    with pytest.raises(ClosedChannelError):
        channel_momenta(prob, 1.0)  # below the 2 MeV threshold


def test_zero_coupling_reduces_to_single_channel():
    prob = CoupledProblem(channels=two_channel().channels,
                          potentials=((V11, None), (None, V22)))
    h = coupled_hamiltonian(prob)
    g = h.g_matrix(10.0)
    assert abs(g[0, 1]) < 1e-12 and abs(g[1, 0]) < 1e-12
    basis = OscillatorBasis(18.0, MU_A15, 0)
    h1 = diagonalize(basis, V11, 10)
    h2 = diagonalize(basis, V22, 10, threshold=2.0)
    assert g[0, 0] == pytest.approx(h1.g_nn(10.0), rel=1e-12)
    assert g[1, 1] == pytest.approx(h2.g_nn(10.0), rel=1e-12)


def test_exchange_symmetric_channels():
    # identical diagonal blocks and symmetric coupling: the G matrix is
    # invariant under swapping the two channels
    chs = tuple(Channel(l=0, mu=MU_A15, threshold=0.0, n_trunc=8)
                for _ in range(2))
    prob = CoupledProblem(channels=chs, potentials=((V11, V12), (V12, V11)))
    h = coupled_hamiltonian(prob)
    g = h.g_matrix(9.0)
    assert g[0, 1] == pytest.approx(g[1, 0], abs=1e-10)
    assert g[0, 0] == pytest.approx(g[1, 1], abs=1e-10)


def test_g_matrix_residue_is_rank_one():
    # the residue matrix gamma_N^G gamma_N^G' T^G' is exactly rank one; the
    # O(eps) background of the other poles cancels in the two-sided average
    prob = two_channel()
    h = coupled_hamiltonian(prob)
    eigs = h.eigenvalues
    lam = int(np.argmin(np.abs(eigs - 10.0)))
    e_lam = eigs[lam]
    eps = 1e-4
    res = 0.5 * (eps * h.g_matrix(e_lam + eps) - eps * h.g_matrix(e_lam - eps))
    assert abs(np.linalg.det(res)) < 1e-8 * np.linalg.norm(res) ** 2


@pytest.mark.parametrize("energy", [5.0, 10.0, 20.0])
def test_s_matrix_unitary_symmetric_and_dual_form(energy):
    h = coupled_hamiltonian(two_channel())
    s = s_matrix(h, energy)
    assert s.unitarity_defect() < 1e-8
    assert s.symmetry_defect() < 1e-8
    assert s.cross_check_defect < 1e-9
    assert not s.ill_conditioned


def test_single_channel_collapse():
    ch = Channel(l=0, mu=MU_A15, threshold=0.0, n_trunc=10)
    prob = CoupledProblem(channels=(ch,), potentials=((V11,),))
    h = coupled_hamiltonian(prob)
    s = s_matrix(h, 10.0)
    basis = OscillatorBasis(18.0, MU_A15, 0)
    delta = phase_shift(diagonalize(basis, V11, 10), 10.0)
    assert s.matrix[0, 0] == pytest.approx(np.exp(2j * delta), abs=1e-10)


def _pair_mod_pi(ref, got):
    """Best bijective pairing of two eigenphase pairs, distances mod pi."""
    d_straight = max(abs(wrap_pi(ref[0] - got[0])), abs(wrap_pi(ref[1] - got[1])))
    d_crossed = max(abs(wrap_pi(ref[0] - got[1])), abs(wrap_pi(ref[1] - got[0])))
    return min(d_straight, d_crossed)


def test_eigenphases_vs_coupled_numerov():
    # limited by the (slow, square-well) truncation convergence: a few
    # 1e-2 rad at N = 10, improving at N = 40.  Eigenphases are defined
    # modulo pi, so the comparison pairs them mod pi.
    grid = NumerovGrid(r_min=0.001, r_max=25.0, h=0.001, r_match=20.0)
    chans = [(0, MU_A15, 0.0), (0, MU_A15, 2.0)]
    pots = [[V11, V12], [V12, V22]]
    for n_trunc, tol in ((10, 0.06), (40, 0.02)):
        h = coupled_hamiltonian(two_channel(n_trunc=n_trunc))
        for energy in (5.0, 10.0, 20.0):
            u = integrate_coupled(pots, chans, energy, grid)
            ref = coupled_eigenphases(extract_coupled_smatrix(
                u, chans, energy, grid))
            got = s_matrix(h, energy).eigenphases()
            assert _pair_mod_pi(ref, got) < tol


def test_interior_coefficients_match_at_truncation():
    prob = two_channel()
    h = coupled_hamiltonian(prob)
    energy = 10.0
    s = s_matrix(h, energy)
    coeffs = interior_coefficients(h, energy, s.matrix)
    from jmatrix.basis import asymptotic_solutions

    ks = channel_momenta(prob, energy)
    for i, ch in enumerate(prob.channels):
        sols = asymptotic_solutions(ch.basis, ch.n_trunc, ks[i])
        n = ch.n_trunc
        cp = sols.C[n] + 1j * sols.S[n]
        cm = sols.C[n] - 1j * sols.S[n]
        expected = -s.matrix[i, :] * cp
        expected[i] += cm
        got = coeffs[i][n, :]
        assert np.max(np.abs(got - expected)) < 1e-9 * np.max(np.abs(expected))


def test_interior_coefficients_decoupled_limit():
    prob = CoupledProblem(channels=two_channel().channels,
                          potentials=((V11, None), (None, V22)))
    h = coupled_hamiltonian(prob)
    energy = 10.0
    s = s_matrix(h, energy)
    coeffs = interior_coefficients(h, energy, s.matrix, n_asym=30)
    # cross-channel components vanish
    assert np.max(np.abs(coeffs[0][:, 1])) < 1e-10
    assert np.max(np.abs(coeffs[1][:, 0])) < 1e-10
    # entrance channel equals the single-channel coefficients up to the
    # -2i e^{i delta} convention factor between the real and the
    # C^- - S C^+ normalizations
    basis = OscillatorBasis(18.0, MU_A15, 0)
    h1 = diagonalize(basis, V11, 10)
    sol = coefficients(h1, energy, n_asym=30)
    factor = -2j * np.exp(1j * sol.delta)
    assert np.max(np.abs(coeffs[0][:, 0] - factor * sol.a)) \
        < 1e-8 * np.max(np.abs(sol.a))


def test_column_flux_conservation():
    h = coupled_hamiltonian(two_channel())
    s = s_matrix(h, 12.0)
    sums = np.sum(np.abs(s.matrix) ** 2, axis=0)
    assert np.max(np.abs(sums - 1.0)) < 1e-8


def test_p_matrix_generalized_symmetry():
    prob = two_channel()
    h = coupled_hamiltonian(prob)
    radii = [6.0, 7.5]
    pm = multichannel_p_matrix(h, 10.0, radii)
    assert pm.generalized_symmetry_defect(prob, radii) < 1e-8
    # P itself is symmetric when mu/b is channel-independent
    pm_eq = multichannel_p_matrix(h, 10.0, [7.0, 7.0])
    assert np.linalg.norm(pm_eq.P - pm_eq.P.T) / np.linalg.norm(pm_eq.P) < 1e-8
    assert np.linalg.norm(pm.P @ pm.R - np.eye(2)) < 1e-10


def test_p_matrix_single_channel_collapse():
    ch = Channel(l=0, mu=MU_A15, threshold=0.0, n_trunc=10)
    prob = CoupledProblem(channels=(ch,), potentials=((V11,),))
    h = coupled_hamiltonian(prob)
    basis = OscillatorBasis(18.0, MU_A15, 0)
    h1 = diagonalize(basis, V11, 10)
    for energy, b in ((6.0, 7.0), (14.0, 9.0)):
        pm = multichannel_p_matrix(h, energy, [b])
        ref = p_matrix_general(h1, energy, b)
        assert pm.P[0, 0] == pytest.approx(ref.P, rel=1e-10)


def test_natural_radii_per_channel():
    prob = two_channel(ls=(0, 2))
    b0 = multichannel_natural_radii(prob)
    for i, ch in enumerate(prob.channels):
        assert b0[i] == natural_channel_radius(ch.basis, ch.n_trunc)
    prob_eq = two_channel()
    b0_eq = multichannel_natural_radii(prob_eq)
    assert b0_eq[0] == b0_eq[1]


def test_discrete_p_collapse_and_similarity():
    ch = Channel(l=0, mu=MU_A15, threshold=0.0, n_trunc=10)
    prob1 = CoupledProblem(channels=(ch,), potentials=((V11,),))
    h1 = coupled_hamiltonian(prob1)
    basis = OscillatorBasis(18.0, MU_A15, 0)
    hs = diagonalize(basis, V11, 10)
    pd = multichannel_discrete_p(h1, 9.0)
    assert pd[0, 0] == pytest.approx(p_matrix_discrete_simple(hs, 9.0), rel=1e-12)
    # equal channels: similarity factors cancel exactly
    h2 = coupled_hamiltonian(two_channel())
    full = multichannel_discrete_p(h2, 9.0)
    simple = multichannel_discrete_p(h2, 9.0, simplified=True)
    assert np.array_equal(full, simple)


def test_discrete_p_tracks_exact_at_natural_radii():
    prob = two_channel(n_trunc=9)
    h = coupled_hamiltonian(prob)
    b0 = multichannel_natural_radii(prob)
    # pole positions: the discrete analogue's poles are the eigenvalues;
    # the exact [P](b0) poles sit within the b0-drift tolerance of them
    eigs = [e for e in h.eigenvalues if 0.0 < e < 25.0]
    es = np.linspace(0.5, 25.0, 2500)
    dets = []
    for e in es:
        try:
            pm = multichannel_p_matrix(h, e, b0)
            dets.append(1.0 / np.linalg.det(pm.P))
        except Exception:
            dets.append(0.0)
    poles = [0.5 * (a + b) for a, b, fa, fb in
             zip(es[:-1], es[1:], dets[:-1], dets[1:]) if fa * fb < 0.0]
    for e_lam in eigs:
        assert min(abs(p - e_lam) for p in poles) < 0.25


def test_coulomb_dual_routes_agree():
    prob = two_channel(z1z2=7.0)
    radii = [6.5, 6.5]
    for energy in (6.0, 12.0, 25.0):
        s_a, _ = multichannel_coulomb_s(prob, energy, radii, route="s-aux")
        s_b, _ = multichannel_coulomb_s(prob, energy, radii, route="p-aux")
        assert np.linalg.norm(s_a.matrix - s_b.matrix) < 1e-8
        assert s_a.unitarity_defect() < 1e-7
        assert s_a.symmetry_defect() < 1e-7


def test_coulomb_zero_charge_identity():
    prob = two_channel(z1z2=0.0)
    radii = [6.5, 6.5]
    s, s_aux = multichannel_coulomb_s(prob, 10.0, radii)
    assert np.linalg.norm(s.matrix - s_aux.matrix) < 1e-9
    nmat = multichannel_renormalize(prob, 10.0, radii, s.matrix, s_aux.matrix)
    assert np.linalg.norm(nmat - np.eye(2)) < 1e-9


def test_renormalization_matrix_not_diagonal_when_charged():
    prob = two_channel(z1z2=7.0)
    radii = [6.5, 6.5]
    s, s_aux = multichannel_coulomb_s(prob, 6.0, radii)
    nmat = multichannel_renormalize(prob, 6.0, radii, s.matrix, s_aux.matrix)
    assert max(abs(nmat[0, 1]), abs(nmat[1, 0])) > 1e-4


def test_renormalized_interior_continuous_at_cut():
    prob = two_channel(z1z2=7.0)
    radii = [6.5, 6.5]
    energy = 12.0
    s, s_aux = multichannel_coulomb_s(prob, energy, radii)
    nmat = multichannel_renormalize(prob, energy, radii, s.matrix, s_aux.matrix)
    gp, gm, _, _ = _coulomb_exterior(prob, energy, radii)
    hp, hm, _, _ = _free_hankel_exterior(prob, energy, radii)
    u_aux = np.diag(hm) - hp[:, None] * s_aux.matrix
    u_coul = np.diag(gm) - gp[:, None] * s.matrix
    assert np.linalg.norm(nmat @ u_aux - u_coul) / np.linalg.norm(u_coul) < 1e-6


def test_channel_relabeling_covariance():
    prob = two_channel()
    h = coupled_hamiltonian(prob)
    s = s_matrix(h, 10.0).matrix
    swapped = CoupledProblem(
        channels=(prob.channels[1], prob.channels[0]),
        potentials=((V22, V12), (V12, V11)))
    h_sw = coupled_hamiltonian(swapped)
    s_sw = s_matrix(h_sw, 10.0).matrix
    perm = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert np.linalg.norm(perm @ s @ perm - s_sw) < 1e-9


def test_per_channel_hbar_omega_supported():
    prob = two_channel(hbar_omegas=(18.0, 22.0))
    h = coupled_hamiltonian(prob)
    s = s_matrix(h, 10.0)
    assert s.unitarity_defect() < 1e-8
    assert s.symmetry_defect() < 1e-8
