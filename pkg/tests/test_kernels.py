import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import EXTRA_NONCE, INNER_SUITE, NONCE_SUITE, R, random_contractive
from ncrat import kernels as kn
from ncrat import realize as rz
from ncrat import sarason as sr
from ncrat._linalg import stein_residual
from ncrat.errors import NotContractive
from ncrat.freecore import words


def const_point(d):
    """The constant function 1 as a kernel vector."""
    return kn.KernelPoint(np.zeros((d, 1, 1), dtype=complex), np.ones(1, dtype=complex), np.ones(1, dtype=complex))


def test_stein_examples():
    P = np.array([[2.0, 1j], [-1j, 3.0]])
    Z0 = np.zeros((2, 2, 2))
    assert np.allclose(kn.stein(Z0, Z0, P), P)
    Q = kn.stein(np.array([[[0.5]]]), np.array([[[0.5]]]), np.array([[1.0]]))
    assert Q[0, 0] == pytest.approx(4 / 3)
    rng = np.random.default_rng(0)
    Z = rz.random_point(rng, 3, 4, 0.9)
    Q = kn.stein(Z, Z, np.eye(4))
    assert np.linalg.eigvalsh(Q)[0] >= 1 - 1e-12
    assert stein_residual(Z, Z, np.eye(4), Q) <= 1e-12 * np.linalg.norm(Q)


def test_stein_is_szego_sum():
    rng = np.random.default_rng(1)
    Z = rz.random_point(rng, 2, 2, 0.3)
    W = rz.random_point(rng, 2, 2, 0.3)
    P = rng.standard_normal((2, 2))
    Q = kn.stein(Z, W, P)
    brute = sum(rz.word_matrix(Z, w) @ P @ rz.word_matrix(W, w).conj().T for w in words(2, 14))
    assert np.allclose(Q, brute, atol=1e-12)


def test_stein_rejects_noncontractive():
    with pytest.raises(NotContractive):
        kn.stein(np.array([[[1.2]]]), np.array([[[1.2]]]), np.eye(1))


@settings(max_examples=10)
@given(st.integers(0, 10_000))
def test_kernel_point_coefficients_and_pairing(seed):
    rng = np.random.default_rng(seed)
    d, m = 2, 2
    Z = rz.random_point(rng, d, m, 0.2)
    W = rz.random_point(rng, d, m, 0.2)
    p = kn.KernelPoint(Z, rng.standard_normal(m) + 0j, rng.standard_normal(m) + 1j)
    q = kn.KernelPoint(W, rng.standard_normal(m) + 0j, rng.standard_normal(m) - 1j)
    pc = np.array([p.coeff(w) for w in words(d, 11)])
    qc = np.array([q.coeff(w) for w in words(d, 11)])
    assert abs(kn.h2_pairing(p, q) - np.vdot(pc, qc)) < 1e-10
    s = p.backward_shift(2)
    for w in words(d, 3):
        assert abs(s.coeff(w) - p.coeff((2,) + w)) < 1e-12
    t = p.backward_word((1, 2))
    for w in words(d, 2):
        assert abs(t.coeff(w) - p.coeff((1, 2) + w)) < 1e-12


@pytest.mark.parametrize(
    "text,d,expected",
    [("z1", 1, [0, 1, 0, 0]), ("0.5+0.5*z1", 1, [0.5, 0.5, 0, 0]), ("0.7-0.1i", 2, [0.7 - 0.1j] + [0] * 6)],
)
def test_kernel_rep_examples(text, d, expected):
    p = kn.kernel_rep(R(text, d)).point
    got = [p.coeff(w) for w in words(d, 3 if d == 1 else 2)]
    assert np.allclose(got, expected, atol=1e-12)


def test_kernel_rep_reproduces_transpose_coefficients():
    b = R("(0.2+0.3i)*z1*(1-0.4*z2+0.2i*z1)^-1 + 0.1 - 0.25*z2*z1", 2)
    rep = kn.kernel_rep(b)
    assert rep.margin > 0
    bt = rz.transpose_fm(b)
    for w in words(2, 5):
        assert abs(rep.point.coeff(w) - bt.coeff(w)) < 1e-9
    # pairing with Szego kernels at random points reproduces point values
    rng = np.random.default_rng(7)
    for _ in range(5):
        Zw = rz.random_point(rng, 2, 2, 0.6)
        x, u = rng.standard_normal(2) + 0j, rng.standard_normal(2) + 0j
        k = kn.KernelPoint(Zw, x, u)
        # <K{W,x,u}, f> = x^* f(W) u for f in the Fock space
        assert abs(kn.h2_pairing(k, rep.point) - x.conj() @ kn.eval_transpose(b, Zw) @ u) < 1e-9


def test_model_norm_of_constant():
    b = R("0.5+0.5*z1", 1)
    a = sr.sarason(b)
    one = const_point(1)
    assert kn.smirnov_pairing(b, a, one, one).real == pytest.approx(2.0, abs=1e-12)
    # the kernel pairing is the value of K^b at 0, not the model norm of 1
    assert kn.dbr_kernel_pairing(b, one, one).real == pytest.approx(0.75, abs=1e-12)
    assert kn.smirnov_pairing(R("z1", 1), None, one, one).real == pytest.approx(1.0)
    zero = R("0", 1)
    p = kn.KernelPoint(np.array([[[0.3]]]), np.ones(1) + 0j, np.ones(1) + 0j)
    assert kn.dbr_kernel_pairing(zero, p, p) == pytest.approx(kn.h2_pairing(p, p))


def test_dbr_kernel_gram_is_psd():
    b = R("0.3+0.4*z1*z2-0.2*z2", 2)
    rng = np.random.default_rng(3)
    pts = [kn.KernelPoint(rz.random_point(rng, 2, 2, 0.7), rng.standard_normal(2) + 0j, rng.standard_normal(2) + 0j) for _ in range(6)]
    G = np.array([[kn.dbr_kernel_pairing(b, p, q) for q in pts] for p in pts])
    assert np.allclose(G, G.conj().T, atol=1e-12)
    assert np.linalg.eigvalsh(G)[0] > -1e-10


@pytest.mark.parametrize(
    "text,d,dim,bb,a0sq",
    [("0.5+0.5*z1", 1, 1, 0.5, 0.25), ("0.5*z1+0.5*z2", 2, 1, 0.5, 0.5), ("z1", 1, 1, 1.0, 0.0), ("z1*(2+z1)^-1", 1, 1, 0.5, 0.5)],
)
def test_gram_space_examples(text, d, dim, bb, a0sq):
    gs = kn.build_gram_space(R(text, d))
    assert gs.dim == dim
    assert gs.basis[0] == (1,)
    assert gs.bb_norm_sq == pytest.approx(bb, abs=1e-12)
    assert gs.a0_squared == pytest.approx(a0sq, abs=1e-12)
    # a(0)^2 = 1 - |b(0)|^2 - ||bb||_b^2
    assert gs.a0_squared == pytest.approx(1 - abs(gs.b.D) ** 2 - gs.bb_norm_sq, abs=1e-12)
    assert np.linalg.eigvalsh(gs.G)[0] > 0
    assert gs.to_json()["dim"] == dim


@pytest.mark.parametrize("text,d", NONCE_SUITE + EXTRA_NONCE)
def test_gram_identities_against_smirnov_pairing(text, d):
    b = rz.minimize(R(text, d))
    gs = kn.build_gram_space(b)
    assert gs.dim <= b.n
    chk = kn.gram_checks(gs, sr.sarason(b))
    assert chk.gram_residual <= 1e-8
    assert chk.adjoint_residual <= 1e-8
    assert chk.bt_norm_residual <= 1e-8
    assert kn.rank2_defect_residual(gs) <= 1e-8
    assert gs.riccati.residual <= 1e-10


def test_adjoint_check_detects_missing_correction():
    b = rz.minimize(R("0.3+0.4*z1*z2-0.2*z2", 2))
    gs = kn.build_gram_space(b)
    a = sr.sarason(b)
    sk = kn.state_kernels(b)
    g, h = sk.point(gs.V[:, 0]), sk.point(gs.V[:, 1])
    # <X_j h, g>_G against <h, L_j g>_b alone: the rank-one correction is not negligible
    lhs = np.conj((gs.G @ gs.Xmat[1])[0, 1])
    assert abs(lhs - kn.smirnov_shift_pairing(b, a, h, g, 2)) > 1e-3


@pytest.mark.parametrize("text,d", INNER_SUITE)
def test_inner_symbols_have_vanishing_defect(text, d):
    gs = kn.build_gram_space(R(text, d))
    assert gs.a0_squared <= 1e-10
    assert not gs.bt_coords.any()


def test_weak_purity_profile_decays():
    gs = kn.build_gram_space(R("0.3+0.4*z1*z2-0.2*z2", 2))
    prof = kn.weak_purity_profile(gs, 30)
    assert prof[-1] < 1e-6 * max(prof[0], 1e-300)


@given(st.integers(0, 10_000))
def test_riccati_is_minimal_and_below_fock_gramian(seed):
    rng = np.random.default_rng(seed)
    b = rz.minimize(random_contractive(rng, 1 + seed % 2, 2, 0.8))
    ric = kn.solve_riccati(b)
    assert ric.residual < 1e-10
    # the model metric dominates the Fock metric on the model space
    assert np.linalg.eigvalsh(ric.P - ric.W)[0] > -1e-10
    assert 0 < ric.gamma <= ric.gamma_h2 + 1e-12
