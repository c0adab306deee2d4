import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import R, random_realization, series_by_words
from ncrat import realize as rz
from ncrat.errors import Indeterminate, NotPure, SingularAtZero, SingularPencil
from ncrat._linalg import cp_radius
from ncrat.freecore import FreeSeries, reverse, series_mul, unit, words

seeds = st.integers(0, 2**32 - 1)


def hankel_rank(r, K):
    """Rank of [r_{u v}] over |u| <= K, 1 <= |v| <= K; equals the minimal FM size."""
    us = words(r.d, K)
    vs = [v for v in words(r.d, K) if v]
    H = np.array([[r.coeff(u + v) for v in vs] for u in us])
    s = np.linalg.svd(H, compute_uv=False)
    return int(np.sum(s > 1e-9 * max(1.0, s[0] if s.size else 0.0)))


def pad(r, rng, extra=2):
    """Same function, bigger state: direct sum with an unreachable block, then a similarity."""
    d, n = r.d, r.n
    m = n + extra
    A = np.zeros((d, m, m), dtype=complex)
    A[:, :n, :n] = r.A
    A[:, n:, n:] = 0.3 * rng.standard_normal((d, extra, extra))
    A[:, :n, n:] = 0.3 * rng.standard_normal((d, n, extra))
    B = np.zeros((d, m), dtype=complex)
    B[:, :n] = r.B
    C = np.concatenate([r.C, rng.standard_normal(extra)])
    S = np.eye(m) + 0.3 * rng.standard_normal((m, m))
    return rz.FMRealization(A, B, C, r.D).similar(S)


@given(seeds)
def test_eval_matches_truncated_series(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 2
    r = random_realization(rng, d, 2, radius=0.5)
    Z = rz.random_point(rng, d, 2, radius=0.05)
    approx = series_by_words(Z, r.coeffs(8))
    assert np.allclose(r.eval(Z), approx, atol=1e-9)


@given(seeds)
def test_arithmetic_matches_series_arithmetic(seed):
    rng = np.random.default_rng(seed)
    d, N = 2, 4
    r = random_realization(rng, d, 2)
    s = random_realization(rng, d, 1)
    fr, fs = r.coeffs(N), s.coeffs(N)
    assert rz.add(r, s).coeffs(N).max_abs_diff(fr + fs) < 1e-10
    assert rz.scale(2 - 1j, r).coeffs(N).max_abs_diff(fr.scale(2 - 1j)) < 1e-10
    assert rz.mul(r, s).coeffs(N).max_abs_diff(series_mul(fr, fs, N)) < 1e-10
    inv = rz.invert(r).coeffs(N)
    assert series_mul(fr, inv, N).max_abs_diff(unit(d, N)) < 1e-9


@given(seeds)
def test_minimize_reaches_hankel_rank(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 2
    r = random_realization(rng, d, 2)
    big = pad(r, rng)
    m = rz.minimize(big)
    assert m.n == hankel_rank(big, 5) == 2
    assert m.coeffs(5).max_abs_diff(r.coeffs(5)) < 1e-8


@pytest.mark.parametrize(
    "text,d",
    [("z1*z2", 2), ("z1*z2 + z2*z1", 2), ("(1-z1)^-1*(1-z2)^-1", 2), ("z1*(1-0.5*z1)^-1 - z1", 1), ("3", 2)],
)
def test_parser_realizations_are_minimal(text, d):
    r = R(text, d)
    assert r.n == hankel_rank(r, 4)


def test_cancellation_gives_constant():
    r = R("(1+z1)*(1+z1)^-1", 1)
    assert r.n == 0 and abs(r.D - 1) < 1e-12


def test_descriptor_round_trip_and_transpose():
    rng = np.random.default_rng(1)
    r = random_realization(rng, 2, 3)
    desc = rz.descriptor_from_fm(r)
    assert np.allclose(desc.coeff_vector(4), r.coeff_vector(4))
    back = rz.fm_from_descriptor(desc)
    assert back.coeffs(4).max_abs_diff(r.coeffs(4)) < 1e-10
    small = rz.minimize_descriptor(desc)
    assert small.m <= r.n + 1
    assert np.allclose(small.coeff_vector(4), r.coeff_vector(4))
    t = rz.transpose_fm(r)
    for w in words(2, 4):
        assert abs(t.coeff(w) - r.coeff(reverse(w))) < 1e-10
    Z = rz.random_point(rng, 2, 3, 0.4)
    assert np.allclose(desc.eval(Z), r.eval(Z))


def test_cayley_maps_are_inverse():
    b = R("0.3*z1 + 0.2*z2*z1", 2)
    h = rz.cayley(b)
    # h (1 - b) = 1 + b on coefficients
    N = 4
    lhs = series_mul(h.coeffs(N), (unit(2, N) - b.coeffs(N)), N)
    assert lhs.max_abs_diff(unit(2, N) + b.coeffs(N)) < 1e-12
    assert rz.cayley_inverse(h).coeffs(N).max_abs_diff(b.coeffs(N)) < 1e-12
    with pytest.raises(SingularAtZero):
        rz.cayley(R("1 + z1", 1))
    with pytest.raises(SingularAtZero):
        rz.cayley_inverse(R("-1 + z1", 1))


def test_invert_needs_nonzero_constant():
    with pytest.raises(SingularAtZero):
        rz.invert(R("z1", 1))


def test_singular_pencil():
    r = R("(1-z1)^-1", 1)
    with pytest.raises(SingularPencil):
        r.eval(np.array([[[1.0]]]))


def test_rescale_to_strict_is_a_similarity():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((2, 3, 3))
    A = A * np.sqrt(0.8 / cp_radius(A))
    assert rz.row_norm_sq(A) > 0.8  # not contractive as given
    res = rz.rescale_to_strict(A)
    assert res.margin > 0
    assert rz.row_norm_sq(res.A) < 1
    Si = np.linalg.inv(res.S)
    for j in range(2):
        assert np.allclose(res.A[j], Si @ A[j] @ res.S)
    with pytest.raises(NotPure):
        rz.rescale_to_strict(np.array([[[1.0]]]))


def test_purity_classes():
    assert rz.purity(np.array([[[0.5]]])).is_pure
    assert not rz.purity(np.array([[[1.5]]])).is_pure
    with pytest.raises(Indeterminate):
        rz.purity(np.array([[[1.0]]]))


def test_json_round_trip():
    rng = np.random.default_rng(5)
    r = random_realization(rng, 2, 2)
    back = rz.FMRealization.from_json(r.to_json())
    assert back.coeffs(3).max_abs_diff(r.coeffs(3)) == 0
    c = rz.FMRealization.constant(3, 2 - 1j)
    assert rz.FMRealization.from_json(c.to_json()).D == 2 - 1j
    desc = rz.descriptor_from_fm(r)
    assert np.allclose(rz.DescriptorRealization.from_json(desc.to_json()).coeff_vector(3), desc.coeff_vector(3))


def test_random_point_radius(rng):
    Z = rz.random_point(rng, 3, 4, 0.7)
    assert abs(np.sqrt(rz.row_norm_sq(Z)) - 0.7) < 1e-12


def test_coeffs_of_constant_and_variable():
    v = rz.FMRealization.variable(2, 2)
    assert v.coeffs(2).coeffs == {(2,): 1}
    assert rz.FMRealization.constant(2, 5).coeffs(2).coeffs == {(): 5}
    assert isinstance(v.coeffs(1), FreeSeries)
