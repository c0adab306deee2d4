import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ncrat.freecore import (
    FreeSeries,
    OrderExceeded,
    check_word,
    concat,
    num_words,
    reverse,
    series_mul,
    unit,
    word_index,
    words,
)


@pytest.mark.parametrize("d,N", [(1, 0), (1, 5), (2, 4), (3, 3)])
def test_word_enumeration_matches_product(d, N):
    expected = [w for k in range(N + 1) for w in itertools.product(range(1, d + 1), repeat=k)]
    got = words(d, N)
    assert got == expected
    assert num_words(d, N) == len(expected)
    assert [word_index(w, d) for w in got] == list(range(len(got)))


def test_check_word_rejects_bad_letters():
    with pytest.raises(ValueError):
        check_word((0,), 2)
    with pytest.raises(ValueError):
        check_word((3,), 2)
    assert check_word([1, 2], 2) == (1, 2)


@given(st.lists(st.integers(1, 3), max_size=6), st.lists(st.integers(1, 3), max_size=6))
def test_reverse_is_antihomomorphism(u, v):
    u, v = tuple(u), tuple(v)
    assert reverse(concat(u, v)) == concat(reverse(v), reverse(u))
    assert reverse(reverse(u)) == u


coeff = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@st.composite
def series(draw, d=2, order=3):
    vals = draw(st.lists(coeff, min_size=num_words(d, order), max_size=num_words(d, order)))
    return FreeSeries.from_vector(d, order, np.array(vals, dtype=complex))


@given(series(), series())
def test_series_product_matches_brute_force(f, g):
    N = 3
    h = series_mul(f, g, N)
    for w in words(2, N):
        brute = sum(f[w[:k]] * g[w[k:]] for k in range(len(w) + 1))
        assert abs(h[w] - brute) < 1e-9


@given(series())
def test_json_round_trip(f):
    assert FreeSeries.from_json(f.to_json()).max_abs_diff(f) == 0.0


@given(series())
def test_transpose_and_conj_are_involutions(f):
    assert f.transpose().transpose().max_abs_diff(f) == 0.0
    assert f.conj().conj().max_abs_diff(f) == 0.0
    for w in words(2, 3):
        assert f.transpose()[w] == f[reverse(w)]


def test_order_exceeded_on_unknown_coefficients():
    f = unit(2, 1)
    assert f[()] == 1
    assert f[(2,)] == 0
    with pytest.raises(OrderExceeded):
        f[(1, 1)]
    with pytest.raises(OrderExceeded):
        f.truncate(2)
    with pytest.raises(OrderExceeded):
        series_mul(f, f, 2)


def test_arithmetic_uses_common_order():
    f = FreeSeries(1, 3, {(1, 1, 1): 2.0, (): 1.0})
    g = FreeSeries(1, 1, {(1,): 1.0})
    s = f + g
    assert s.order == 1
    assert s[()] == 1 and s[(1,)] == 1
    assert (f - f).coeffs == {}
    with pytest.raises(ValueError):
        f + unit(2)
