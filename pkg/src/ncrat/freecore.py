"""Words over a finite alphabet and finitely supported word-indexed series.

Words are tuples of letters in ``1..d``; the empty tuple is the unit.  The
canonical enumeration everywhere is degree-lex: shorter words first, then
lexicographic on letters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

Word = tuple[int, ...]

EMPTY: Word = ()


class OrderExceeded(ValueError):
    """A coefficient beyond the known truncation order was requested."""


def check_word(w: Iterable[int], d: int) -> Word:
    w = tuple(int(x) for x in w)
    for x in w:
        if not 1 <= x <= d:
            raise ValueError(f"letter {x} outside 1..{d}")
    return w


def reverse(w: Word) -> Word:
    return tuple(reversed(w))


def concat(u: Word, v: Word) -> Word:
    return tuple(u) + tuple(v)


def words_of_length(d: int, k: int) -> Iterator[Word]:
    return itertools.product(range(1, d + 1), repeat=k)


def words(d: int, N: int) -> list[Word]:
    """All words of length <= N in degree-lex order."""
    out: list[Word] = []
    for k in range(N + 1):
        out.extend(words_of_length(d, k))
    return out


def num_words(d: int, N: int) -> int:
    if d == 1:
        return N + 1
    return (d ** (N + 1) - 1) // (d - 1)


def word_index(w: Word, d: int) -> int:
    """Position of ``w`` in the degree-lex enumeration."""
    k = len(w)
    offset = num_words(d, k - 1) if k > 0 else 0
    rank = 0
    for x in w:
        rank = rank * d + (x - 1)
    return offset + rank


def degree_lex_key(w: Word) -> tuple[int, Word]:
    return (len(w), w)


@dataclass(frozen=True)
class FreeSeries:
    """Truncated noncommutative power series.

    Coefficients of words longer than ``order`` are unknown; reading them
    raises :class:`OrderExceeded`.
    """

    d: int
    order: int
    coeffs: Mapping[Word, complex] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean: dict[Word, complex] = {}
        for w, c in self.coeffs.items():
            w = check_word(w, self.d)
            if len(w) > self.order:
                raise OrderExceeded(f"word {w} beyond order {self.order}")
            c = complex(c)
            if c != 0:
                clean[w] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items(), key=lambda kv: degree_lex_key(kv[0]))))

    def __getitem__(self, w: Iterable[int]) -> complex:
        w = tuple(w)
        if len(w) > self.order:
            raise OrderExceeded(f"|{w}| = {len(w)} exceeds order {self.order}")
        return self.coeffs.get(w, 0j)

    def get(self, w: Iterable[int]) -> complex:
        return self[w]

    def truncate(self, N: int) -> "FreeSeries":
        if N > self.order:
            raise OrderExceeded(f"cannot extend order {self.order} to {N}")
        return FreeSeries(self.d, N, {w: c for w, c in self.coeffs.items() if len(w) <= N})

    def transpose(self) -> "FreeSeries":
        return FreeSeries(self.d, self.order, {reverse(w): c for w, c in self.coeffs.items()})

    def conj(self) -> "FreeSeries":
        return FreeSeries(self.d, self.order, {w: c.conjugate() for w, c in self.coeffs.items()})

    def __add__(self, other: "FreeSeries") -> "FreeSeries":
        _check_same(self, other)
        order = min(self.order, other.order)
        out = {w: c for w, c in self.coeffs.items() if len(w) <= order}
        for w, c in other.coeffs.items():
            if len(w) <= order:
                out[w] = out.get(w, 0j) + c
        return FreeSeries(self.d, order, out)

    def __sub__(self, other: "FreeSeries") -> "FreeSeries":
        return self + other.scale(-1.0)

    def scale(self, lam: complex) -> "FreeSeries":
        return FreeSeries(self.d, self.order, {w: lam * c for w, c in self.coeffs.items()})

    def vector(self, N: int | None = None) -> np.ndarray:
        """Dense coefficient vector over words of length <= N (degree-lex)."""
        N = self.order if N is None else N
        if N > self.order:
            raise OrderExceeded(f"requested order {N} > {self.order}")
        v = np.zeros(num_words(self.d, N), dtype=complex)
        for w, c in self.coeffs.items():
            if len(w) <= N:
                v[word_index(w, self.d)] = c
        return v

    @classmethod
    def from_vector(cls, d: int, N: int, v: np.ndarray) -> "FreeSeries":
        return cls(d, N, {w: v[i] for i, w in enumerate(words(d, N))})

    def max_abs_diff(self, other: "FreeSeries", N: int | None = None) -> float:
        N = min(self.order, other.order) if N is None else N
        return float(np.max(np.abs(self.vector(N) - other.vector(N)), initial=0.0))

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "order": self.order,
            "coeffs": [{"word": list(w), "value": [c.real, c.imag]} for w, c in self.coeffs.items()],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "FreeSeries":
        coeffs = {tuple(r["word"]): complex(*r["value"]) for r in obj["coeffs"]}
        return cls(int(obj["d"]), int(obj["order"]), coeffs)


def _check_same(f: FreeSeries, g: FreeSeries) -> None:
    if f.d != g.d:
        raise ValueError(f"alphabet mismatch: {f.d} vs {g.d}")


def unit(d: int, order: int = 0) -> FreeSeries:
    return FreeSeries(d, order, {EMPTY: 1.0})


def series_get(f: FreeSeries, w: Iterable[int]) -> complex:
    return f[w]


def series_mul(f: FreeSeries, g: FreeSeries, N: int) -> FreeSeries:
    """Truncated Cauchy product, ``(fg)_w = sum_{uv = w} f_u g_v``."""
    _check_same(f, g)
    if N > min(f.order, g.order):
        raise OrderExceeded(f"product to order {N} needs both factors to that order")
    out: dict[Word, complex] = {}
    for u, a in f.coeffs.items():
        if len(u) > N:
            continue
        for v, b in g.coeffs.items():
            if len(u) + len(v) <= N:
                w = u + v
                out[w] = out.get(w, 0j) + a * b
    return FreeSeries(f.d, N, out)
