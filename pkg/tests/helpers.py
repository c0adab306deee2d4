"""Shared test data and independent constructions."""

import numpy as np

from ncrat import realize as rz
from ncrat.ncparse import realize_text

S2 = "0.7071067811865476"

INNER_SUITE = [("z1", 1), (f"{S2}*(z1+z2)", 2), ("(z1-0.5)*(1-0.5*z1)^-1", 1)]
NONCE_SUITE = [("0.5+0.5*z1", 1), ("z1*(2+z1)^-1", 1), ("0.5*z1+0.5*z2", 2)]
EXTRA_NONCE = [
    ("0.3+0.4*z1*z2-0.2*z2", 2),
    ("(0.3+0.2i)*z1 + 0.2i*z2*z1 - 0.1*z2", 2),
    ("(0.4-0.3i)*z1*(2+z1)^-1+0.1i", 1),
]


def R(text, d):
    return realize_text(text, d)


def random_contractive(rng, d, n, scale=0.9):
    """Transfer function of a random contractive colligation [[A, B], [C, D]]."""
    M = rng.standard_normal((d * n + 1, n + 1)) + 1j * rng.standard_normal((d * n + 1, n + 1))
    M *= scale / np.linalg.norm(M, 2)
    A = M[: d * n, :n].reshape(d, n, n)
    B = M[: d * n, n].reshape(d, n)
    return rz.FMRealization(A, B, M[d * n, :n], M[d * n, n])


def random_realization(rng, d, n, radius=0.5):
    """Random realization whose state tuple is a strict row contraction."""
    A = rng.standard_normal((d, n, n)) + 1j * rng.standard_normal((d, n, n))
    A *= radius / np.sqrt(rz.row_norm_sq(A))
    B = rng.standard_normal((d, n)) + 1j * rng.standard_normal((d, n))
    C = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    D = complex(rng.standard_normal(), rng.standard_normal())
    return rz.FMRealization(A, B, C, D)


def series_by_words(Z, coeffs):
    """sum_w c_w Z^w from a FreeSeries, by explicit matrix products."""
    m = Z.shape[1]
    out = np.zeros((m, m), dtype=complex)
    for w, c in coeffs.coeffs.items():
        out += c * rz.word_matrix(Z, w)
    return out
