"""Fejér–Riesz factorization of rational left Toeplitz operators.

Herglotz functions from squares, Cayley transforms, outer factors of
``Re h(R)``, Radon–Nikodym derivatives and Clark-measure moments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import _linalg
from . import focktrunc as ft
from . import realize as rz
from . import sarason as sr
from .errors import InnerSymbol, NotContractive, NotPositive, NotPure
from .freecore import FreeSeries, OrderExceeded, num_words, reverse, word_index, words


@dataclass(frozen=True)
class FactorConfig:
    N: int = 4
    tol: float = 1e-8
    positivity_order: int = 6
    truncation_floor: int = 12


DEFAULT = FactorConfig()


# ---------------------------------------------------------------- squares


def herglotz_square(r: rz.FMRealization) -> rz.FMRealization:
    """Herglotz h with ``Re h(R) = r(R)^* r(R)``.

    The symbol of ``r(R)^* r(R)`` is ``t_g = sum_u conj(r_{u g^t}) r_u``, so
    ``h_w = 2 sum_u conj(r_u) r_{u w}`` for w nonempty and ``h_0 = ||r||^2``.
    With ``W`` the observability Gramian this is the FM realization
    ``(A, B, 2 q, ||r||^2)`` where ``q = conj(D) C + sum_j B_j^* W A_j``.
    """
    r = rz.minimize(r)
    if r.n == 0:
        return rz.FMRealization.constant(r.d, abs(r.D) ** 2)
    rho = _linalg.cp_radius(r.A)
    if rho >= 1.0:
        raise NotPure(f"state tuple has cp radius {rho:.6g}")
    AH = np.conj(np.transpose(r.A, (0, 2, 1)))
    W = _linalg.solve_stein(AH, AH, np.outer(r.C.conj(), r.C))
    W = (W + W.conj().T) / 2
    q = np.conj(r.D) * r.C + sum(r.B[j].conj() @ W @ r.A[j] for j in range(r.d))
    h0 = abs(r.D) ** 2 + float(np.real(np.einsum("ja,ab,jb->", r.B.conj(), W, r.B)))
    return rz.minimize(rz.FMRealization(r.A, r.B, 2 * q, h0))


# --------------------------------------------------------------- reports


@dataclass(frozen=True)
class FactorReport:
    """Fourier-coefficient residual of ``d(R)^* d(R) - Re h(R)``."""

    residual: float
    tail_bound: float
    order: int
    truncation: int
    dim_h: int
    dim_d: int
    dim_unminimized: int
    passed: bool

    def to_json(self) -> dict:
        return {
            "colligation_defect_iso": None,
            "colligation_defect_coiso": None,
            "coefficient_defect": self.residual,
            "tail_bound": self.tail_bound,
            "order": self.order,
            "truncation": self.truncation,
            "dim_h": self.dim_h,
            "dim_d": self.dim_d,
            "dim_unminimized": self.dim_unminimized,
            "pass": self.passed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def factor_residual(h: rz.FMRealization, dd: rz.FMRealization, N: int = 4, floor: int = 12) -> tuple[float, float, int]:
    """max over |g| <= N of the symbol difference, plus the truncation bound."""
    M, tail = sr.truncation_order([dd], N)
    M = max(M, min(floor, _max_order(dd.d, N)))
    tail = rz.tail_energy(dd, M - N)
    lhs = ft.gram_symbol_vector(dd.d, dd.coeff_vector(M), N)
    rhs = ft.herglotz_symbol(h.coeffs(N), N)
    return lhs.max_abs_diff(rhs, N), tail, M


def _max_order(d: int, N: int, max_words: int = 2_000_000) -> int:
    M = N
    while num_words(d, M + 1) <= max_words:
        M += 1
    return M


def positivity_margin(h: rz.FMRealization, N: int) -> float:
    """Smallest eigenvalue of the compression of ``Re h(R)`` to words <= N."""
    N = sr._oracle_order(h.d, N)
    T = ft.toeplitz_from_symbol(ft.herglotz_symbol(h.coeffs(N), N), N)
    return ft.min_eig(T)


# ------------------------------------------------------------ factorization


@dataclass(frozen=True)
class Factorization:
    d_fn: rz.FMRealization
    b: rz.FMRealization
    a: rz.FMRealization | None
    report: FactorReport


def factorize(h: rz.FMRealization, cfg: FactorConfig = DEFAULT) -> Factorization:
    """Outer d with ``d(R)^* d(R) = Re h(R)`` and d(0) > 0, with a residual report."""
    h = rz.minimize(h)
    margin = positivity_margin(h, cfg.positivity_order)
    scale = max(1.0, abs(h.D))
    if margin < -cfg.tol * scale:
        raise NotPositive(f"truncated Re h(R) has eigenvalue {margin:.3g}")
    b = rz.cayley_inverse(h)
    cls = sr.classify(b)
    if cls.verdict == sr.NOT_CONTRACTIVE:
        raise NotPositive(f"Cayley transform not contractive: {cls.evidence.get('reason', '')}")
    one = rz.FMRealization.constant(h.d, 1.0)
    if cls.verdict == sr.INNER:
        a = None
        raw = rz.FMRealization.constant(h.d, 0.0)
        dd = raw
    else:
        a = sr.sarason(b)
        raw = rz.mul(a, rz.invert(rz.add(one, rz.scale(-1.0, b))))
        dd = rz.minimize(raw)
        if abs(dd.D) > 0:
            dd = rz.scale(abs(dd.D) / dd.D, dd)
    res, tail, M = factor_residual(h, dd, cfg.N, cfg.truncation_floor)
    rep = FactorReport(res, tail, cfg.N, M, h.n, dd.n, raw.n, bool(res + tail <= cfg.tol))
    return Factorization(dd, b, a, rep)


def factor_toeplitz(h: rz.FMRealization, cfg: FactorConfig = DEFAULT) -> rz.FMRealization:
    return factorize(h, cfg).d_fn


def square_factor(r: rz.FMRealization, cfg: FactorConfig = DEFAULT) -> rz.FMRealization:
    """Outer d with ``d(R)^* d(R) = r(R)^* r(R)``."""
    return factor_toeplitz(herglotz_square(r), cfg)


# ------------------------------------------------------------ Clark measures


@dataclass(frozen=True)
class NCMeasureMoments:
    """Moments ``mu(L^w)`` of a positive functional, as a truncated series."""

    d: int
    moments: FreeSeries

    @property
    def order(self) -> int:
        return self.moments.order

    def __getitem__(self, w) -> complex:
        return self.moments[w]

    @property
    def mass(self) -> float:
        return float(self.moments[()].real)

    def symbol(self) -> FreeSeries:
        """Toeplitz symbol ``<1, T L^g 1>``; with the inner product linear in the second slot it is conj(mu)."""
        return self.moments.conj()

    def toeplitz(self, N: int | None = None) -> ft.TruncatedOperator:
        N = self.order if N is None else N
        return ft.toeplitz_from_symbol(self.symbol(), N)

    def psd_margin(self, N: int | None = None) -> float:
        return ft.min_eig(self.toeplitz(N))

    def entropy(self, N: int) -> ft.Entropy:
        return ft.entropy_schur(self.symbol(), N)

    def to_json(self) -> dict:
        out = self.moments.to_json()
        out["measure"] = True
        return out

    @classmethod
    def from_json(cls, obj) -> "NCMeasureMoments":
        s = FreeSeries.from_json(obj)
        return cls(s.d, s)


def clark_moments(b: rz.FMRealization, maxlen: int) -> NCMeasureMoments:
    """``mu(L^w) = H_{w^t} / 2`` for w nonempty and ``mu(1) = Re H(0)``, H = cayley(b)."""
    H = rz.cayley(b)
    v = H.coeff_vector(maxlen)[ft.reversal_permutation(b.d, maxlen)] / 2
    v[0] = H.D.real
    return NCMeasureMoments(b.d, FreeSeries.from_vector(b.d, maxlen, v))


def gramian_moments(h: rz.FMRealization, maxlen: int) -> NCMeasureMoments:
    """Exact ``mu(L^w) = sum_u h_{w u} conj(h_u)``.

    With the controllability Gramian ``Y - sum_j A_j Y A_j^* = sum_j B_j B_j^*``
    the sum equals ``h_w conj(h_0) + C A^w Y C^*``.
    """
    d = h.d
    hv = h.coeff_vector(maxlen)
    if h.n == 0:
        v = np.zeros(num_words(d, maxlen), dtype=complex)
        v[0] = abs(h.D) ** 2
        return NCMeasureMoments(d, FreeSeries.from_vector(d, maxlen, v))
    Y = _linalg.solve_stein(h.A, h.A, h.B.T @ h.B.conj())
    rows = [h.C[None, :]]
    for _ in range(maxlen):
        rows.append(np.einsum("wa,jab->wjb", rows[-1], h.A).reshape(-1, h.n))
    tail = np.concatenate(rows) @ Y @ h.C.conj()
    return NCMeasureMoments(d, FreeSeries.from_vector(d, maxlen, hv * np.conj(h.D) + tail))


def moments_from_function(h: rz.FMRealization, maxlen: int, N: int | None = None) -> tuple[NCMeasureMoments, float]:
    """``mu(L^w) = sum_u h_{w u} conj(h_u)`` with a bound on the dropped terms."""
    if N is None:
        M, tail = sr.truncation_order([h], maxlen)
    else:
        M, tail = N, rz.tail_energy(h, N - maxlen)
    d = h.d
    hv = h.coeff_vector(M)
    off = np.concatenate([[0], np.cumsum([d**k for k in range(M + 1)])])
    mom = {}
    for w in words(d, maxlen):
        l, iw = len(w), word_index(w, d) - off[len(w)]
        acc = 0j
        for k in range(M - l + 1):
            start = off[l + k] + iw * d**k
            acc += np.vdot(hv[off[k] : off[k + 1]], hv[start : start + d**k])
        mom[w] = acc
    return NCMeasureMoments(h.d, FreeSeries(h.d, maxlen, mom)), tail


def radon_nikodym(b: rz.FMRealization) -> rz.FMRealization:
    """h whose transpose is ``a (1 - b)^{-1}``, a the Sarason function."""
    cls = sr.classify(b)
    if cls.verdict == sr.INNER:
        raise InnerSymbol("b is inner; its Clark measure is singular")
    if cls.verdict != sr.NONCE:
        raise NotContractive(f"classification {cls.verdict}")
    a = sr.sarason(b)
    one = rz.FMRealization.constant(b.d, 1.0)
    ht = rz.minimize(rz.mul(a, rz.invert(rz.add(one, rz.scale(-1.0, b)))))
    return rz.transpose_fm(ht)


def rn_moments(b: rz.FMRealization, maxlen: int) -> NCMeasureMoments:
    """Moments ``<h, L^w h>`` of the absolutely continuous part, h = radon_nikodym(b)."""
    return gramian_moments(radon_nikodym(b), maxlen)


def herglotz_eval(mu: NCMeasureMoments, Z, tol: float = 1e-8) -> np.ndarray:
    """``mu(1) I + 2 sum_{w nonempty} Z^{w^t} mu(L^w)`` truncated at the known order.

    Level k of the sum has norm at most ``r^k mu(1)`` with
    ``r^2 = ||sum_j Z_j Z_j^*||``, so the tail is at most
    ``2 mu(1) r^{K+1} / (1 - r)``.
    """
    Z = rz.as_point(Z, mu.d)
    m = Z.shape[1]
    r = np.sqrt(rz.row_norm_sq(Z))
    K = mu.order
    tail = float("inf") if r >= 1 else 2 * mu.mass * r ** (K + 1) / (1 - r)
    if tail > tol:
        raise OrderExceeded(f"tail bound {tail:.3g} exceeds {tol:g} at order {K}")
    out = mu.mass * np.eye(m, dtype=complex)
    v = mu.moments.vector()
    # P[w] = Z^{w^t}; appending a letter j on the right multiplies by Z_j on the left
    P = np.eye(m, dtype=complex)[None]
    start = 1
    for k in range(1, K + 1):
        P = np.einsum("jab,wbc->wjac", Z, P).reshape(-1, m, m)
        out = out + 2 * np.tensordot(v[start : start + mu.d**k], P, axes=1)
        start += mu.d**k
    return out


__all__ = [
    "FactorConfig",
    "FactorReport",
    "Factorization",
    "NCMeasureMoments",
    "herglotz_square",
    "factorize",
    "factor_toeplitz",
    "factor_residual",
    "square_factor",
    "clark_moments",
    "moments_from_function",
    "radon_nikodym",
    "rn_moments",
    "gramian_moments",
    "herglotz_eval",
    "positivity_margin",
]
