"""Truncated Fock-space oracle.

Everything here works with plain coefficient arrays indexed by words of
length <= N in degree-lex order and never touches realizations, so it can
serve as an independent check on the state-space code.

Inner products are linear in the second slot.  A left Toeplitz operator T is
determined by its symbol ``t_g = <1, T z^g>``; its matrix entries are
``<z^a, T z^{a g}> = t_g``, the conjugate at the transposed position, and 0
for incomparable words.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import CapExceeded, NotHermitian, NotPositive
from .freecore import FreeSeries, OrderExceeded, num_words, words

MEMORY_CAP = 10_000_000


def _offsets(d: int, N: int) -> list[int]:
    return [num_words(d, k - 1) if k else 0 for k in range(N + 2)]


def _check_cap(d: int, N: int) -> int:
    size = num_words(d, N)
    if size * size > MEMORY_CAP:
        raise CapExceeded(f"{size} words at order {N} exceed the {MEMORY_CAP:g} entry cap")
    return size


def reversal_permutation(d: int, N: int) -> np.ndarray:
    """``perm[i]`` is the index of the reverse of word ``i``."""
    off = _offsets(d, N)
    perm = np.empty(num_words(d, N), dtype=np.int64)
    for k in range(N + 1):
        if k == 0:
            perm[0] = 0
            continue
        # reverse the base-d digits of the rank within level k
        rest = np.arange(d**k, dtype=np.int64)
        rank = np.zeros(d**k, dtype=np.int64)
        for _ in range(k):
            rank = rank * d + rest % d
            rest //= d
        perm[off[k] : off[k + 1]] = off[k] + rank
    return perm


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    d: int
    N: int
    M: np.ndarray

    def __post_init__(self) -> None:
        size = num_words(self.d, self.N)
        if self.M.shape != (size, size):
            raise ValueError(f"matrix shape {self.M.shape} does not match {size} words")

    @property
    def is_hermitian(self) -> bool:
        return bool(np.allclose(self.M, self.M.conj().T, atol=1e-12 * max(1.0, np.abs(self.M).max())))

    def block(self, n: int) -> np.ndarray:
        """Sub-block on words of length <= n."""
        k = num_words(self.d, n)
        return self.M[:k, :k]

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return TruncatedOperator(self.d, self.N, self.M @ other.M)

    def adjoint(self) -> "TruncatedOperator":
        return TruncatedOperator(self.d, self.N, self.M.conj().T)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "N": self.N,
            "words": [list(w) for w in words(self.d, self.N)],
            "M": np.stack([self.M.real, self.M.imag], axis=-1).tolist(),
        }


def _concat_index(d: int, off: list[int], k: int, l: int) -> np.ndarray:
    """Index array [rank_u, rank_w] -> index of u w with |u| = k, |w| = l."""
    ru = np.arange(d**k)[:, None]
    rw = np.arange(d**l)[None, :]
    return off[k + l] + ru * d**l + rw


def shifts(d: int, N: int) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Compressions of the left and right free shifts to words of length <= N."""
    size = _check_cap(d, N)
    off = _offsets(d, N)
    L = [np.zeros((size, size)) for _ in range(d)]
    R = [np.zeros((size, size)) for _ in range(d)]
    for l in range(N):
        cols = off[l] + np.arange(d**l)
        for j in range(d):
            L[j][off[l + 1] + j * d**l + np.arange(d**l), cols] = 1.0
            R[j][off[l + 1] + np.arange(d**l) * d + j, cols] = 1.0
    return L, R


def mult_matrix(f: FreeSeries, N: int, side: str = "left") -> TruncatedOperator:
    """Compression of f(L) or f(R) to words of length <= N.

    ``f(L) z^w = sum_u f_u z^{u w}`` and ``f(R) z^w = sum_u f_u z^{w u^t}``.
    """
    if f.order < N:
        raise OrderExceeded(f"series order {f.order} < truncation {N}")
    d = f.d
    size = _check_cap(d, N)
    off = _offsets(d, N)
    coef = f.vector(N)
    if side.lower() == "right":
        coef = coef[reversal_permutation(d, N)]
    elif side.lower() != "left":
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    M = np.zeros((size, size), dtype=complex)
    for k in range(N + 1):
        ck = coef[off[k] : off[k + 1]]
        for l in range(N + 1 - k):
            if side.lower() == "left":
                rows = _concat_index(d, off, k, l)  # [u, w]
                vals = np.broadcast_to(ck[:, None], rows.shape)
                cols = np.broadcast_to(off[l] + np.arange(d**l)[None, :], rows.shape)
            else:
                rows = _concat_index(d, off, l, k)  # [w, v]
                vals = np.broadcast_to(ck[None, :], rows.shape)
                cols = np.broadcast_to(off[l] + np.arange(d**l)[:, None], rows.shape)
            M[rows.ravel(), cols.ravel()] = vals.ravel()
    return TruncatedOperator(d, N, M)


def toeplitz_from_symbol(t: FreeSeries, N: int) -> TruncatedOperator:
    """Compression of the left Toeplitz operator with symbol ``t_g = <1, T z^g>``."""
    if t.order < N:
        raise OrderExceeded(f"symbol order {t.order} < truncation {N}")
    d = t.d
    size = _check_cap(d, N)
    off = _offsets(d, N)
    tv = t.vector(N)
    M = np.zeros((size, size), dtype=complex)
    for k in range(N + 1):
        rows_k = off[k] + np.arange(d**k)
        for l in range(N + 1 - k):
            cols = _concat_index(d, off, k, l)
            rows = np.broadcast_to(rows_k[:, None], cols.shape)
            vals = np.broadcast_to(tv[off[l] : off[l + 1]][None, :], cols.shape)
            if l == 0:
                M[rows.ravel(), cols.ravel()] = vals.real.ravel() if np.isrealobj(vals) else vals.ravel()
            else:
                M[rows.ravel(), cols.ravel()] = vals.ravel()
                M[cols.ravel(), rows.ravel()] = vals.conj().ravel()
    return TruncatedOperator(d, N, M)


def gram_symbol(f: FreeSeries, N: int) -> FreeSeries:
    """Symbol of f(R)^* f(R) from truncated coefficients.

    ``t_g = <f^t, z^g f^t> = sum_u conj(f_{u g^t}) f_u``; terms with words
    beyond the known order of f are dropped (see :func:`gram_tail_bound`).
    """
    if N > f.order:
        raise OrderExceeded(f"symbol order {N} exceeds series order {f.order}")
    return gram_symbol_vector(f.d, f.vector(), N)


def gram_symbol_vector(d: int, fv: np.ndarray, N: int) -> FreeSeries:
    """:func:`gram_symbol` for a dense degree-lex coefficient vector."""
    off = _offsets(d, N)
    M = 0
    while _offsets(d, M + 1)[-1] <= fv.size:
        M += 1
    if _offsets(d, M)[-1] != fv.size:
        raise ValueError("coefficient vector length is not a full degree-lex block")
    if N > M:
        raise OrderExceeded(f"symbol order {N} exceeds series order {M}")
    offM = _offsets(d, M)
    perm = reversal_permutation(d, N)
    out = np.zeros(num_words(d, N), dtype=complex)
    for l in range(N + 1):
        for g in range(d**l):
            # u g^t over all |u| <= M - l
            idx = off[l] + g
            gt = perm[idx] - off[l]
            acc = 0j
            for k in range(M - l + 1):
                cols = offM[k + l] + np.arange(d**k) * d**l + gt
                acc += np.vdot(fv[cols], fv[offM[k] : offM[k + 1]])
            out[idx] = acc
    return FreeSeries.from_vector(d, N, out)


def gram_tail_bound(f: FreeSeries, rho: float) -> float:
    """Bound on the neglected part of :func:`gram_symbol` entries.

    Assumes the energy of f on words of length k decays like ``rho**k``
    beyond the known order, extrapolated from the last level.
    """
    d, M = f.d, f.order
    off = _offsets(d, M)
    fv = f.vector(M)
    top = float(np.sqrt(np.sum(np.abs(fv[off[M] : off[M + 1]]) ** 2)))
    total = float(np.linalg.norm(fv))
    if rho >= 1:
        return float("inf")
    tail = top * rho / (1 - rho)
    return 2 * total * tail + tail**2


def defect_symbol(b: FreeSeries, N: int) -> FreeSeries:
    """Symbol of I - b(R)^* b(R) from truncated coefficients."""
    t = gram_symbol(b, N).scale(-1.0)
    return t + FreeSeries(b.d, N, {(): 1.0})


def herglotz_symbol(h: FreeSeries, N: int) -> FreeSeries:
    """Symbol of Re h(R): ``t_0 = Re h_0`` and ``t_g = conj(h_{g^t}) / 2``."""
    if h.order < N:
        raise OrderExceeded(f"series order {h.order} < truncation {N}")
    v = h.vector(N)[reversal_permutation(h.d, N)].conj() / 2
    v[0] = h.vector(0)[0].real
    return FreeSeries.from_vector(h.d, N, v)


def toeplitz_residual(T: TruncatedOperator, valid: int | None = None) -> float:
    """max_{j,k} || L_j^* T L_k - delta_{jk} T || on words of length <= valid.

    ``valid`` defaults to N - 1, the largest block where the compression of
    the shifts is exact.  Products of compressions need a smaller block.
    """
    valid = T.N - 1 if valid is None else min(valid, T.N - 1)
    if valid < 0:
        return 0.0
    L, _ = shifts(T.d, T.N)
    k = num_words(T.d, valid)
    worst = 0.0
    for j in range(T.d):
        for i in range(T.d):
            E = (L[j].T @ T.M @ L[i])[:k, :k]
            if i == j:
                E = E - T.M[:k, :k]
            worst = max(worst, float(np.linalg.norm(E, 2)))
    return worst


def min_eig(T: TruncatedOperator | np.ndarray, tol: float = 1e-10) -> float:
    M = T.M if isinstance(T, TruncatedOperator) else np.asarray(T)
    scale = max(1.0, float(np.abs(M).max(initial=0.0)))
    if not np.allclose(M, M.conj().T, atol=tol * scale):
        raise NotHermitian(f"max asymmetry {np.abs(M - M.conj().T).max():.3g}")
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])


@dataclass(frozen=True)
class Entropy:
    N: int
    value: float
    log: float


def schur_entropy_matrix(M: np.ndarray, tol: float = 1e-9) -> float:
    """inf over x of [1; -x]^* M [1; -x], with index 0 the empty word."""
    M = (M + M.conj().T) / 2
    n = M.shape[0]
    if n == 1:
        return float(M[0, 0].real)
    scale = max(1.0, float(np.abs(M).max()))
    order = np.r_[1:n, 0]
    P = M[np.ix_(order, order)]
    try:
        Lc = np.linalg.cholesky(P)
        return float(abs(Lc[-1, -1]) ** 2)
    except np.linalg.LinAlgError:
        pass
    w, U = np.linalg.eigh(M)
    if w[0] < -tol * scale:
        raise NotPositive(f"truncated operator has eigenvalue {w[0]:.3g}")
    F = (U * np.sqrt(np.clip(w, 0, None))) @ U.conj().T
    x, *_ = np.linalg.lstsq(F[:, 1:], F[:, 0], rcond=None)
    return float(np.linalg.norm(F[:, 0] - F[:, 1:] @ x) ** 2)


def entropy_schur(t: FreeSeries, N: int, tol: float = 1e-9) -> Entropy:
    """Order-N entropy value of the left Toeplitz operator with symbol t.

    The value is the Schur complement of the empty-word entry, which is the
    minimum of <1 - p, T (1 - p)> over polynomials p of degree <= N with
    p(0) = 0.
    """
    T = toeplitz_from_symbol(t, N)
    w0 = float(np.linalg.eigvalsh(T.M)[0])
    scale = max(1.0, float(np.abs(T.M).max()))
    if w0 < -tol * scale:
        raise NotPositive(f"truncated operator has eigenvalue {w0:.3g}")
    eps = max(schur_entropy_matrix(T.M, tol), 0.0)
    eps = min(eps, float(T.M[0, 0].real))
    return Entropy(N, eps, float(np.log(eps)) if eps > 0 else float("-inf"))


def spectral_factor_1d(t: FreeSeries, N: int, tol: float = 1e-9) -> FreeSeries:
    """Outer factor of a nonnegative trigonometric symbol (d = 1).

    Bauer's method: the last row of the Cholesky factor of the (N+1)-section
    of the Toeplitz matrix, read from the diagonal leftwards, approximates
    the outer factor f with ``T = f(R)^* f(R)``, normalized so f(0) > 0.
    """
    if t.d != 1:
        raise ValueError("spectral_factor_1d requires d = 1")
    T = toeplitz_from_symbol(t, N).M
    try:
        Lc = scipy.linalg.cholesky(T, lower=True)
    except np.linalg.LinAlgError:
        w = np.linalg.eigvalsh(T)[0]
        if w < -tol * max(1.0, np.abs(T).max()):
            raise NotPositive(f"Toeplitz section has eigenvalue {w:.3g}") from None
        Lc = scipy.linalg.cholesky(T + (abs(w) + 1e-14) * np.eye(N + 1), lower=True)
    row = Lc[N, ::-1]
    phase = row[0] / abs(row[0]) if row[0] != 0 else 1.0
    return FreeSeries.from_vector(1, N, row / phase)
