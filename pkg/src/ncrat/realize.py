"""State-space realizations of NC rational functions regular at 0.

An FM realization ``(A, B, C, D)`` realizes

    r(X) = D I + (C (x) I) L_A(X)^{-1} (B (x) X),   L_A(X) = I - sum_j A_j (x) X_j,

so that the Taylor coefficient of the word ``w . j`` is ``C A_{w_1} ... A_{w_k} B_j``
and ``r(X) = sum_w r_w X_{w_1} ... X_{w_k}``.  A descriptor realization
``(A, b, c)`` realizes ``r(X) = (b^* (x) I) L_A(X)^{-1} (c (x) I)`` with
coefficients ``b^* A^w c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import _linalg
from .errors import Indeterminate, NotPure, SingularAtZero, SingularPencil
from .freecore import EMPTY, FreeSeries, Word, check_word, num_words, reverse

DEFAULT_RANK_TOL = 1e-10
PENCIL_COND_CAP = 1e12


def _as_tuple(A, d: int, n: int) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.zeros((d, n, n), dtype=complex)
    return A.reshape(d, n, n)


@dataclass(frozen=True, eq=False)
class FMRealization:
    """FM realization; ``A`` has shape (d, n, n), ``B`` shape (d, n), ``C`` shape (n,)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: complex

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=complex)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValueError(f"A must have shape (d, n, n), got {A.shape}")
        d, n = A.shape[0], A.shape[1]
        B = np.asarray(self.B, dtype=complex).reshape(d, n)
        C = np.asarray(self.C, dtype=complex).reshape(n)
        for arr in (A, B, C):
            arr.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", complex(self.D))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    # construction helpers
    @classmethod
    def constant(cls, d: int, value: complex) -> "FMRealization":
        return cls(np.zeros((d, 0, 0)), np.zeros((d, 0)), np.zeros(0), value)

    @classmethod
    def variable(cls, d: int, k: int) -> "FMRealization":
        B = np.zeros((d, 1))
        B[k - 1, 0] = 1.0
        return cls(np.zeros((d, 1, 1)), B, np.ones(1), 0.0)

    # evaluation and coefficients
    def coeff(self, w: Word) -> complex:
        w = check_word(w, self.d)
        if not w:
            return self.D
        row = self.C
        for i in w[:-1]:
            row = row @ self.A[i - 1]
        return complex(row @ self.B[w[-1] - 1])

    def coeff_vector(self, N: int) -> np.ndarray:
        """Coefficients of all words of length <= N in degree-lex order."""
        if self.n == 0:
            v = np.zeros(num_words(self.d, N), dtype=complex)
            v[0] = self.D
            return v
        out = [np.array([self.D])]
        rows = self.C[None, :]
        for _ in range(N):
            out.append((rows @ self.B.T).reshape(-1))
            rows = np.einsum("wa,jab->wjb", rows, self.A).reshape(-1, self.n)
        return np.concatenate(out)

    def coeffs(self, N: int) -> FreeSeries:
        return FreeSeries.from_vector(self.d, N, self.coeff_vector(N))

    def pencil(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=complex)
        m = Z.shape[1]
        return np.eye(self.n * m) - sum(np.kron(self.A[j], Z[j]) for j in range(self.d))

    def eval(self, Z) -> np.ndarray:
        Z = as_point(Z, self.d)
        m = Z.shape[1]
        out = self.D * np.eye(m, dtype=complex)
        if self.n == 0:
            return out
        L = self.pencil(Z)
        cond = np.linalg.cond(L)
        if not np.isfinite(cond) or cond > PENCIL_COND_CAP:
            raise SingularPencil(f"pencil condition number {cond:.3g}")
        BZ = sum(np.kron(self.B[j][:, None], Z[j]) for j in range(self.d))
        CI = np.kron(self.C[None, :], np.eye(m))
        return out + CI @ np.linalg.solve(L, BZ)

    # arithmetic
    def __add__(self, other: "FMRealization") -> "FMRealization":
        return add(self, other)

    def __mul__(self, other: "FMRealization") -> "FMRealization":
        return mul(self, other)

    def conj(self) -> "FMRealization":
        """Realization of the series with conjugated coefficients."""
        return FMRealization(self.A.conj(), self.B.conj(), self.C.conj(), self.D.conjugate())

    def similar(self, S: np.ndarray) -> "FMRealization":
        Si = np.linalg.inv(S)
        return FMRealization(np.einsum("ab,jbc,cd->jad", Si, self.A, S), self.B @ Si.T, self.C @ S, self.D)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "n": self.n,
            "A": _c2j(self.A),
            "B": _c2j(self.B),
            "C": _c2j(self.C),
            "D": [self.D.real, self.D.imag],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "FMRealization":
        d, n = int(obj["d"]), int(obj["n"])
        return cls(
            _j2c(obj["A"]).reshape(d, n, n) if n else np.zeros((d, 0, 0)),
            _j2c(obj["B"]).reshape(d, n) if n else np.zeros((d, 0)),
            _j2c(obj["C"]).reshape(n) if n else np.zeros(0),
            complex(*obj["D"]),
        )

    def __repr__(self) -> str:
        return f"FMRealization(d={self.d}, n={self.n}, D={self.D:.6g})"


@dataclass(frozen=True, eq=False)
class DescriptorRealization:
    A: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self) -> None:
        A = np.asarray(self.A, dtype=complex)
        m = A.shape[1]
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", np.asarray(self.b, dtype=complex).reshape(m))
        object.__setattr__(self, "c", np.asarray(self.c, dtype=complex).reshape(m))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.A.shape[1]

    def coeff(self, w: Word) -> complex:
        w = check_word(w, self.d)
        v = self.c
        for i in reversed(w):
            v = self.A[i - 1] @ v
        return complex(self.b.conj() @ v)

    def coeff_vector(self, N: int) -> np.ndarray:
        if self.m == 0:
            return np.zeros(num_words(self.d, N), dtype=complex)
        out = []
        rows = self.b.conj()[None, :]
        for _ in range(N + 1):
            out.append(rows @ self.c)
            rows = np.einsum("wa,jab->wjb", rows, self.A).reshape(-1, self.m)
        return np.concatenate(out)

    def coeffs(self, N: int) -> FreeSeries:
        return FreeSeries.from_vector(self.d, N, self.coeff_vector(N))

    def eval(self, Z) -> np.ndarray:
        Z = as_point(Z, self.d)
        m = Z.shape[1]
        L = np.eye(self.m * m) - sum(np.kron(self.A[j], Z[j]) for j in range(self.d))
        bI = np.kron(self.b.conj()[None, :], np.eye(m))
        cI = np.kron(self.c[:, None], np.eye(m))
        return bI @ np.linalg.solve(L, cI)

    def to_json(self) -> dict:
        return {"d": self.d, "m": self.m, "A": _c2j(self.A), "b": _c2j(self.b), "c": _c2j(self.c)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "DescriptorRealization":
        d, m = int(obj["d"]), int(obj["m"])
        return cls(_j2c(obj["A"]).reshape(d, m, m), _j2c(obj["b"]).reshape(m), _j2c(obj["c"]).reshape(m))


def _c2j(a: np.ndarray):
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _j2c(x) -> np.ndarray:
    a = np.asarray(x, dtype=float)
    if a.size == 0:
        return np.zeros(0, dtype=complex)
    return a[..., 0] + 1j * a[..., 1]


def as_point(Z, d: int) -> np.ndarray:
    """Normalize a point: scalars and (d,) vectors become 1x1 matrices."""
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim == 0:
        Z = Z.reshape(1, 1, 1)
    elif Z.ndim == 1:
        Z = Z.reshape(-1, 1, 1)
    elif Z.ndim == 2:
        Z = Z[None]
    if Z.shape[0] != d:
        raise ValueError(f"point has {Z.shape[0]} components, expected {d}")
    return Z


# ---------------------------------------------------------------- arithmetic


def _check_alphabet(r: FMRealization, s: FMRealization) -> None:
    if r.d != s.d:
        raise ValueError(f"alphabet mismatch: {r.d} vs {s.d}")


def add(r: FMRealization, s: FMRealization) -> FMRealization:
    _check_alphabet(r, s)
    d, n1, n2 = r.d, r.n, s.n
    A = np.zeros((d, n1 + n2, n1 + n2), dtype=complex)
    A[:, :n1, :n1] = r.A
    A[:, n1:, n1:] = s.A
    return FMRealization(A, np.hstack([r.B, s.B]), np.concatenate([r.C, s.C]), r.D + s.D)


def scale(lam: complex, r: FMRealization) -> FMRealization:
    return FMRealization(r.A, r.B, lam * r.C, lam * r.D)


def mul(r: FMRealization, s: FMRealization) -> FMRealization:
    """Realization of the pointwise product r(X) s(X)."""
    _check_alphabet(r, s)
    d, n1, n2 = r.d, r.n, s.n
    A = np.zeros((d, n1 + n2, n1 + n2), dtype=complex)
    A[:, :n1, :n1] = r.A
    A[:, :n1, n1:] = np.einsum("ja,b->jab", r.B, s.C)
    A[:, n1:, n1:] = s.A
    B = np.hstack([r.B * s.D, s.B])
    C = np.concatenate([r.C, r.D * s.C])
    return FMRealization(A, B, C, r.D * s.D)


def invert(r: FMRealization, tol: float = 1e-12) -> FMRealization:
    """Flip realization of 1/r; requires r(0) != 0."""
    if abs(r.D) <= tol:
        raise SingularAtZero(f"value at 0 is {r.D:.3g}")
    D = r.D
    Ax = r.A - np.einsum("ja,b->jab", r.B, r.C) / D
    return FMRealization(Ax, r.B / D, -r.C / D, 1.0 / D)


def minimize(r: FMRealization, tol: float = DEFAULT_RANK_TOL) -> FMRealization:
    """Remove unreachable then unobservable states.

    Already-minimal input is returned unchanged.  Reductions use pivoted
    Krylov vectors, which keeps simple exact data exact; if that basis is
    badly conditioned the orthonormal basis is used instead.
    """
    if r.n == 0:
        return r
    AH = np.conj(np.transpose(r.A, (0, 2, 1)))
    Vr = _linalg.krylov_span(r.A, r.B.T, tol)
    Vo = _linalg.krylov_span(AH, r.C.conj()[:, None], tol)
    if Vr.shape[1] == r.n and Vo.shape[1] == r.n:
        return r
    red = _reduce(r, tol, pivoted=True)
    N = verification_order(r)
    if equal_coeffs(red, r, min(N, 12)) > 1e-9 * max(1.0, float(np.max(np.abs(r.coeff_vector(min(N, 12)))))):
        red = _reduce(r, tol, pivoted=False)
    return red


def _reduce(r: FMRealization, tol: float, pivoted: bool) -> FMRealization:
    span = _linalg.krylov_pivots if pivoted else _linalg.krylov_span
    V = span(r.A, r.B.T, tol)
    if V.shape[1] == 0:
        return FMRealization.constant(r.d, r.D)
    if pivoted and np.linalg.cond(V) > 1e6:
        return _reduce(r, tol, pivoted=False)
    Vl = np.linalg.solve(V.conj().T @ V, V.conj().T)
    A = np.einsum("ab,jbc,cd->jad", Vl, r.A, V)
    B = r.B @ Vl.T
    C = r.C @ V
    AH = np.conj(np.transpose(A, (0, 2, 1)))
    Wc = span(AH, C.conj()[:, None], tol)
    if Wc.shape[1] == 0:
        return FMRealization.constant(r.d, r.D)
    if pivoted and np.linalg.cond(Wc) > 1e6:
        return _reduce(r, tol, pivoted=False)
    T = Wc.conj().T
    Tr = np.linalg.solve(T @ T.conj().T, T).conj().T
    A2 = np.einsum("ab,jbc,cd->jad", T, A, Tr)
    return FMRealization(A2, B @ T.T, C @ Tr, r.D)


def tail_energy(r: FMRealization, K: int) -> float:
    """Exact sum of |r_u|^2 over words with |u| > K.

    Equals ``sum_j B_j^* Phi^K(W) B_j`` with W the observability Gramian and
    ``Phi(X) = sum_j A_j^* X A_j``.
    """
    if r.n == 0:
        return 0.0
    AH = np.conj(np.transpose(r.A, (0, 2, 1)))
    W = _linalg.solve_stein(AH, AH, np.outer(r.C.conj(), r.C))
    for _ in range(K):
        W = _linalg.apply_cp(AH, W, AH)
    return max(float(np.real(np.einsum("ja,ab,jb->", r.B.conj(), W, r.B))), 0.0)


def equal_coeffs(r, s, N: int) -> float:
    """Largest coefficient difference over words of length <= N."""
    return float(np.max(np.abs(r.coeff_vector(N) - s.coeff_vector(N))))


def verification_order(*rs) -> int:
    """Order that determines a rational series of the given sizes."""
    return 2 * sum(max(getattr(r, "n", 0), getattr(r, "m", 0)) for r in rs) + 2


# ------------------------------------------------------ descriptor conversion


def fm_from_descriptor(desc: DescriptorRealization, tol: float = DEFAULT_RANK_TOL) -> FMRealization:
    d = desc.d
    D = complex(desc.b.conj() @ desc.c)
    Ac = np.stack([desc.A[j] @ desc.c for j in range(d)], axis=1) if desc.m else np.zeros((0, d))
    Q = _linalg.krylov_span(desc.A, Ac, tol)
    if Q.shape[1] == 0:
        return FMRealization.constant(d, D)
    A0 = np.einsum("ab,jbc,cd->jad", Q.conj().T, desc.A, Q)
    B0 = (Q.conj().T @ Ac).T
    C0 = desc.b.conj() @ Q
    return FMRealization(A0, B0, C0, D)


def descriptor_from_fm(r: FMRealization) -> DescriptorRealization:
    d, n = r.d, r.n
    A = np.zeros((d, n + 1, n + 1), dtype=complex)
    A[:, 1:, 0] = r.B
    A[:, 1:, 1:] = r.A
    b = np.concatenate([[np.conj(r.D)], r.C.conj()])
    c = np.zeros(n + 1, dtype=complex)
    c[0] = 1.0
    return DescriptorRealization(A, b, c)


def minimize_descriptor(desc: DescriptorRealization, tol: float = DEFAULT_RANK_TOL) -> DescriptorRealization:
    V = _linalg.krylov_span(desc.A, desc.c[:, None], tol)
    A = np.einsum("ab,jbc,cd->jad", V.conj().T, desc.A, V)
    b, c = V.conj().T @ desc.b, V.conj().T @ desc.c
    AH = np.conj(np.transpose(A, (0, 2, 1)))
    W = _linalg.krylov_span(AH, b[:, None], tol)
    A2 = np.einsum("ab,jbc,cd->jad", W.conj().T, A, W)
    return DescriptorRealization(A2, W.conj().T @ b, W.conj().T @ c)


def transpose(desc: DescriptorRealization) -> DescriptorRealization:
    """(A, b, c) -> (A^t, conj c, conj b), realizing the letter-reversed series."""
    return DescriptorRealization(np.transpose(desc.A, (0, 2, 1)), desc.c.conj(), desc.b.conj())


def transpose_fm(r: FMRealization) -> FMRealization:
    return minimize(fm_from_descriptor(transpose(descriptor_from_fm(r))))


# ------------------------------------------------------ purity and rescaling


@dataclass(frozen=True)
class Purity:
    is_pure: bool
    cp_radius: float


def purity(A: np.ndarray, tol: float = 1e-9) -> Purity:
    rho = _linalg.cp_radius(np.asarray(A, dtype=complex))
    if abs(rho - 1.0) <= tol:
        raise Indeterminate(f"cp radius {rho:.12g} within {tol:g} of 1")
    return Purity(rho < 1.0 - tol, rho)


@dataclass(frozen=True)
class Rescaled:
    S: np.ndarray
    A: np.ndarray
    margin: float


def rescale_to_strict(A: np.ndarray) -> Rescaled:
    """Joint similarity making a pure tuple a strict row contraction.

    Solves H - sum_j A_j H A_j^* = I and sets A'_j = H^{-1/2} A_j H^{1/2},
    so that sum_j A'_j A'_j^* = I - H^{-1}.
    """
    A = np.asarray(A, dtype=complex)
    n = A.shape[1]
    if n == 0:
        return Rescaled(np.zeros((0, 0)), A, 1.0)
    rho = _linalg.cp_radius(A)
    if rho >= 1.0:
        raise NotPure(f"cp radius {rho:.6g} >= 1")
    H = _linalg.solve_stein(A, A, np.eye(n))
    H = (H + H.conj().T) / 2
    try:
        Hh, Hih = _linalg.psd_sqrt(H)
    except np.linalg.LinAlgError as exc:
        raise NotPure("Stein solution not positive definite") from exc
    Ap = np.einsum("ab,jbc,cd->jad", Hih, A, Hh)
    row = np.einsum("jab,jcb->ac", Ap, Ap.conj())
    margin = 1.0 - float(np.max(np.linalg.eigvalsh((row + row.conj().T) / 2)))
    return Rescaled(Hh, Ap, margin)


def row_norm_sq(Z: np.ndarray) -> float:
    """Largest eigenvalue of sum_j Z_j Z_j^*."""
    Z = np.asarray(Z, dtype=complex)
    if Z.shape[1] == 0:
        return 0.0
    M = np.einsum("jab,jcb->ac", Z, Z.conj())
    return float(np.max(np.linalg.eigvalsh((M + M.conj().T) / 2)))


# ------------------------------------------------------------ Cayley maps


def cayley_inverse(h: FMRealization) -> FMRealization:
    """b = (h - 1)(h + 1)^{-1}."""
    one = FMRealization.constant(h.d, 1.0)
    if abs(h.D + 1.0) <= 1e-12:
        raise SingularAtZero("h(0) + 1 = 0")
    return minimize(mul(add(h, scale(-1.0, one)), invert(add(h, one))))


def cayley(b: FMRealization) -> FMRealization:
    """h = (1 + b)(1 - b)^{-1}."""
    one = FMRealization.constant(b.d, 1.0)
    if abs(1.0 - b.D) <= 1e-12:
        raise SingularAtZero("1 - b(0) = 0")
    return minimize(mul(add(one, b), invert(add(one, scale(-1.0, b)))))


def random_point(rng: np.random.Generator, d: int, m: int, radius: float = 0.9) -> np.ndarray:
    """Random complex strict row contraction with sum_j Z_j Z_j^* <= radius^2."""
    Z = rng.standard_normal((d, m, m)) + 1j * rng.standard_normal((d, m, m))
    s = np.sqrt(row_norm_sq(Z))
    return Z * (radius / s)


def word_matrix(Z: np.ndarray, w: Word) -> np.ndarray:
    m = Z.shape[1]
    M = np.eye(m, dtype=complex)
    for i in w:
        M = M @ Z[i - 1]
    return M


__all__ = [
    "FMRealization",
    "DescriptorRealization",
    "add",
    "scale",
    "mul",
    "invert",
    "minimize",
    "fm_from_descriptor",
    "descriptor_from_fm",
    "minimize_descriptor",
    "transpose",
    "transpose_fm",
    "purity",
    "rescale_to_strict",
    "cayley",
    "cayley_inverse",
    "EMPTY",
    "reverse",
    "num_words",
]
