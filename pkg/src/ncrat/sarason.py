"""Inner versus non-column-extreme classification and the Sarason outer function."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import _linalg
from . import focktrunc as ft
from . import kernels as kn
from . import realize as rz
from .errors import CapExceeded, InnerSymbol, NCRatError, NotContractive, NotPure
from .freecore import OrderExceeded, num_words


@dataclass(frozen=True)
class SarasonConfig:
    inner_tol: float = 1e-10
    nonce_tol: float = 1e-8
    contractive_order: int = 8
    contractive_tol: float = 1e-9
    purity_tol: float = 1e-9


DEFAULT = SarasonConfig()

INNER = "Inner"
NONCE = "NonCE"
NOT_CONTRACTIVE = "NotContractive"
INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class Classification:
    verdict: str
    a0_squared: float
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "a0_squared": self.a0_squared, "evidence": self.evidence}


def _oracle_order(d: int, wanted: int) -> int:
    N = wanted
    while N > 0 and num_words(d, N) ** 2 > ft.MEMORY_CAP:
        N -= 1
    return N


def contractivity_margin(b: rz.FMRealization, N: int) -> float:
    """Smallest eigenvalue of P_N - (P_N b(R) P_N)^* (P_N b(R) P_N).

    Nonnegativity is necessary for b to be a contractive multiplier.
    """
    N = _oracle_order(b.d, N)
    M = ft.mult_matrix(b.coeffs(N), N, "right").M
    return ft.min_eig(np.eye(M.shape[0]) - M.conj().T @ M)


def classify(b: rz.FMRealization, cfg: SarasonConfig = DEFAULT) -> Classification:
    b = rz.minimize(b)
    ev: dict = {"state_dim": b.n}
    rho = _linalg.cp_radius(b.A)
    ev["cp_radius"] = rho
    if rho >= 1 - cfg.purity_tol:
        ev["reason"] = "state tuple not pure"
        return Classification(NOT_CONTRACTIVE, float("nan"), ev)
    margin = contractivity_margin(b, cfg.contractive_order)
    ev["oracle_min_eig"] = margin
    if margin < -cfg.contractive_tol:
        ev["reason"] = "truncated multiplier not contractive"
        return Classification(NOT_CONTRACTIVE, float("nan"), ev)
    try:
        ric = kn.solve_riccati(b)
    except NotContractive as exc:
        ev["reason"] = exc.detail
        return Classification(NOT_CONTRACTIVE, float("nan"), ev)
    ev["fock_defect"] = ric.gamma_h2
    ev["gram_min_eig"] = float(np.linalg.eigvalsh(ric.P)[0]) if b.n else None
    ev["riccati_residual"] = ric.residual
    ev["critical"] = ric.critical
    ev["refined"] = ric.refined
    a0sq = max(float(ric.gamma), 0.0)
    if a0sq <= cfg.inner_tol:
        verdict = INNER
    elif a0sq >= cfg.nonce_tol:
        verdict = NONCE
    else:
        verdict = INDETERMINATE
    return Classification(verdict, a0sq, ev)


def a0_squared(b: rz.FMRealization, cfg: SarasonConfig = DEFAULT) -> float:
    cls = classify(b, cfg)
    if cls.verdict == NOT_CONTRACTIVE:
        raise NotContractive(cls.evidence.get("reason", ""))
    return cls.a0_squared


def sarason(b: rz.FMRealization, cfg: SarasonConfig = DEFAULT) -> rz.FMRealization:
    """Sarason outer function a of a non-column-extreme b, with a(0) > 0.

    In the model-space coordinates a is realized by ``(A, B, -N^*/a0, a0)``;
    the coefficient of ``w j`` equals ``-a0 <b^t, X_{w_1} ... X_{w_k} L_j^* b^t>_b``.
    """
    b = rz.minimize(b)
    cls = classify(b, cfg)
    if cls.verdict == INNER:
        raise InnerSymbol("symbol is inner; no outer Sarason function")
    if cls.verdict == NOT_CONTRACTIVE:
        raise NotContractive(cls.evidence.get("reason", ""))
    if cls.verdict == INDETERMINATE:
        raise NotContractive(f"a(0)^2 = {cls.a0_squared:.3g} inside the indeterminate band")
    if b.n == 0:
        return rz.FMRealization.constant(b.d, np.sqrt(cls.a0_squared))
    ric = kn.solve_riccati(b)
    a0 = np.sqrt(ric.gamma)
    a = rz.FMRealization(b.A, b.B, -ric.N.conj() / a0, a0)
    return rz.minimize(a)


# ------------------------------------------------------------ verification


@dataclass(frozen=True)
class ColumnReport:
    colligation_defect_iso: float
    colligation_defect_coiso: float
    coefficient_defect: float
    tail_bound: float
    order: int
    passed: bool

    def to_json(self) -> dict:
        return {
            "colligation_defect_iso": self.colligation_defect_iso,
            "colligation_defect_coiso": self.colligation_defect_coiso,
            "coefficient_defect": self.coefficient_defect,
            "tail_bound": self.tail_bound,
            "order": self.order,
            "pass": self.passed,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def column_realization(b: rz.FMRealization, a: rz.FMRealization):
    """Joint realization (A, B, C, D) of the column (b; a); C has two rows."""
    d = b.d
    n1, n2 = b.n, a.n
    A = np.zeros((d, n1 + n2, n1 + n2), dtype=complex)
    A[:, :n1, :n1] = b.A
    A[:, n1:, n1:] = a.A
    B = np.hstack([b.B, a.B])
    C = np.zeros((2, n1 + n2), dtype=complex)
    C[0, :n1] = b.C
    C[1, n1:] = a.C
    D = np.array([b.D, a.D])
    # restrict to the reachable then observable part
    V = _linalg.krylov_span(A, B.T)
    A = np.einsum("ab,jbc,cd->jad", V.conj().T, A, V)
    B = B @ V.conj()
    C = C @ V
    AH = np.conj(np.transpose(A, (0, 2, 1)))
    W = _linalg.krylov_span(AH, C.conj().T)
    A = np.einsum("ab,jbc,cd->jad", W.conj().T, A, W)
    return A, B @ W.conj(), C @ W, D


def _colligation_defects(b: rz.FMRealization, a: rz.FMRealization) -> tuple[float, float]:
    A, B, C, D = column_realization(b, a)
    d, n = A.shape[0], A.shape[1]
    if n == 0:
        iso = abs(1 - np.vdot(D, D).real)
        return float(iso), 0.0
    AH = np.conj(np.transpose(A, (0, 2, 1)))
    W = kn.stein(AH, AH, C.conj().T @ C)
    W = (W + W.conj().T) / 2
    # isometry of U_c on M0(c) + C in the Fock metric
    top = sum(A[j].conj().T @ W @ A[j] for j in range(d)) + C.conj().T @ C - W
    off = sum(A[j].conj().T @ W @ B[j] for j in range(d)) + C.conj().T @ D
    corner = sum(B[j].conj() @ W @ B[j] for j in range(d)) + np.vdot(D, D) - 1.0
    Wh, Wih = _linalg.psd_sqrt(W)
    E = np.zeros((n + 1, n + 1), dtype=complex)
    E[:n, :n] = Wih @ top @ Wih
    E[:n, n] = Wih @ off
    E[n, :n] = E[:n, n].conj()
    E[n, n] = corner
    iso = float(np.linalg.norm(E, 2))
    # co-isometry: the defect on M0(c) (x) C^d + C^2 is -sum_j <c(R)^* g_j, c(R)^* g'_j>
    coiso = _coiso_defect(b, a, A, B, C, W)
    return iso, coiso


def _coiso_defect(b, a, A, B, C, W) -> float:
    """Largest value of ||c(R)^* g||^2 / ||g||^2 over g in M0(c).

    Each component of ``g = O x`` is a kernel vector ``K{A^*, x, C_i^*}``, so
    ``c(R)^* g = K{A^*, x, b^t(A^*) C_1^* + a^t(A^*) C_2^*}`` and its Fock
    Gram is one Stein solve (after rescaling A^* to a strict contraction).
    """
    n = A.shape[1]
    d = A.shape[0]
    # represent O x as kernel vectors: (O x)_g = C A^{g^t} x = conj(y^* Z^g v) with Z = A^*
    rs = rz.rescale_to_strict(np.conj(np.transpose(A, (0, 2, 1))))
    Z = rs.A
    S = rs.S
    Si = np.linalg.inv(S)
    bt = kn.eval_transpose(b, Z)
    at = kn.eval_transpose(a, Z)
    # (O x)_i has y = S^* x-dependent part: conj(C_i A^{g^t} x) = x^* (A^*)^g C_i^*
    # so (O x)_i = K{A^*, x, C_i^*}; after similarity y' = S^* x, v' = S^{-1} C_i^*
    v_b = Si @ C[0].conj()
    v_a = Si @ C[1].conj()
    u = bt @ v_b + at @ v_a
    Q = kn.stein(Z, Z, np.outer(u, u.conj()))
    E = S @ Q @ S.conj().T
    E = (E + E.conj().T) / 2
    Wh, Wih = _linalg.psd_sqrt(W)
    return float(np.linalg.norm(Wih @ E @ Wih, 2))


def truncation_order(rs: list[rz.FMRealization], N: int, target: float = 1e-14, max_words: int = 2_000_000) -> tuple[int, float]:
    """Series order M and a bound on the error of Gram symbols up to length N.

    Entries of the symbol of ``r(R)^* r(R)`` computed from coefficients of
    length <= M drop ``sum_{|u| > M-N} conj(r_{u g}) r_u``, which by
    Cauchy-Schwarz is at most the exact tail energy beyond ``M - N``.
    """
    d = rs[0].d
    M = N + 4
    while True:
        tail = sum(rz.tail_energy(r, M - N) for r in rs)
        if tail <= target or num_words(d, M + 1) > max_words:
            return M, tail
        M += 1


def coefficient_defect(b: rz.FMRealization, a: rz.FMRealization, N: int) -> tuple[float, float, int]:
    """max over |x|,|y| <= N of |<L^x 1, (a^*a + b^*b) L^y 1> - delta_xy| with tail bound."""
    M, tail = truncation_order([b, a], N)
    t = ft.gram_symbol_vector(b.d, b.coeff_vector(M), N) + ft.gram_symbol_vector(a.d, a.coeff_vector(M), N)
    T = ft.toeplitz_from_symbol(t, N).M
    defect = float(np.max(np.abs(T - np.eye(T.shape[0]))))
    return defect, tail, M


def verify_column(b: rz.FMRealization, a: rz.FMRealization, N: int = 4, tol: float = 1e-8) -> ColumnReport:
    b = rz.minimize(b)
    a = rz.minimize(a)
    if a.d != b.d:
        raise ValueError("alphabet mismatch")
    try:
        iso, coiso = _colligation_defects(b, a)
    except (np.linalg.LinAlgError, NotPure, NCRatError):
        iso, coiso = float("inf"), float("inf")
    coef, tail, M = coefficient_defect(b, a, N)
    if tail > tol:
        raise OrderExceeded(f"tail bound {tail:.3g} exceeds tolerance {tol:g}")
    passed = iso <= tol and coiso <= tol and coef + tail <= tol
    return ColumnReport(iso, coiso, coef, tail, N, bool(passed))
