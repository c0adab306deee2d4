"""Dense linear-algebra helpers: Stein solves, CP-map matrices, Krylov spans."""

from __future__ import annotations

import numpy as np

from .errors import NotContractive

# Above this many unknowns the Stein equation is solved by fixed-point iteration.
DIRECT_STEIN_LIMIT = 1600


def cp_matrix(Z: np.ndarray, W: np.ndarray | None = None) -> np.ndarray:
    """Matrix of Q -> sum_j Z_j Q W_j^* acting on column-major vec(Q)."""
    W = Z if W is None else W
    return sum(np.kron(W[j].conj(), Z[j]) for j in range(Z.shape[0]))


def spectral_radius(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def cp_radius(A: np.ndarray) -> float:
    """Spectral radius of X -> sum_j A_j X A_j^*."""
    if A.shape[1] == 0:
        return 0.0
    return spectral_radius(cp_matrix(A))


def apply_cp(Z: np.ndarray, Q: np.ndarray, W: np.ndarray) -> np.ndarray:
    return np.einsum("jab,bc,jdc->ad", Z, Q, W.conj())


def solve_stein(Z: np.ndarray, W: np.ndarray, P: np.ndarray, *, maxiter: int = 100000, rtol: float = 1e-14) -> np.ndarray:
    """Solve Q - sum_j Z_j Q W_j^* = P."""
    n, m = P.shape
    if n == 0 or m == 0:
        return np.zeros((n, m), dtype=complex)
    if n * m <= DIRECT_STEIN_LIMIT:
        M = np.eye(n * m) - cp_matrix(Z, W)
        try:
            q = np.linalg.solve(M, P.reshape(-1, order="F"))
        except np.linalg.LinAlgError as exc:
            raise NotContractive(f"Stein operator singular: {exc}") from exc
        return q.reshape((n, m), order="F")
    Q = P.astype(complex).copy()
    term = Q.copy()
    for _ in range(maxiter):
        term = apply_cp(Z, term, W)
        Q += term
        if np.linalg.norm(term) <= rtol * max(np.linalg.norm(Q), 1e-300):
            return Q
    raise NotContractive("Stein fixed-point iteration did not converge")


def stein_residual(Z: np.ndarray, W: np.ndarray, P: np.ndarray, Q: np.ndarray) -> float:
    R = Q - apply_cp(Z, Q, W) - P
    return float(np.linalg.norm(R) / max(np.linalg.norm(Q), 1e-300))


def krylov_span(A: np.ndarray, V0: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis of span{A^w v : v in cols(V0), all words w}.

    Columns are added level by level (breadth first over letters); a new
    direction is kept when its singular value exceeds ``tol * ref`` where
    ``ref`` is the largest singular value seen at the first level.
    """
    n = V0.shape[0]
    if n == 0 or V0.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    ref = np.linalg.norm(V0, 2)
    if ref == 0:
        return np.zeros((n, 0), dtype=complex)
    Q = np.zeros((n, 0), dtype=complex)
    frontier = V0.astype(complex)
    while frontier.shape[1] and Q.shape[1] < n:
        for _ in range(2):  # re-orthogonalize once
            frontier = frontier - Q @ (Q.conj().T @ frontier)
        U, s, _ = np.linalg.svd(frontier, full_matrices=False)
        keep = s > tol * ref
        new = U[:, keep][:, : n - Q.shape[1]]
        if new.shape[1] == 0:
            break
        Q = np.hstack([Q, new])
        frontier = np.hstack([A[j] @ new for j in range(A.shape[0])])
    return Q


def krylov_pivots(A: np.ndarray, V0: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Actual Krylov vectors A^w v spanning the same space as :func:`krylov_span`.

    Vectors are picked greedily, largest residual first, and rescaled by a
    power of two so that exact (for instance dyadic) data stays exact.
    """
    n = V0.shape[0]
    if n == 0 or V0.shape[1] == 0:
        return np.zeros((n, 0), dtype=complex)
    ref = np.linalg.norm(V0, 2)
    if ref == 0:
        return np.zeros((n, 0), dtype=complex)
    Q = np.zeros((n, 0), dtype=complex)
    picked: list[np.ndarray] = []
    frontier = [V0[:, i].astype(complex) for i in range(V0.shape[1])]
    while frontier and Q.shape[1] < n:
        new: list[np.ndarray] = []
        cand = list(frontier)
        while cand and Q.shape[1] < n:
            res = [c - Q @ (Q.conj().T @ c) for c in cand]
            res = [r - Q @ (Q.conj().T @ r) for r in res]
            norms = [np.linalg.norm(r) for r in res]
            k = int(np.argmax(norms))
            if norms[k] <= tol * ref:
                break
            v = cand.pop(k)
            Q = np.hstack([Q, (res[k] / norms[k])[:, None]])
            m = np.max(np.abs(v))
            new.append(v / 2.0 ** np.round(np.log2(m)))
        picked.extend(new)
        frontier = [A[j] @ v for v in new for j in range(A.shape[0])]
    return np.stack(picked, axis=1) if picked else np.zeros((n, 0), dtype=complex)


def psd_sqrt(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian square root and its inverse of a positive definite matrix."""
    w, U = np.linalg.eigh((H + H.conj().T) / 2)
    if np.min(w) <= 0:
        raise np.linalg.LinAlgError("matrix not positive definite")
    r = np.sqrt(w)
    return (U * r) @ U.conj().T, (U / r) @ U.conj().T
