"""Szegő kernel vectors, Stein solves and the compressed de Branges–Rovnyak model.

Conventions
-----------
Inner products are linear in the second slot.  The kernel vector
``K{Z, y, v}`` is the Fock-space element with ``<K{Z,y,v}, f> = y^* f(Z) v``,
so its coefficient at ``w`` is ``conj(y^* Z^w v)`` and

    <K{Z,y,v}, K{W,x,u}> = y^* K(Z,W)[v u^*] x,   K(Z,W)[P] = sum_w Z^w P W^{w*}.

For a minimal FM realization ``(A, B, C, D)`` of ``b`` the vectors
``L^{a*} b^t`` (``a`` nonempty) are ``O x`` with ``(O x)_g = C A^{g^t} x``.
Backward shifts act as ``L_k^* O x = O A_k x`` and evaluation at 0 is
``C x``.  The de Branges–Rovnyak norm on this span is ``x^* P x`` where P is
the minimal solution of the Riccati equation

    P - sum_j A_j^* P A_j = C^* C + N N^* / g,
    N = sum_j A_j^* P B_j + C^* D,   g = 1 - |D|^2 - sum_j B_j^* P B_j,

and ``g`` is the squared value at 0 of the Sarason outer function.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import mpmath
import numpy as np

from . import _linalg
from . import realize as rz
from .errors import NotContractive, NotPure
from .freecore import FreeSeries, Word, words

log = logging.getLogger(__name__)

STEIN_RTOL = 1e-12
CRITICAL_MARGIN = 1e-3
MP_MAX_STATES = 4
MP_DPS = 40
INNER_TOL = 1e-10


# ------------------------------------------------------------------ Stein


def stein(Z: np.ndarray, W: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Solve Q - sum_j Z_j Q W_j^* = P, the Szegő kernel block K(Z, W)[P]."""
    Z = np.asarray(Z, dtype=complex)
    W = np.asarray(W, dtype=complex)
    P = np.asarray(P, dtype=complex)
    if Z.shape[1] and W.shape[1]:
        rho = _linalg.spectral_radius(_linalg.cp_matrix(Z, W)) if Z.shape[1] * W.shape[1] <= 1600 else None
        if rho is not None and rho >= 1.0:
            raise NotContractive(f"kernel map has spectral radius {rho:.6g} >= 1")
    Q = _linalg.solve_stein(Z, W, P)
    res = _linalg.stein_residual(Z, W, P, Q)
    if res > STEIN_RTOL:
        # one step of iterative refinement
        R = P - (Q - _linalg.apply_cp(Z, Q, W))
        Q = Q + _linalg.solve_stein(Z, W, R)
    return Q


# ---------------------------------------------------------- kernel vectors


@dataclass(frozen=True, eq=False)
class KernelPoint:
    """The Fock-space vector K{Z, y, v}."""

    Z: np.ndarray
    y: np.ndarray
    v: np.ndarray

    @property
    def d(self) -> int:
        return self.Z.shape[0]

    def coeff(self, w: Word) -> complex:
        return complex(np.conj(self.y.conj() @ rz.word_matrix(self.Z, w) @ self.v))

    def coeffs(self, N: int) -> FreeSeries:
        return FreeSeries(self.d, N, {w: self.coeff(w) for w in words(self.d, N)})

    def backward_shift(self, k: int) -> "KernelPoint":
        """L_k^* K{Z,y,v} = K{Z, Z_k^* y, v}."""
        return KernelPoint(self.Z, self.Z[k - 1].conj().T @ self.y, self.v)

    def backward_word(self, alpha: Word) -> "KernelPoint":
        """L_{a_n}^* ... L_{a_1}^* applied letter by letter."""
        y = self.y
        for k in alpha:
            y = self.Z[k - 1].conj().T @ y
        return KernelPoint(self.Z, y, self.v)

    def right_adjoint(self, G_at_Z: np.ndarray) -> "KernelPoint":
        """(M^R_G)^* K{Z,y,v} = K{Z, y, G(Z) v} given the value G(Z)."""
        return KernelPoint(self.Z, self.y, G_at_Z @ self.v)


def h2_pairing(p: KernelPoint, q: KernelPoint) -> complex:
    """<K{Z,y,v}, K{W,x,u}> in the Fock space."""
    Q = stein(p.Z, q.Z, np.outer(p.v, q.v.conj()))
    return complex(p.y.conj() @ Q @ q.y)


@dataclass(frozen=True, eq=False)
class KernelRep:
    """b^t written as a kernel vector at a strict row contraction."""

    point: KernelPoint
    S: np.ndarray
    descriptor: rz.DescriptorRealization
    margin: float


def kernel_rep(b: rz.FMRealization) -> KernelRep:
    """Represent b^t as K{Z, y, v} with Z a strict row contraction.

    With a descriptor ``(A, c_b, c)`` of b, ``b^t = K{A^*, c, c_b}``; a joint
    similarity then makes the tuple strictly contractive.
    """
    desc = rz.minimize_descriptor(rz.descriptor_from_fm(b))
    Zs = np.conj(np.transpose(desc.A, (0, 2, 1)))
    try:
        res = rz.rescale_to_strict(Zs)
    except NotPure:
        raise
    S = res.S
    Si = np.linalg.inv(S) if S.size else S
    y = S.conj().T @ desc.c
    v = Si @ desc.b
    return KernelRep(KernelPoint(res.A, y, v), S, desc, res.margin)


def eval_transpose(r: rz.FMRealization, Z: np.ndarray) -> np.ndarray:
    """Value of r^t at Z."""
    return rz.transpose(rz.descriptor_from_fm(r)).eval(Z)


def dbr_kernel_pairing(b: rz.FMRealization, p: KernelPoint, q: KernelPoint) -> complex:
    """<K^b{Z,y,v}, K^b{W,x,u}>_b = y^* (K(Z,W)[v u^*] - K(Z,W)[b^t(Z) v u^* b^t(W)^*]) x."""
    bz = eval_transpose(b, p.Z)
    bw = eval_transpose(b, q.Z)
    P1 = np.outer(p.v, q.v.conj())
    P2 = np.outer(bz @ p.v, (bw @ q.v).conj())
    Q = stein(p.Z, q.Z, P1 - P2)
    return complex(p.y.conj() @ Q @ q.y)


def smirnov_pairing(b: rz.FMRealization, a: rz.FMRealization | None, p: KernelPoint, q: KernelPoint) -> complex:
    """de Branges–Rovnyak inner product of two Fock kernel vectors.

    Uses ``<f, g>_b = <f, g> + <a(R)^{-*} b(R)^* f, a(R)^{-*} b(R)^* g>`` with
    ``a`` the Sarason function; ``(M^R_G)^* K{Z,y,v} = K{Z, y, G(Z) v}`` turns
    both terms into Stein solves.  With ``a = None`` (inner b) only the Fock
    term remains, which is correct on the model space.
    """
    base = h2_pairing(p, q)
    if a is None:
        return base
    return base + h2_pairing(_phi(b, a, p), _phi(b, a, q))


def _phi(b: rz.FMRealization, a: rz.FMRealization, p: KernelPoint) -> KernelPoint:
    at = eval_transpose(a, p.Z)
    bt = eval_transpose(b, p.Z)
    return KernelPoint(p.Z, p.y, np.linalg.solve(at, bt @ p.v))


# ---------------------------------------------------------------- Riccati


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    P: np.ndarray
    gamma: float
    N: np.ndarray
    W: np.ndarray
    gamma_h2: float
    residual: float
    iterations: int
    critical: bool
    refined: bool
    closed_loop_radius: float


def observability_gramian(r: rz.FMRealization) -> np.ndarray:
    """W with W - sum_j A_j^* W A_j = C^* C (Fock norm of O x is x^* W x)."""
    AH = np.conj(np.transpose(r.A, (0, 2, 1)))
    W = stein(AH, AH, np.outer(r.C.conj(), r.C))
    return (W + W.conj().T) / 2


def _riccati_terms(r: rz.FMRealization, P: np.ndarray):
    A, B, C, D = r.A, r.B, r.C, r.D
    N = np.einsum("jba,bc,jc->a", A.conj(), P, B) + C.conj() * D
    g = 1.0 - abs(D) ** 2 - float(np.real(np.einsum("ja,ab,jb->", B.conj(), P, B)))
    return N, g


def riccati_residual(r: rz.FMRealization, P: np.ndarray, N=None, g=None) -> float:
    if N is None:
        N, g = _riccati_terms(r, P)
    AH = np.conj(np.transpose(r.A, (0, 2, 1)))
    R = P - _linalg.apply_cp(AH, P, AH) - np.outer(r.C.conj(), r.C) - np.outer(N, N.conj()) / g
    return float(np.linalg.norm(R) / max(1.0, np.linalg.norm(P)))


def _newton_step(r: rz.FMRealization, P: np.ndarray):
    N, g = _riccati_terms(r, P)
    if g <= 0:
        raise NotContractive(f"defect {g:.3g} <= 0 during Riccati iteration")
    K = N.conj() / g
    Ahat = r.A + np.einsum("ja,b->jab", r.B, K)
    Chat = r.C + r.D * K
    Q = np.outer(Chat.conj(), Chat) - np.outer(K.conj(), K)
    AH = np.conj(np.transpose(Ahat, (0, 2, 1)))
    Pn = _linalg.solve_stein(AH, AH, Q)
    return (Pn + Pn.conj().T) / 2, Ahat


def solve_riccati(r: rz.FMRealization, *, maxiter: int = 200) -> RiccatiSolution:
    """Minimal solution by Newton (policy) iteration started at the Fock Gramian."""
    n = r.n
    W = observability_gramian(r)
    _, g0 = _riccati_terms(r, W)
    if n == 0:
        return RiccatiSolution(W, g0, np.zeros(0), W, g0, 0.0, 0, False, False, 0.0)
    if g0 < -INNER_TOL:
        raise NotContractive(f"Fock norm of b exceeds 1 (defect {g0:.3g})")
    if g0 <= INNER_TOL:
        # inner symbol: the model norm is the Fock norm
        N, _ = _riccati_terms(r, W)
        return RiccatiSolution(W, g0, N, W, g0, 0.0, 0, False, False, _linalg.cp_radius(r.A))
    P = W
    best = (riccati_residual(r, P), P)
    prev = np.inf
    it = 0
    for it in range(1, maxiter + 1):
        try:
            Pn, _ = _newton_step(r, P)
        except (NotContractive, np.linalg.LinAlgError):
            break
        step = float(np.linalg.norm(Pn - P))
        P = Pn
        try:
            res = riccati_residual(r, P)
        except ZeroDivisionError:
            break
        if np.isfinite(res) and res < best[0]:
            best = (res, P)
        if step <= 1e-15 * max(1.0, np.linalg.norm(P)) or (it > 8 and step >= prev):
            break
        prev = step
    P = best[1]
    N, g = _riccati_terms(r, P)
    if g <= 0:
        raise NotContractive(f"Riccati defect {g:.3g} <= 0")
    K = N.conj() / g
    rho = _linalg.cp_radius(r.A + np.einsum("ja,b->jab", r.B, K))
    critical = rho > 1 - CRITICAL_MARGIN
    refined = False
    if critical and n <= MP_MAX_STATES:
        P = _refine_mp(r, P)
        refined = True
        N, g = _riccati_terms(r, P)
    res = riccati_residual(r, P, N, g)
    eig = np.linalg.eigvalsh(P)
    if eig[0] <= 0:
        raise NotContractive(f"Gram matrix has eigenvalue {eig[0]:.3g}")
    return RiccatiSolution(P, g, N, W, g0, res, it, critical, refined, rho)


def _refine_mp(r: rz.FMRealization, P0: np.ndarray, dps: int = MP_DPS, maxiter: int = 400) -> np.ndarray:
    """Newton iteration in extended precision.

    At a boundary zero of the outer factor the minimal solution is a double
    root, so double precision only reaches about 1e-8.  Newton still
    converges linearly here, and extended arithmetic recovers full accuracy.
    """
    n, d = r.n, r.d
    with mpmath.workdps(dps):
        mpc = mpmath.mpc
        A = [mpmath.matrix([[mpc(x) for x in row] for row in r.A[j]]) for j in range(d)]
        B = [mpmath.matrix([mpc(x) for x in r.B[j]]) for j in range(d)]
        C = mpmath.matrix([[mpc(x) for x in r.C]])
        D = mpc(r.D)
        P = mpmath.matrix([[mpc(x) for x in row] for row in P0])
        eye = mpmath.eye(n)
        tol = mpmath.mpf(10) ** (-(dps - 8))
        for _ in range(maxiter):
            N = C.H * D
            for j in range(d):
                N += A[j].H * P * B[j]
            g = 1 - abs(D) ** 2
            for j in range(d):
                g -= (B[j].H * P * B[j])[0].real
            if g <= 0:
                break
            K = N.H / g
            Ah = [A[j] + B[j] * K for j in range(d)]
            Ch = C + D * K
            Q = Ch.H * Ch - K.H * K
            M = mpmath.eye(n * n)
            for j in range(d):
                At = Ah[j].T
                AhH = Ah[j].H
                for a in range(n):
                    for b in range(n):
                        blk = At[a, b]
                        if blk == 0:
                            continue
                        for c in range(n):
                            for e in range(n):
                                M[a * n + c, b * n + e] -= blk * AhH[c, e]
            q = mpmath.matrix([Q[c, a] for a in range(n) for c in range(n)])
            try:
                x = mpmath.lu_solve(M, q)
            except ZeroDivisionError:
                break
            Pn = mpmath.matrix(n, n)
            for a in range(n):
                for c in range(n):
                    Pn[c, a] = x[a * n + c]
            Pn = (Pn + Pn.H) / 2
            step = mpmath.mnorm(Pn - P, 1)
            P = Pn
            if step < tol:
                break
        del eye
        return np.array([[complex(P[i, j]) for j in range(n)] for i in range(n)])


# -------------------------------------------------------------- GramSpace


@dataclass(frozen=True, eq=False)
class GramSpace:
    """Compressed de Branges–Rovnyak model on the span of L^{a*} b^t.

    ``basis`` lists pivot words; basis vector ``a`` is ``L_{a_n}^* ... L_{a_1}^* b^t``
    with state ``V[:, i]``.  Coordinates refer to this basis.
    """

    b: rz.FMRealization
    basis: list[Word]
    V: np.ndarray
    G: np.ndarray
    Xmat: np.ndarray
    bt_coords: np.ndarray
    k0_coords: np.ndarray
    k0_functional: np.ndarray
    bb_coords: np.ndarray
    bb_norm_sq: float
    a0_squared: float
    riccati: RiccatiSolution = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def inner(self, x: np.ndarray, y: np.ndarray) -> complex:
        return complex(x.conj() @ self.G @ y)

    def adjoint(self, M: np.ndarray) -> np.ndarray:
        """Adjoint of a coordinate matrix in the G inner product."""
        return np.linalg.solve(self.G, M.conj().T @ self.G)

    def to_json(self) -> dict:
        def c(a):
            a = np.asarray(a, dtype=complex)
            return np.stack([a.real, a.imag], axis=-1).tolist()

        return {
            "dim": self.dim,
            "basis": [list(w) for w in self.basis],
            "G": c(self.G),
            "Xmat": c(self.Xmat),
            "bt_coords": c(self.bt_coords),
            "k0_coords": c(self.k0_coords),
            "k0_functional": c(self.k0_functional),
            "bb_norm_sq": self.bb_norm_sq,
            "a0_squared": self.a0_squared,
            "riccati_residual": self.riccati.residual,
            "critical": self.riccati.critical,
        }


def pivot_basis(r: rz.FMRealization, tol: float = rz.DEFAULT_RANK_TOL) -> tuple[list[Word], np.ndarray]:
    """Greedy degree-lex choice of words whose states x_a span the reachable space."""
    n, d = r.n, r.d
    chosen: list[Word] = []
    cols: list[np.ndarray] = []
    Q = np.zeros((n, 0), dtype=complex)
    ref = max(np.linalg.norm(r.B), 1e-300)
    level = [((j,), r.B[j - 1]) for j in range(1, d + 1)]
    while level and len(chosen) < n:
        grew = []
        for w, x in level:
            res = x - Q @ (Q.conj().T @ x)
            res = res - Q @ (Q.conj().T @ res)
            nr = np.linalg.norm(res)
            if nr > tol * ref * max(1.0, np.linalg.norm(x) / ref):
                chosen.append(w)
                cols.append(x)
                Q = np.hstack([Q, (res / nr)[:, None]])
                grew.append((w, x))
                if len(chosen) == n:
                    break
        if not grew:
            break
        level = [(w + (k,), r.A[k - 1] @ x) for w, x in grew for k in range(1, d + 1)]
    V = np.stack(cols, axis=1) if cols else np.zeros((n, 0), dtype=complex)
    return chosen, V


def build_gram_space(b: rz.FMRealization) -> GramSpace:
    b = rz.minimize(b)
    ric = solve_riccati(b)
    P, g, N = ric.P, ric.gamma, ric.N
    basis, V = pivot_basis(b)
    if V.shape[1] != b.n:
        raise NotContractive(f"state space not spanned by shifted symbol ({V.shape[1]} of {b.n})")
    Vi = np.linalg.inv(V) if b.n else V
    G = V.conj().T @ P @ V
    G = (G + G.conj().T) / 2
    Xmat = np.einsum("ab,jbc,cd->jad", Vi, b.A, V) if b.n else np.zeros((b.d, 0, 0))
    if b.n and g > INNER_TOL:
        w = N / g
        bt_coords = Vi @ np.linalg.solve(P, w)
        k0_coords = Vi @ np.linalg.solve(P, b.C.conj())
        bb_coords = (Vi @ b.B.T).T
    elif b.n:
        # inner symbol: b^t is orthogonal to the model space
        bt_coords = np.zeros(b.n, dtype=complex)
        k0_coords = Vi @ np.linalg.solve(P, b.C.conj())
        bb_coords = (Vi @ b.B.T).T
    else:
        bt_coords = k0_coords = np.zeros(0, dtype=complex)
        bb_coords = np.zeros((b.d, 0), dtype=complex)
    k0_functional = b.C @ V
    bb = float(np.real(np.einsum("ja,ab,jb->", b.B.conj(), P, b.B)))
    return GramSpace(b, basis, V, G, Xmat, bt_coords, k0_coords, k0_functional, bb_coords, bb, g, ric)


def rank2_defect_residual(gs: GramSpace) -> float:
    """|| sum_j X_j^{*G} X_j - I + P0K0 (K0 pairing) + a0^2 (bt projection) ||."""
    r = gs.dim
    if r == 0:
        return 0.0
    lhs = sum(gs.adjoint(X) @ X for X in gs.Xmat)
    k = gs.k0_coords
    u = gs.bt_coords
    # rank-one maps  x -> k <k, x>_G  and  x -> u <u, x>_G
    Pk = np.outer(k, k.conj() @ gs.G)
    Pu = np.outer(u, u.conj() @ gs.G)
    R = lhs - np.eye(r) + Pk + gs.a0_squared * Pu
    return float(np.linalg.norm(R, 2))


def weak_purity_profile(gs: GramSpace, levels: int) -> np.ndarray:
    """sum_{|w| = k} ||X^w b^t||_b^2 for k = 1..levels (b^t projected to the model)."""
    out = []
    M = np.outer(gs.bt_coords, gs.bt_coords.conj())
    for _ in range(levels):
        M = np.einsum("jab,bc,jdc->ad", gs.Xmat, M, gs.Xmat.conj())
        out.append(float(np.real(np.trace(gs.G @ M))))
    return np.array(out)


# ------------------------------------------------- independent Gram checks


@dataclass(frozen=True, eq=False)
class StateKernels:
    """Model-space functions ``O x`` written as kernel vectors ``K{A^*, x, C^*}``."""

    Z: np.ndarray
    S: np.ndarray
    v: np.ndarray

    def point(self, x: np.ndarray) -> KernelPoint:
        return KernelPoint(self.Z, self.S.conj().T @ x, self.v)


def state_kernels(b: rz.FMRealization) -> StateKernels:
    res = rz.rescale_to_strict(np.conj(np.transpose(b.A, (0, 2, 1))))
    return StateKernels(res.A, res.S, np.linalg.solve(res.S, b.C.conj()))


def _zero_point(d: int) -> KernelPoint:
    return KernelPoint(np.zeros((d, 1, 1), dtype=complex), np.zeros(1, dtype=complex), np.zeros(1, dtype=complex))


def _transpose_point(r: rz.FMRealization) -> KernelPoint:
    if r.n == 0:
        # constant: r^t = r(0), i.e. K{0, 1, conj r(0)}
        return KernelPoint(np.zeros((r.d, 1, 1), dtype=complex), np.ones(1, dtype=complex), np.array([np.conj(r.D)]))
    return kernel_rep(r).point


def _unit_pairing(p: KernelPoint) -> complex:
    """<p, 1> = conj(p_0) = y^* v."""
    return complex(p.y.conj() @ p.v)


def smirnov_shift_pairing(b: rz.FMRealization, a: rz.FMRealization, h: KernelPoint, g: KernelPoint, j: int) -> complex:
    """<h, L_j g>_b from kernel data only.

    Uses ``b(R)^* L_j g = L_j b(R)^* g + beta 1`` with ``beta = <L_j^* b^t, g>`` and
    ``a(R)^{-*}(L_j k + beta 1) = L_j a(R)^{-*} k + gamma 1`` with
    ``gamma = (beta - <L_j^* a^t, a(R)^{-*} k>) / conj(a(0))``.
    """
    bt = _transpose_point(b).backward_shift(j)
    at = _transpose_point(a).backward_shift(j)
    beta = h2_pairing(bt, g)
    phi_g = _phi(b, a, g)
    phi_h = _phi(b, a, h)
    gamma = (beta - h2_pairing(at, phi_g)) / np.conj(a.D)
    fock = h2_pairing(h.backward_shift(j), g)
    model = h2_pairing(phi_h.backward_shift(j), phi_g) + gamma * _unit_pairing(phi_h)
    return complex(fock + model)


@dataclass(frozen=True)
class GramChecks:
    gram_residual: float
    adjoint_residual: float
    bt_norm_residual: float
    bt_norm_sq: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def gram_checks(gs: GramSpace, a: rz.FMRealization) -> GramChecks:
    """Compare the Riccati model against the Smirnov pairing.

    * ``gram_residual``: max |G - <O V e_k, O V e_l>_b|.
    * ``adjoint_residual``: for basis functions g, h and each letter j,
      |<X_j h, g>_G - (<h, L_j g>_b - <L_j^* b^t, g>_b <h, b^t>_b)|.
    * ``bt_norm_residual``: | ||b^t||_b^2 - (1/a(0)^2 - 1) |.
    """
    b = gs.b
    bt = _transpose_point(b)
    nbt = smirnov_pairing(b, a, bt, bt).real
    bt_res = abs(nbt - (1.0 / gs.a0_squared - 1.0))
    if gs.dim == 0:
        return GramChecks(0.0, 0.0, bt_res, nbt)
    sk = state_kernels(b)
    pts = [sk.point(gs.V[:, i]) for i in range(gs.dim)]
    G2 = np.array([[smirnov_pairing(b, a, p, q) for q in pts] for p in pts])
    scale = max(1.0, float(np.abs(gs.G).max()))
    gram_res = float(np.abs(G2 - gs.G).max()) / scale
    adj = 0.0
    for j in range(1, b.d + 1):
        XG = gs.G @ gs.Xmat[j - 1]
        bbj = bt.backward_shift(j)
        for k, h in enumerate(pts):
            hb = smirnov_pairing(b, a, h, bt)
            for l, g in enumerate(pts):
                rhs = smirnov_shift_pairing(b, a, h, g, j) - smirnov_pairing(b, a, bbj, g) * hb
                lhs = np.conj(XG[l, k])
                adj = max(adj, abs(lhs - rhs))
    return GramChecks(gram_res, float(adj) / scale, float(bt_res), float(nbt))
