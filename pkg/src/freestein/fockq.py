"""Truncated q-deformed and mixed q-deformed Fock spaces.

Vectors are stored in tensor coordinates: a list whose entry ``d`` is an
array of shape ``(n,) * d`` holding the coefficients of
``e_{i_1} (x) ... (x) e_{i_d}`` (entry 0 is the vacuum coefficient).  The
left creation operator prepends a letter; the annihilation operator of
generator ``j`` removes the letter at position ``k`` when it equals ``j``,
with weight ``q_{j i_1} ... q_{j i_{k-1}}`` (``q^(k-1)`` in the single
parameter case).  Vacuum moments only need these two maps.  The deformed
inner product ``<u, v> = sum_d u_d^T G_d v_d`` uses Gram matrices obtained
from ``<e_j (x) w, v> = <w, l_j^* v>``, i.e. ``G_d = stack_j G_{d-1} L_j``
with ``L_j`` the annihilation matrix from degree ``d`` to ``d - 1``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from .ncpoly import NCPoly, difference_quotient

BASIS_LIMIT = 2_000_000
DENSE_LIMIT = 4096
ORACLE_MAX_LEN = 12
DEFAULT_DEPTH = {1: 8, 2: 6, 3: 5}


class FockError(ValueError):
    """Invalid deformation parameters, depth violations or budget overflow."""


def _as_qmatrix(n, q):
    Q = np.asarray(q, dtype=float)
    if Q.ndim == 0:
        Q = np.full((n, n), float(Q))
    if Q.shape != (n, n):
        raise FockError(f"Q must be {n}x{n}")
    return Q


@dataclass(eq=False)
class QFockSpace:
    """Fock space truncated at tensor degree ``depth``.

    ``Q`` holds the pairwise deformation weights; the single-parameter space
    has ``Q = q * ones``.
    """

    n: int
    Q: np.ndarray
    depth: int
    q: float = None
    _gram: Dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def mixed(self) -> bool:
        return self.q is None

    @property
    def dims(self) -> List[int]:
        return [self.n**d for d in range(self.depth + 1)]

    # ---- vectors -------------------------------------------------------
    def vacuum(self) -> List[np.ndarray]:
        return [np.ones(())]

    def zero(self) -> List[np.ndarray]:
        return [np.zeros((self.n,) * d) for d in range(self.depth + 1)]

    def create(self, j: int, v):
        """``l(e_j) v`` (letters are 1-based); degrees above ``depth`` are dropped.

        Vectors are lists of per-degree blocks; a shorter list means the
        missing top degrees vanish.
        """
        n = self.n
        out = [np.zeros(())]
        for d in range(min(len(v), self.depth)):
            blk = np.zeros((n,) * (d + 1))
            blk[j - 1] = v[d]
            out.append(blk)
        return out

    def annihilate(self, j: int, v):
        """``l(e_j)^* v`` by the contraction formula."""
        w = self.Q[j - 1]
        out = [_annihilate_block(v[d], j - 1, w, d) for d in range(1, len(v))]
        return out or [np.zeros(())]

    def x(self, j: int, v, cap: int = None):
        """``x_j v = (l_j + l_j^*) v``, keeping degrees ``<= cap``."""
        a, b = self.create(j, v), self.annihilate(j, v)
        out = [p + (b[d] if d < len(b) else 0.0) for d, p in enumerate(a)]
        if cap is not None:
            out = out[: cap + 1]
        return out

    def apply_word(self, word: Sequence[int], v=None):
        """``x_{w_1} ... x_{w_m} v`` (rightmost letter acts first)."""
        v = self.vacuum() if v is None else v
        for j in reversed(tuple(word)):
            v = self.x(j, v)
        return v

    def apply_poly(self, p: NCPoly, v=None):
        if p.n_vars != self.n:
            raise FockError("polynomial and Fock space have different numbers of variables")
        out = [np.zeros(())]
        for w, c in p.terms.items():
            u = self.apply_word(w, v)
            if len(u) > len(out):
                out = out + [np.zeros((self.n,) * d) for d in range(len(out), len(u))]
            for d, t in enumerate(u):
                out[d] = out[d] + c * t
        return out

    # ---- inner product ---------------------------------------------------
    def gram(self, d: int) -> np.ndarray:
        """Gram matrix of degree ``d`` in the word basis (C order)."""
        if d < 0 or d > self.depth:
            raise FockError(f"degree {d} outside 0..{self.depth}")
        if d in self._gram:
            return self._gram[d]
        if self.n**d > DENSE_LIMIT:
            raise FockError(f"degree-{d} Gram matrix exceeds the dense budget")
        if d == 0:
            G = np.ones((1, 1))
        else:
            prev = self.gram(d - 1)
            G = np.vstack([prev @ annihilation_matrix(self, j, d) for j in range(1, self.n + 1)])
            G = 0.5 * (G + G.T)
            try:
                cholesky(G, lower=True)
            except LinAlgError:
                raise FockError(f"Gram matrix of degree {d} is not positive definite") from None
        self._gram[d] = G
        return G

    def inner(self, u, v, upto: int = None) -> float:
        """``<u, v>`` in the deformed inner product (degrees ``<= upto``)."""
        top = min(len(u), len(v)) - 1
        if upto is not None:
            top = min(top, upto)
        s = 0.0
        for d in range(top + 1):
            a, b = u[d].reshape(-1), v[d].reshape(-1)
            if not (np.any(a) and np.any(b)):
                continue
            s += float(a @ self.gram(d) @ b)
        return s


def _annihilate_block(block, jj, w, d):
    # sum_k w[i_1]...w[i_{k-1}] * block[i_1..i_{k-1}, jj, i_{k+1}..]
    out = np.zeros((block.shape[0],) * (d - 1)) if d > 1 else np.zeros(())
    if not np.any(block):
        return out
    n = block.shape[0]
    for k in range(d):
        piece = np.take(block, jj, axis=k)
        for a in range(k):
            shape = [1] * (d - 1)
            shape[a] = n
            piece = piece * w.reshape(shape)
        out = out + piece
    return out


def annihilation_matrix(fock: QFockSpace, j: int, d: int) -> np.ndarray:
    """Matrix of ``l_j^*`` from degree ``d`` to ``d - 1`` in word coordinates."""
    n = fock.n
    eye = np.eye(n**d).reshape((n**d,) + (n,) * d)
    cols = [_annihilate_block(eye[k], j - 1, fock.Q[j - 1], d).reshape(-1) for k in range(n**d)]
    return np.array(cols).T


def creation_matrix(n: int, j: int, d: int) -> np.ndarray:
    """Matrix of ``l_j`` from degree ``d`` to ``d + 1``."""
    m = n**d
    C = np.zeros((n * m, m))
    C[(j - 1) * m + np.arange(m), np.arange(m)] = 1.0
    return C


def annihilation_via_gram(fock: QFockSpace, j: int, d: int) -> np.ndarray:
    """``l_j^*`` on degree ``d`` as the deformed adjoint ``G_{d-1}^{-1} C^T G_d``."""
    C = creation_matrix(fock.n, j, d - 1)
    return np.linalg.solve(fock.gram(d - 1), C.T @ fock.gram(d))


def gram_direct(fock: QFockSpace, d: int) -> np.ndarray:
    """Gram matrix by summing over permutations (``d <= 6``).

    ``<e_w, e_v> = sum_{sigma : v = w o sigma} prod_{inversions (a, b)} q_{w_sigma(a) w_sigma(b)}``.
    """
    if d > 6:
        raise FockError("direct permutation sum limited to d <= 6")
    n = fock.n
    words = list(itertools.product(range(n), repeat=d))
    index = {w: i for i, w in enumerate(words)}
    G = np.zeros((len(words), len(words)))
    perms = list(itertools.permutations(range(d)))
    inv = [[(a, b) for a in range(d) for b in range(a + 1, d) if s[a] > s[b]] for s in perms]
    for w in words:
        i = index[w]
        for s, pairs in zip(perms, inv):
            v = tuple(w[s[k]] for k in range(d))
            wt = 1.0
            for a, b in pairs:
                wt *= fock.Q[w[s[a]], w[s[b]]]
            G[i, index[v]] += wt
    return G


def build_fock(n: int, q: float, depth: int = None) -> QFockSpace:
    """q-deformed Fock space with ``n`` generators truncated at ``depth``."""
    q = float(q)
    if not -1 < q < 1:
        raise FockError("q must lie in (-1, 1)")
    return _build(n, _as_qmatrix(n, q), depth, q)


def build_mixed(Q, depth: int = None) -> QFockSpace:
    """Mixed q-deformed Fock space for a symmetric matrix ``Q``."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise FockError("Q must be a square matrix")
    if not np.allclose(Q, Q.T, atol=1e-15, rtol=0):
        raise FockError("Q must be symmetric")
    if np.any(np.abs(Q) >= 1):
        raise FockError("entries of Q must lie in (-1, 1)")
    if np.any((Q**2).sum(axis=0) >= 1):
        raise FockError("need sum_i q_ij^2 < 1 for every j")
    return _build(Q.shape[0], Q, depth, None)


def _build(n, Q, depth, q):
    if n < 1:
        raise FockError("need at least one generator")
    depth = DEFAULT_DEPTH.get(n, 4) if depth is None else int(depth)
    if depth < 2:
        raise FockError("depth must be at least 2")
    if sum(n**d for d in range(depth + 1)) > BASIS_LIMIT:
        raise FockError("basis exceeds 2e6 words")
    fock = QFockSpace(n=n, Q=Q, depth=depth, q=q)
    # validate positivity on the cheap low degrees
    d = 0
    while d <= depth and n**d <= 256:
        fock.gram(d)
        d += 1
    return fock


# ---------------------------------------------------------------------------
# moments


def vacuum_moment(fock: QFockSpace, word: Sequence[int]) -> float:
    """``<x_{w_1} ... x_{w_m} Omega, Omega>``; exact for ``m <= depth``."""
    word = tuple(word)
    if len(word) > fock.depth:
        raise FockError("word longer than the truncation depth")
    if any(i < 1 or i > fock.n for i in word):
        raise FockError("letter out of range")
    return float(fock.apply_word(word)[0][()])


def vacuum_moments(fock: QFockSpace, max_len: int = None) -> Dict[Tuple[int, ...], float]:
    """All vacuum moments of words up to ``max_len`` by a shared suffix tree."""
    max_len = fock.depth if max_len is None else int(max_len)
    if max_len > fock.depth:
        raise FockError("max_len exceeds the truncation depth")
    out = {(): 1.0}

    def walk(suffix, vec, budget):
        if budget == 0:
            return
        for j in range(1, fock.n + 1):
            # later letters lower the degree by at most budget - 1
            nv = fock.x(j, vec, cap=budget - 1)
            w = (j,) + suffix
            out[w] = float(nv[0][()])
            walk(w, nv, budget - 1)

    walk((), fock.vacuum(), max_len)
    return out


def q_moment_oracle(n: int, q, word: Sequence[int]) -> float:
    """Sum over letter-compatible pair partitions of products of crossing weights.

    ``q`` is a scalar or a symmetric ``n x n`` matrix; a crossing between a
    pair of letter ``a`` and a pair of letter ``b`` contributes ``q_ab``.
    """
    word = tuple(word)
    if len(word) > ORACLE_MAX_LEN:
        raise FockError(f"oracle limited to words of length <= {ORACLE_MAX_LEN}")
    if len(word) % 2:
        return 0.0
    Q = _as_qmatrix(n, q)
    m = len(word)

    def rec(free, pairs):
        if not free:
            return 1.0
        a = free[0]
        total = 0.0
        for idx in range(1, len(free)):
            b = free[idx]
            if word[a] != word[b]:
                continue
            wt = 1.0
            # pairs opened earlier cross (a, b) iff exactly one end lies inside
            for c, e in pairs:
                if c < a < e < b:
                    wt *= Q[word[c] - 1, word[a] - 1]
            total += wt * rec(free[1:idx] + free[idx + 1:], pairs + ((a, b),))
        return total

    return float(rec(tuple(range(m)), ()))


# ---------------------------------------------------------------------------
# Stein kernels


@dataclass(frozen=True)
class HSKernelOp:
    """Operator diagonal in the word basis: ``e_w -> weights[d][w] e_w``."""

    weights: Tuple[np.ndarray, ...]
    closed_form_sq: float
    truncated_sq: float

    def apply(self, v):
        return [w * b for w, b in zip(self.weights, v)]


def _word_weights(fock, j):
    # prod_k q_{j w_k} per word, degree by degree
    w = fock.Q[j - 1]
    out = [np.ones(())]
    for d in range(1, fock.depth + 1):
        out.append(np.multiply.outer(out[-1], w))
    return out


def xi_q(fock: QFockSpace) -> HSKernelOp:
    """``Xi_q = sum_d q^d pi_d`` with its squared distance to ``pi_0``.

    The truncated value is ``sum_{d=1}^{depth} q^(2d) n^d``; the closed form
    ``q^2 n / (1 - q^2 n)`` is ``inf`` when ``q^2 n >= 1``.
    """
    if fock.mixed:
        raise FockError("xi_q needs a single-parameter space; use xi_mixed")
    q, n = fock.q, fock.n
    r = q * q * n
    weights = tuple(np.full((n,) * d, q**d) for d in range(fock.depth + 1))
    trunc = float(sum(r**d for d in range(1, fock.depth + 1)))
    closed = r / (1 - r) if r < 1 else float("inf")
    return HSKernelOp(weights, closed, trunc)


def xi_mixed(fock: QFockSpace, j: int) -> HSKernelOp:
    """``Xi_j``: scalar ``q_{j i_1} ... q_{j i_d}`` on each multiset block."""
    Qj = float((fock.Q[:, j - 1] ** 2).sum())
    weights = tuple(_word_weights(fock, j))
    trunc = float(sum(Qj**d for d in range(1, fock.depth + 1)))
    closed = Qj / (1 - Qj) if Qj < 1 else float("inf")
    return HSKernelOp(weights, closed, trunc)


def kernel_family(fock: QFockSpace) -> List[HSKernelOp]:
    """Diagonal blocks ``A_jj`` of the Stein kernel (``A_jk = 0`` for ``j != k``)."""
    if fock.mixed:
        return [xi_mixed(fock, j) for j in range(1, fock.n + 1)]
    xi = xi_q(fock)
    return [xi] * fock.n


def discrepancy_bound(fock: QFockSpace, truncated: bool = False) -> float:
    """``(sum_j ||A_jj - 1 (x) 1||^2)^(1/2)``, an upper bound on ``Sigma*(X | V_1)``."""
    ks = kernel_family(fock)
    return float(np.sqrt(sum(k.truncated_sq if truncated else k.closed_form_sq for k in ks)))


def hs_pairing(fock: QFockSpace, A: HSKernelOp, eta) -> float:
    """``<A, eta>`` for a tensor ``eta = sum c a (x) b`` under ``a (x) b -> <., b* Omega> a Omega``."""
    total = 0.0
    for (a, b), c in eta.terms.items():
        u = A.apply(fock.apply_word(b[::-1]))
        v = fock.apply_word(a)
        total += np.conj(c) * fock.inner(u, v, upto=min(len(a), len(b)))
    return float(np.real(total))


def stein_identity_residual(fock: QFockSpace, p: NCPoly, j: int, kernels=None) -> float:
    """``|<x_j, p(X)> - sum_k <A_jk, d_k p(X)>|`` with ``A`` block diagonal."""
    if p.degree + 1 > fock.depth:
        raise FockError("polynomial degree too large for the truncation depth")
    ks = kernel_family(fock) if kernels is None else kernels
    pv = fock.apply_poly(p)
    # <x_j Omega, p(X) Omega> = coefficient of e_j since G_1 is the identity
    lhs = float(np.real(pv[1][j - 1])) if len(pv) > 1 else 0.0
    rhs = hs_pairing(fock, ks[j - 1], difference_quotient(p, j))
    return abs(lhs - rhs)
