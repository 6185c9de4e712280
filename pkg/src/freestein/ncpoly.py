"""Noncommutative polynomials, cyclic derivatives and free difference quotients.

Words are tuples of variable indices in ``1..n_vars``; the empty word is the
constant monomial.  Tensors ``a (x) b`` live in ``P (x) P^op``, so

    (a (x) b)(c (x) d) = (a c) (x) (d b),     (a (x) b) # c = a c b,

which makes ``#`` an algebra action: ``(eta zeta) # c = eta # (zeta # c)``.
With this product the free difference quotient obeys

    d_j(p q) = (1 (x) q) d_j p + (p (x) 1) d_j q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np

Word = Tuple[int, ...]
SA_TOL = 1e-12
TANGENT_MARGIN = 1e-10


class NCPolyError(ValueError):
    """Mismatched variables, bad indices or malformed input."""


def _clean(terms) -> Dict:
    return {w: complex(c) for w, c in terms.items() if c != 0}


def _accumulate(pairs) -> Dict:
    out: Dict = {}
    for w, c in pairs:
        out[w] = out.get(w, 0.0) + c
    return _clean(out)


@dataclass(frozen=True, eq=False)
class NCPoly:
    """Finite sum of words with complex coefficients."""

    n_vars: int
    terms: Dict[Word, complex] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_vars < 1:
            raise NCPolyError("n_vars must be positive")
        clean = {}
        for w, c in self.terms.items():
            w = tuple(int(i) for i in w)
            if any(i < 1 or i > self.n_vars for i in w):
                raise NCPolyError(f"word {w} uses an index outside 1..{self.n_vars}")
            if c != 0:
                clean[w] = clean.get(w, 0) + complex(c)
        object.__setattr__(self, "terms", _clean(clean))

    # constructors
    @classmethod
    def var(cls, j: int, n_vars: int) -> "NCPoly":
        return cls(n_vars, {(j,): 1.0})

    @classmethod
    def const(cls, c, n_vars: int) -> "NCPoly":
        return cls(n_vars, {(): c})

    @classmethod
    def zero(cls, n_vars: int) -> "NCPoly":
        return cls(n_vars, {})

    @property
    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def _check(self, other):
        if self.n_vars != other.n_vars:
            raise NCPolyError("polynomials have different numbers of variables")

    def __add__(self, other):
        if not isinstance(other, NCPoly):
            other = NCPoly.const(other, self.n_vars)
        self._check(other)
        return NCPoly(self.n_vars, _accumulate(list(self.terms.items()) + list(other.terms.items())))

    __radd__ = __add__

    def __neg__(self):
        return NCPoly(self.n_vars, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, NCPoly):
            return mul(self, other)
        return NCPoly(self.n_vars, {w: c * other for w, c in self.terms.items()})

    def __rmul__(self, other):
        return NCPoly(self.n_vars, {w: other * c for w, c in self.terms.items()})

    def __pow__(self, k: int):
        out = NCPoly.const(1.0, self.n_vars)
        for _ in range(int(k)):
            out = mul(out, self)
        return out

    def __eq__(self, other):
        if not isinstance(other, NCPoly):
            return NotImplemented
        return self.n_vars == other.n_vars and _close(self.terms, other.terms)

    def __hash__(self):
        return id(self)

    def star(self) -> "NCPoly":
        """Adjoint: reverse every word and conjugate its coefficient."""
        return NCPoly(self.n_vars, {w[::-1]: np.conj(c) for w, c in self.terms.items()})

    def is_self_adjoint(self, tol: float = 0.0) -> bool:
        return _close(self.terms, self.star().terms, tol)

    def __repr__(self):
        if not self.terms:
            return f"NCPoly(n_vars={self.n_vars}, 0)"
        parts = [f"{_fmt(c)}*{_word_str(w)}" for w, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0]))]
        return f"NCPoly(n_vars={self.n_vars}, " + " + ".join(parts) + ")"


@dataclass(frozen=True, eq=False)
class NCPolyTensor:
    """Element of ``P (x) P^op``: a map ``(a, b) -> coefficient``."""

    n_vars: int
    terms: Dict[Tuple[Word, Word], complex] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", _clean(dict(self.terms)))

    @classmethod
    def one(cls, n_vars: int) -> "NCPolyTensor":
        return cls(n_vars, {((), ()): 1.0})

    @classmethod
    def zero(cls, n_vars: int) -> "NCPolyTensor":
        return cls(n_vars, {})

    @classmethod
    def simple(cls, p: NCPoly, q: NCPoly) -> "NCPolyTensor":
        """``p (x) q``."""
        if p.n_vars != q.n_vars:
            raise NCPolyError("factors have different numbers of variables")
        return cls(p.n_vars, _accumulate(((a, b), ca * cb) for a, ca in p.terms.items()
                                         for b, cb in q.terms.items()))

    @property
    def degree(self) -> int:
        return max((len(a) + len(b) for a, b in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other):
        if self.n_vars != other.n_vars:
            raise NCPolyError("tensors have different numbers of variables")
        return NCPolyTensor(self.n_vars, _accumulate(list(self.terms.items()) + list(other.terms.items())))

    def __neg__(self):
        return NCPolyTensor(self.n_vars, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, NCPolyTensor):
            if self.n_vars != other.n_vars:
                raise NCPolyError("tensors have different numbers of variables")
            return NCPolyTensor(self.n_vars, _accumulate(
                ((a + c, d + b), x * y)
                for (a, b), x in self.terms.items()
                for (c, d), y in other.terms.items()))
        return NCPolyTensor(self.n_vars, {k: c * other for k, c in self.terms.items()})

    def __rmul__(self, other):
        return NCPolyTensor(self.n_vars, {k: other * c for k, c in self.terms.items()})

    def __eq__(self, other):
        if not isinstance(other, NCPolyTensor):
            return NotImplemented
        return self.n_vars == other.n_vars and _close(self.terms, other.terms)

    def __hash__(self):
        return id(self)

    def flip(self) -> NCPoly:
        """Multiplication map ``a (x) b -> b a`` (links ``d_j`` to ``D_j``)."""
        return NCPoly(self.n_vars, _accumulate((b + a, c) for (a, b), c in self.terms.items()))

    def __repr__(self):
        parts = [f"{_fmt(c)}*{_word_str(a)}(x){_word_str(b)}" for (a, b), c in sorted(self.terms.items())]
        return f"NCPolyTensor(n_vars={self.n_vars}, " + (" + ".join(parts) or "0") + ")"


@dataclass(frozen=True)
class TensorMatrix:
    """Square matrix of tensors, e.g. the Jacobian ``(d_j p_i)_{ij}``."""

    entries: Tuple[Tuple[NCPolyTensor, ...], ...]

    def __post_init__(self):
        n = len(self.entries)
        if any(len(row) != n for row in self.entries):
            raise NCPolyError("tensor matrix must be square")
        nv = {e.n_vars for row in self.entries for e in row}
        if len(nv) > 1:
            raise NCPolyError("tensor matrix entries have different numbers of variables")

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        return (isinstance(other, TensorMatrix) and self.size == other.size
                and all(a == b for ra, rb in zip(self.entries, other.entries) for a, b in zip(ra, rb)))


def _close(a: Dict, b: Dict, tol: float = 1e-12) -> bool:
    keys = set(a) | set(b)
    return all(abs(a.get(k, 0) - b.get(k, 0)) <= tol for k in keys)


def _fmt(c):
    c = complex(c)
    return f"{c.real:g}" if c.imag == 0 else f"({c.real:g}{c.imag:+g}j)"


def _word_str(w):
    return "1" if not w else "".join(f"t{i}" for i in w)


# ---------------------------------------------------------------------------
# calculus


def mul(p: NCPoly, q: NCPoly) -> NCPoly:
    """Product by concatenation of words."""
    p._check(q)
    return NCPoly(p.n_vars, _accumulate((a + b, x * y) for a, x in p.terms.items()
                                        for b, y in q.terms.items()))


def _check_index(p, j):
    if not 1 <= j <= p.n_vars:
        raise NCPolyError(f"index {j} outside 1..{p.n_vars}")


def _splits(w: Word, j: int):
    for k, i in enumerate(w):
        if i == j:
            yield w[:k], w[k + 1:]


def cyclic_derivative(p: NCPoly, j: int) -> NCPoly:
    """``D_j``: each occurrence ``a t_j b`` of ``t_j`` in a word gives ``b a``."""
    _check_index(p, j)
    return NCPoly(p.n_vars, _accumulate((b + a, c) for w, c in p.terms.items() for a, b in _splits(w, j)))


def cyclic_gradient(p: NCPoly) -> Tuple[NCPoly, ...]:
    return tuple(cyclic_derivative(p, j) for j in range(1, p.n_vars + 1))


def difference_quotient(p: NCPoly, j: int) -> NCPolyTensor:
    """``d_j``: each occurrence ``a t_j b`` gives ``a (x) b``."""
    _check_index(p, j)
    return NCPolyTensor(p.n_vars, _accumulate(((a, b), c) for w, c in p.terms.items()
                                              for a, b in _splits(w, j)))


def jacobian(P: Sequence[NCPoly]) -> TensorMatrix:
    """Matrix with entry ``(i, j) = d_j p_i``."""
    P = tuple(P)
    n = len(P)
    if n == 0 or any(p.n_vars != n for p in P):
        raise NCPolyError("jacobian needs an n-tuple of polynomials in n variables")
    return TensorMatrix(tuple(tuple(difference_quotient(p, j) for j in range(1, n + 1)) for p in P))


def r_norm(p: NCPoly, R: float) -> float:
    """``||p||_R = sum_m |c_m| R^deg(m)``."""
    if not R > 0:
        raise NCPolyError("R must be positive")
    return float(sum(abs(c) * R ** len(w) for w, c in p.terms.items()))


def gibbs_potential(n_vars: int, rho: float = 1.0) -> NCPoly:
    """``V_rho = (rho / 2) sum_j t_j^2``."""
    return NCPoly(n_vars, {(j, j): 0.5 * rho for j in range(1, n_vars + 1)})


def power_sum(n_vars: int, k: int, coeff: float = 1.0) -> NCPoly:
    """``coeff * sum_j t_j^k``."""
    return NCPoly(n_vars, {(j,) * k: coeff for j in range(1, n_vars + 1)})


# ---------------------------------------------------------------------------
# evaluation on matrices


class MatrixTuple(tuple):
    """Tuple of equal-size self-adjoint matrices (entrywise tolerance 1e-12)."""

    def __new__(cls, mats: Iterable, tol: float = SA_TOL):
        mats = [np.asarray(m, dtype=complex) for m in mats]
        if not mats:
            raise NCPolyError("empty matrix tuple")
        k = mats[0].shape
        if len(k) != 2 or k[0] != k[1]:
            raise NCPolyError("operands must be square matrices")
        for m in mats:
            if m.shape != k:
                raise NCPolyError("operands have different sizes")
            if np.max(np.abs(m - m.conj().T), initial=0.0) > tol:
                raise NCPolyError("operand is not self-adjoint")
        return super().__new__(cls, mats)

    @property
    def dim(self) -> int:
        return self[0].shape[0]


def random_selfadjoint(n: int, k: int, rng=None, scale: float = 1.0) -> MatrixTuple:
    """GUE-like tuple of ``n`` self-adjoint ``k x k`` matrices."""
    rng = np.random.default_rng(rng)
    out = []
    for _ in range(n):
        a = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        out.append(scale * (a + a.conj().T) / (2 * np.sqrt(k)))
    return MatrixTuple(out)


def _as_tuple(X, n_vars):
    if not isinstance(X, MatrixTuple):
        X = MatrixTuple(X)
    if len(X) != n_vars:
        raise NCPolyError(f"need {n_vars} matrices, got {len(X)}")
    return X


def _word_evaluator(X):
    k = X.dim
    memo = {(): np.eye(k, dtype=complex)}

    def ev(w):
        if w not in memo:
            memo[w] = ev(w[:-1]) @ X[w[-1] - 1]
        return memo[w]

    return ev


def eval_poly(p: NCPoly, X) -> np.ndarray:
    """``p(X)`` for a tuple of matrices."""
    X = _as_tuple(X, p.n_vars)
    ev = _word_evaluator(X)
    out = np.zeros((X.dim, X.dim), dtype=complex)
    for w, c in p.terms.items():
        out += c * ev(w)
    return out


def eval_tensor_sharp(eta: NCPolyTensor, X, c) -> np.ndarray:
    """``eta # c`` with ``(a (x) b) # c = a(X) c b(X)``."""
    X = _as_tuple(X, eta.n_vars)
    c = np.asarray(c, dtype=complex)
    if c.shape != (X.dim, X.dim):
        raise NCPolyError("matrix c has the wrong shape")
    ev = _word_evaluator(X)
    out = np.zeros_like(c)
    for (a, b), coef in eta.terms.items():
        out += coef * (ev(a) @ c @ ev(b))
    return out


def trace_state(m) -> complex:
    """Normalized trace ``Tr(m) / k``."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NCPolyError("trace_state needs a square matrix")
    return complex(np.trace(m) / m.shape[0])


@dataclass(frozen=True)
class TangentReport:
    lhs: float
    rhs: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs


def tangent_inequality_check(f: NCPoly, A, B) -> TangentReport:
    """Compare ``tau(f(A))`` with the tangent ``tau(f(B)) + sum_j tau(D_j f(B) (A_j - B_j))``.

    Convexity of ``f`` is the caller's responsibility.
    """
    if not f.is_self_adjoint(1e-14):
        raise NCPolyError("f must be self-adjoint")
    A = _as_tuple(A, f.n_vars)
    B = _as_tuple(B, f.n_vars)
    if A.dim != B.dim:
        raise NCPolyError("tuples have different matrix sizes")
    lhs = trace_state(eval_poly(f, A)).real
    rhs = trace_state(eval_poly(f, B)).real
    for j, g in enumerate(cyclic_gradient(f)):
        rhs += trace_state(eval_poly(g, B) @ (A[j] - B[j])).real
    return TangentReport(lhs=float(lhs), rhs=float(rhs), holds=bool(lhs >= rhs - TANGENT_MARGIN))


# ---------------------------------------------------------------------------
# text format: one term per line, "re im i1 i2 ..."


def to_text(p: NCPoly) -> str:
    lines = [f"# n_vars {p.n_vars}"]
    for w, c in sorted(p.terms.items(), key=lambda t: (len(t[0]), t[0])):
        lines.append(" ".join([repr(float(c.real)), repr(float(c.imag))] + [str(i) for i in w]))
    return "\n".join(lines) + "\n"


def from_text(text: str, n_vars: int = None) -> NCPoly:
    terms = []
    declared = None
    for ln, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            parts = s[1:].split()
            if len(parts) == 2 and parts[0] == "n_vars":
                declared = int(parts[1])
            continue
        parts = s.split()
        if len(parts) < 2:
            raise NCPolyError(f"line {ln}: expected 're im word...'")
        try:
            c = complex(float(parts[0]), float(parts[1]))
            w = tuple(int(i) for i in parts[2:])
        except ValueError as exc:
            raise NCPolyError(f"line {ln}: {exc}") from None
        terms.append((w, c))
    n = n_vars or declared or max((max(w) for w, _ in terms if w), default=1)
    return NCPoly(n, _accumulate(terms))
