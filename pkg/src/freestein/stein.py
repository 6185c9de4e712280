"""One-dimensional free Stein kernels and the free Stein discrepancy.

A kernel ``A(x, y)`` for ``mu`` relative to ``V_rho = rho t^2 / 2`` satisfies

    rho * int x P(x) dmu(x) = int int A(x, y) P~(x, y) dmu(x) dmu(y)

for every polynomial ``P``, where ``P~`` is the free difference quotient.
Only the test polynomials ``x, x^2, ..., x^(d+1)`` are imposed, so the
minimal ``||A - 1||`` over kernels of bidegree ``<= d`` is a lower bound for
the discrepancy, nondecreasing in ``d``.

Since ``P~`` for ``P = x^m`` is ``sum_{i+j=m-1} x^i y^j``, which already has
bidegree ``<= d``, the minimiser ``B = A - 1`` lies in the span of the
``P~_m`` and is found from the ``(d+1) x (d+1)`` Gram system of those
functions in ``L^2(mu x mu)``.  All moments are taken in the scaled variable
``x / R`` with ``R`` the support radius.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import measure as _m
from .measure import Measure1D

RIDGE = 1e-10
COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-8
MAX_DEGREE = 10


class SteinError(ArithmeticError):
    """Constraint system too ill-conditioned at the requested degree."""

    def __init__(self, msg, degree=None):
        super().__init__(msg)
        self.degree = degree


def dq_eval(P, x, y, scale: float = None):
    """Free difference quotient of ``P = sum_k P[k] t^k`` at ``(x, y)``.

    ``(P(x) - P(y)) / (x - y)`` off the diagonal and the divided-difference
    sum ``sum_k P[k] sum_{i+j=k-1} x^i y^j`` when ``|x - y| < 1e-8 * scale``
    (``P'(x)`` on the diagonal).

    Examples
    --------
    >>> float(dq_eval([0, 0, 1], 2.0, 3.0))
    5.0
    >>> float(dq_eval([0, 0, 0, 1], 2.0, 2.0))
    12.0
    """
    P = np.asarray(P, dtype=float)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x, y = np.broadcast_arrays(x, y)
    if scale is None:
        scale = max(1.0, float(np.max(np.abs(x), initial=0.0)), float(np.max(np.abs(y), initial=0.0)))
    close = np.abs(x - y) < 1e-8 * scale
    out = np.empty(x.shape)
    far = ~close
    if far.any():
        pv = np.polynomial.polynomial.polyval
        out[far] = (pv(x[far], P) - pv(y[far], P)) / (x[far] - y[far])
    if close.any():
        xc, yc = x[close], y[close]
        acc = np.zeros(xc.shape)
        for k in range(1, P.size):
            if P[k] == 0.0:
                continue
            acc += P[k] * sum(xc**i * yc ** (k - 1 - i) for i in range(k))
        out[close] = acc
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class DifferenceQuotientEval:
    """Callable ``(x, y) -> P~(x, y)`` for a fixed coefficient list."""

    coeffs: tuple

    def __call__(self, x, y):
        return dq_eval(self.coeffs, x, y)


@dataclass(frozen=True)
class SteinKernel1D:
    """Least-norm free Stein kernel ``A(x, y) = sum c[i, j] x^i y^j``.

    ``residuals[k-1]`` is the violation of the constraint for ``P = x^k``,
    normalized by ``R^(k-1)`` with ``R`` the support radius.
    """

    degree: int
    coeffs: np.ndarray
    residuals: np.ndarray
    discrepancy_lb: float
    rho: float = 1.0
    scale: float = 1.0
    ridge_used: float = 0.0
    condition: float = field(default=float("nan"))

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return np.polynomial.polynomial.polyval2d(x, y, self.coeffs)

    def as_dict(self):
        return {
            "degree": self.degree,
            "rho": self.rho,
            "coeffs": self.coeffs.tolist(),
            "residuals": self.residuals.tolist(),
            "discrepancy": self.discrepancy_lb,
            "ridge_used": self.ridge_used,
            "condition": self.condition,
        }


def _dq_pattern(m, d):
    # coefficient matrix of (x^m)~ = sum_{i+j=m-1} x^i y^j
    E = np.zeros((d + 1, d + 1))
    i = np.arange(m)
    E[i, m - 1 - i] = 1.0
    return E


def _hankel(tau, d):
    i = np.arange(d + 1)
    return tau[i[:, None] + i[None, :]]


def _pair(C, E, T):
    # <sum C_ij x^i y^j, sum E_ab x^a y^b> in L^2(mu x mu)
    return float(np.sum(C * (T @ E @ T)))


def estimate_kernel(mu: Measure1D, degree: int, ridge: float = RIDGE,
                    rho: float = 1.0) -> SteinKernel1D:
    """Least-norm Stein kernel of bidegree ``degree`` for ``mu`` relative to ``V_rho``.

    Parameters
    ----------
    mu : Measure1D
        Centered law.
    degree : int
        ``1 <= degree <= 10``; constraints for ``x, ..., x^(degree+1)``.
    ridge : float
        Tikhonov weight used only when the Gram matrix has condition number
        above ``1e12``.
    rho : float
        Potential ``V_rho``; ``rho = 1`` is the unit semicircle.

    Raises
    ------
    ValueError
        If ``mu`` is not centered or the degree is out of range.
    SteinError
        If the constraints cannot be met to ``1e-8`` at this degree.
    """
    d = int(degree)
    if not 1 <= d <= MAX_DEGREE:
        raise ValueError(f"degree must be between 1 and {MAX_DEGREE}")
    if not rho > 0:
        raise ValueError("rho must be positive")
    lo, hi = mu.support
    R = max(abs(lo), abs(hi))
    if not R > 0:
        raise ValueError("measure is a point mass at 0")
    if abs(_m.mean(mu)) > 1e-9 * max(1.0, R):
        raise ValueError("Stein kernels relative to V_rho need a centered measure")

    tau = np.array([_m.moment(mu, k) / R**k for k in range(2 * d + 3)])
    T = _hankel(tau, d)
    Es = [_dq_pattern(m, d) for m in range(1, d + 2)]
    ones = np.zeros((d + 1, d + 1))
    ones[0, 0] = 1.0
    # moment side of the constraints in scaled form, minus the part met by A = 1
    rhs = np.array([rho * R**2 * tau[m + 1] - _pair(ones, E, T) for m, E in zip(range(1, d + 2), Es)])
    TET = [T @ E @ T for E in Es]
    gram = np.array([[float(np.sum(Ea * tb)) for tb in TET] for Ea in Es])
    cond = float(np.linalg.cond(gram))
    used = 0.0
    if np.isfinite(cond) and cond <= COND_LIMIT:
        beta = np.linalg.solve(gram, rhs)
    else:
        used = float(ridge)
        # regularized least squares; exact min-norm on the numerical null space
        beta = np.linalg.solve(gram.T @ gram + used * np.eye(d + 1), gram.T @ rhs)
    B = sum(b * E for b, E in zip(beta, Es))
    resid = np.abs(np.array([float(np.sum(B * tb)) for tb in TET]) - rhs)
    if not np.all(resid <= RESIDUAL_TOL * max(1.0, np.abs(rhs).max())):
        raise SteinError(f"Stein constraints unsolvable to tolerance at degree {d}", d)
    norm2 = float(beta @ gram @ beta)
    i = np.arange(d + 1)
    C = B / R ** (i[:, None] + i[None, :])
    C[0, 0] += 1.0
    return SteinKernel1D(
        degree=d, coeffs=0.5 * (C + C.T), residuals=resid,
        discrepancy_lb=float(np.sqrt(max(norm2, 0.0))), rho=float(rho),
        scale=R, ridge_used=used, condition=cond,
    )


def discrepancy(mu: Measure1D, degree: int, rho: float = 1.0) -> float:
    """Lower bound on the free Stein discrepancy ``Sigma*(mu | V_rho)``."""
    return estimate_kernel(mu, degree, rho=rho).discrepancy_lb


def stein_residuals(mu: Measure1D, kernel: SteinKernel1D, max_power: int = None, order: int = 4):
    """Constraint violations of ``kernel`` by direct quadrature over ``mu x mu``.

    This does not use the moment algebra of :func:`estimate_kernel`: the
    kernel and the difference quotients are evaluated pointwise on product
    quadrature nodes.  Returns absolute violations for ``x, ..., x^max_power``.
    """
    max_power = max_power or kernel.degree + 1
    x, w = mu.quadrature(order=order)
    lhs = np.array([kernel.rho * float(np.dot(w, x ** (k + 1))) for k in range(1, max_power + 1)])
    rhs = np.zeros(max_power)
    step = max(1, 2_000_000 // max(x.size, 1))
    for i in range(0, x.size, step):
        X, Y = np.meshgrid(x[i:i + step], x, indexing="ij")
        W = np.outer(w[i:i + step], w)
        WA = W * kernel(X, Y)
        for k in range(1, max_power + 1):
            P = np.zeros(k + 1)
            P[k] = 1.0
            rhs[k - 1] += float(np.sum(WA * dq_eval(P, X, Y)))
    return np.abs(lhs - rhs)
