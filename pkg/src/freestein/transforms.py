"""Cauchy, Hilbert and logarithmic transforms of :class:`Measure1D`.

The density is the piecewise-linear interpolant of its node values, so every
cell integral against ``1/(z - y)`` or ``log|x - y|`` has a closed form.  On a
cell ``[x0, x1]`` with midpoint ``c``, width ``h``, mean value ``fbar`` and
slope ``s`` write ``w0 = z - x0``, ``w1 = z - x1``, ``wc = z - c`` and
``L = log(w0 / w1)``.  Then::

    int f(y) / (z - y) dy = fbar L + s (wc L - h)

and similar expressions hold for the logarithmic kernel.  ``L`` is evaluated
as ``log1p(h / w1)`` away from the cell, which keeps full relative accuracy
on the very small cells of graded grids where the slope is huge.  On the
real axis the logarithmic singularities of neighbouring cells at a shared
node have opposite coefficients and are dropped together (principal value).
Singular end cells (density ``c/sqrt(y-a)``) and atoms are added in closed
form.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import trapezoid

from .measure import INVSQRT, Measure1D, MeasureError, cheb_grid

_CHUNK = 2_000_000  # matrix entries per block


class TransformError(ValueError):
    """Transform requested at an invalid point."""


class InversionError(RuntimeError):
    """Stieltjes inversion could not produce a probability density."""


def _cells(mu: Measure1D):
    key = "cells"
    if key in mu._cache:
        return mu._cache[key]
    xs, fs = mu.regular_part()
    if xs.size < 2:
        out = None
    else:
        h = np.diff(xs)
        out = dict(x0=xs[:-1], x1=xs[1:], h=h, c=0.5 * (xs[:-1] + xs[1:]),
                   fbar=0.5 * (fs[:-1] + fs[1:]), s=np.diff(fs) / h,
                   ends=(xs[0], fs[0], xs[-1], fs[-1]))
    mu._cache[key] = out
    return out


_NEAR = 2.0  # |w1| <= NEAR * h: evaluate L as a difference of logarithms


def _blocks(n_points, n_nodes):
    step = max(1, _CHUNK // max(n_nodes, 1))
    for i in range(0, n_points, step):
        yield slice(i, min(i + step, n_points))


# ---------------------------------------------------------------------------
# Cauchy transform


def _end_cell_cauchy(side, e, h, c, z):
    # left cell: w = z - a, value (2c/sqrt w) artanh(sqrt(h/w)); right cell is
    # the mirror image with w = b - z and an overall sign flip.
    w = (e - z) if side == 1 else (z - e)
    sw = np.sqrt(w)
    r = np.sqrt(h)
    at = np.arctanh(r / sw)
    g = 2.0 * c * at / sw
    dg = -2.0 * c * (r / (2.0 * w * (w - h)) + at / (2.0 * w * sw))
    if side == 1:
        return -g, dg
    return g, dg


def cauchy(mu: Measure1D, z, derivative: bool = False):
    """Cauchy transform ``G(z) = int dmu(x) / (z - x)`` off the real axis.

    Parameters
    ----------
    mu : Measure1D
    z : complex or array of complex
        Evaluation points with nonzero imaginary part.
    derivative : bool
        Also return ``G'(z)``.

    Returns
    -------
    G or (G, dG)
        Same shape as ``z``.  The transform is that of the stored
        (interpolated) density, computed in closed form cell by cell.
    """
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    if np.any(z.imag == 0):
        raise TransformError("Cauchy transform needs Im z != 0")
    G = np.zeros(z.shape, dtype=complex)
    dG = np.zeros(z.shape, dtype=complex)
    cl = _cells(mu)
    if cl is not None:
        h, fbar, sl_ = cl["h"], cl["fbar"], cl["s"]
        for sl in _blocks(z.size, h.size):
            zr, zi = z.real[sl, None], z.imag[sl, None]
            d1 = zr - cl["x1"]
            m1 = d1 * d1 + zi * zi
            with np.errstate(all="ignore"):
                # delta = h / w1, L = log1p(delta)
                dr, di = h * d1 / m1, -h * zi / m1
                Lr = 0.5 * np.log1p(dr * (2.0 + dr) + di * di)
                Li = np.arctan2(di, 1.0 + dr)
            near = m1 <= (_NEAR * h) ** 2
            if near.any():
                d0 = zr - cl["x0"]
                zin = np.broadcast_to(zi, near.shape)[near]
                a0, a1 = np.broadcast_to(d0, near.shape)[near], d1[near]
                Lr[near] = np.log(np.hypot(a0, zin)) - np.log(np.hypot(a1, zin))
                Li[near] = np.arctan2(zin, a0) - np.arctan2(zin, a1)
            dc = zr - cl["c"]
            # B = wc L - h
            Br = dc * Lr - zi * Li - h
            Bi = dc * Li + zi * Lr
            G[sl] = (Lr @ fbar + Br @ sl_) + 1j * (Li @ fbar + Bi @ sl_)
            if derivative:
                # 1/(w0 w1) = 1/(wc^2 - h^2/4)
                pr = dc * dc - zi * zi - 0.25 * h * h
                pi_ = 2.0 * dc * zi
                pm = pr * pr + pi_ * pi_
                qr, qi = h * pr / pm, -h * pi_ / pm
                # wc * h / (w0 w1)
                tr_, ti = dc * qr - zi * qi, dc * qi + zi * qr
                dG[sl] = (-(qr @ fbar) + (Lr - tr_) @ sl_) + 1j * (-(qi @ fbar) + (Li - ti) @ sl_)
    for side, e, h, c in mu.end_cells():
        g, dg = _end_cell_cauchy(side, e, h, c, z)
        G += g
        dG += dg
    if mu.has_atoms:
        for a, m in mu.atoms:
            G += m / (z - a)
            dG -= m / (z - a) ** 2
    if derivative:
        return G.reshape(shape), dG.reshape(shape)
    return G.reshape(shape)


def cauchy_evaluator(mu: Measure1D, prefer_analytic: bool = True):
    """Return a callable ``z -> (G, G')`` for use by the subordination solvers.

    The closed-form transform attached by family constructors is used when
    available and ``prefer_analytic`` is true, the quadrature otherwise.
    """
    if prefer_analytic and mu.analytic is not None:
        return mu.analytic
    return lambda z: cauchy(mu, z, derivative=True)


# ---------------------------------------------------------------------------
# Hilbert transform


def _end_cell_hilbert(side, e, h, c, x):
    w = (x - e) if side == -1 else (e - x)
    r = np.sqrt(h)
    out = np.empty_like(x)
    neg = w < 0
    s = np.sqrt(np.abs(w))
    with np.errstate(divide="ignore", invalid="ignore"):
        out[neg] = -2.0 * c * np.arctan(r / s[neg]) / s[neg]
        pos = ~neg
        sw = s[pos]
        out[pos] = c * np.log(np.abs((r + sw) / (r - sw))) / sw
    return out if side == -1 else -out


def _log_ratio(x, cl):
    """``log|u0/u1|`` per cell at real points; zero-safe near the nodes."""
    h = cl["h"]
    u1 = x - cl["x1"]
    with np.errstate(all="ignore"):
        L = np.log1p(h / u1)
    near = np.abs(u1) <= _NEAR * h
    if near.any():
        u0 = (x - cl["x0"])
        a0 = np.abs(np.broadcast_to(u0, near.shape)[near])
        a1 = np.abs(u1[near])
        with np.errstate(divide="ignore"):
            l0 = np.where(a0 > 0, np.log(np.where(a0 > 0, a0, 1.0)), 0.0)
            l1 = np.where(a1 > 0, np.log(np.where(a1 > 0, a1, 1.0)), 0.0)
        L[near] = l0 - l1
    return L


def hilbert(mu: Measure1D, x):
    """Principal value ``p.v. int dmu(y) / (x - y)`` at real points.

    Raises
    ------
    TransformError
        If some ``x`` coincides with an atom of ``mu``.
    """
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    if mu.has_atoms and np.any(np.isin(x, mu.atoms[:, 0])):
        raise TransformError("principal value is undefined at an atom")
    H = np.zeros(x.shape)
    cl = _cells(mu)
    if cl is not None:
        h = cl["h"]
        for sl in _blocks(x.size, h.size):
            L = _log_ratio(x[sl, None], cl)
            H[sl] = L @ cl["fbar"] + ((x[sl, None] - cl["c"]) * L - h) @ cl["s"]
        x0, f0, xM, fM = cl["ends"]
        # density jumps at the outer nodes give genuine log singularities
        if f0 != 0.0:
            H[x == x0] = -np.inf
        if fM != 0.0:
            H[x == xM] = np.inf
    for side, e, h, c in mu.end_cells():
        H += _end_cell_hilbert(side, e, h, c, x)
    if mu.has_atoms:
        for a, m in mu.atoms:
            H += m / (x - a)
    return H.reshape(shape)


# ---------------------------------------------------------------------------
# logarithmic potential and energy


def _F(u):
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(au > 0, u * np.log(np.where(au > 0, au, 1.0)), 0.0) - u


def _Q(u):
    # antiderivative of u log|u|
    au = np.abs(u)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(au > 0, 0.5 * u * u * np.log(np.where(au > 0, au, 1.0)), 0.0) - 0.25 * u * u


def _end_cell_log(side, e, h, c, x):
    # int_0^1 log|d - h s^2| ds with d the signed distance into the cell
    d = (x - e) if side == -1 else (e - x)
    alpha = d / h
    K = np.empty_like(alpha)
    pos = alpha >= 0
    b = np.sqrt(alpha[pos])
    K[pos] = _F(b + 1.0) - _F(b - 1.0)
    g = np.sqrt(-alpha[~pos])
    K[~pos] = np.log1p(g * g) - 2.0 + 2.0 * g * np.arctan2(1.0, g)
    return 2.0 * c * np.sqrt(h) * (np.log(h) + K)


def log_potential(mu: Measure1D, x):
    """Logarithmic potential ``U(x) = int log|x - y| dmu(y)``."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    U = np.zeros(x.shape)
    cl = _cells(mu)
    if cl is not None:
        h = cl["h"]
        for sl in _blocks(x.size, h.size):
            xx = x[sl, None]
            u0, u1, uc = xx - cl["x0"], xx - cl["x1"], xx - cl["c"]
            L = _log_ratio(xx, cl)
            au1 = np.abs(u1)
            with np.errstate(divide="ignore", invalid="ignore"):
                lg1 = np.log(np.where(au1 > 0, au1, 1.0))
            # int log|x-y| dy and int (y-c) log|x-y| dy over the cell
            dF = u0 * L + h * (lg1 - 1.0)
            B = 0.5 * L * u0 * u1 - 0.5 * h * uc
            near = au1 <= _NEAR * h
            if near.any():
                a0, a1 = u0[near], u1[near]
                hn = np.broadcast_to(h, near.shape)[near]
                F0, F1 = _F(a0), _F(a1)
                dF[near] = F0 - F1
                B[near] = uc[near] * (F0 - F1) - (_Q(a0) - _Q(a1))
            U[sl] = dF @ cl["fbar"] + B @ cl["s"]
    for side, e, h, c in mu.end_cells():
        U += _end_cell_log(side, e, h, c, x)
    if mu.has_atoms:
        with np.errstate(divide="ignore"):
            for a, m in mu.atoms:
                U += m * np.log(np.abs(x - a))
    return U.reshape(shape)


def log_energy(mu: Measure1D) -> float:
    """Logarithmic energy ``int int log|x - y| dmu(x) dmu(y)``.

    Measures with atoms have energy ``-inf`` (self-interaction of a point
    mass); this is returned as a value rather than raised.

    The inner integral is the exact potential of the interpolated density;
    the outer integral uses Simpson's rule on each cell (the density is
    linear there and the potential is smooth up to ``u^2 log|u|`` terms) and a
    Gauss rule in ``s = sqrt(distance)`` on singular end cells.
    """
    if mu.has_atoms:
        return float("-inf")
    if "log_energy" in mu._cache:
        return mu._cache["log_energy"]
    total = 0.0
    xs, fs = mu.regular_part()
    if xs.size >= 2:
        mid = 0.5 * (xs[:-1] + xs[1:])
        U = log_potential(mu, np.concatenate((xs, mid)))
        Un, Um = U[: xs.size], U[xs.size:]
        h = np.diff(xs)
        fm = 0.5 * (fs[:-1] + fs[1:])
        total += float(np.sum(h / 6.0 * (fs[:-1] * Un[:-1] + 4 * fm * Um + fs[1:] * Un[1:])))
    if mu.end_cells():
        t, w = np.polynomial.legendre.leggauss(24)
        s, w = 0.5 * (t + 1), 0.5 * w
        for side, e, h, c in mu.end_cells():
            y = e - side * h * s * s
            total += float(np.dot(2.0 * c * np.sqrt(h) * w, log_potential(mu, y)))
    mu._cache["log_energy"] = total
    return total


# ---------------------------------------------------------------------------
# Stieltjes inversion

_RICHARDSON = (8.0 / 3.0, -2.0, 1.0 / 3.0)  # weights for eps, 2 eps, 4 eps


def _as_g(G, z):
    out = G(z)
    if isinstance(out, tuple):
        out = out[0]
    return np.asarray(out, dtype=complex)


def inverted_density(G, x, eps, richardson=True):
    """``-Im G(x + i eps) / pi``, optionally Richardson-extrapolated to 0."""
    x = np.asarray(x, dtype=float)
    if not richardson:
        return -_as_g(G, x + 1j * eps).imag / np.pi
    out = np.zeros_like(x)
    for wgt, k in zip(_RICHARDSON, (1, 2, 4)):
        out += wgt * (-_as_g(G, x + 1j * k * eps).imag / np.pi)
    return out


def components(mask):
    """Index ranges ``(i, j)`` of maximal runs of True in a boolean array."""
    m = np.concatenate(([False], np.asarray(mask, bool), [False]))
    d = np.diff(m.astype(int))
    return list(zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1) - 1))


def grid_on_intervals(intervals, n):
    """Chebyshev nodes on disjoint intervals, sharing ``n`` nodes by width."""
    widths = np.array([b - a for a, b in intervals])
    counts = np.maximum(33, np.round(n * widths / widths.sum()).astype(int))
    parts = [cheb_grid(a, b, k) for (a, b), k in zip(intervals, counts)]
    return parts


def stieltjes_invert(G, support, eps: float = 1e-4, n: int = 4001,
                     threshold: float = 1e-10, scan: int = 2001,
                     richardson: bool = True, label: str = "inverted") -> Measure1D:
    """Recover a density from its Cauchy transform.

    Parameters
    ----------
    G : callable
        Herglotz function ``z -> G(z)`` (or ``z -> (G, G')``).
    support : (float, float)
        Interval expected to contain the support.
    eps : float
        Distance from the real axis, in ``[1e-6, 1e-2]``.  With
        ``richardson`` the values at ``eps, 2 eps, 4 eps`` are combined to
        cancel the first two orders of the smoothing bias.
    n : int
        Total number of output nodes.
    threshold : float
        Density level defining the detected support (padded by 1%).

    Raises
    ------
    InversionError
        If the recovered mass before renormalization is off by more than
        1e-3, or the transform looks like that of a point mass.
    """
    if not (1e-6 <= eps <= 1e-2):
        raise TransformError("eps must lie in [1e-6, 1e-2]")
    a, b = map(float, support)
    if not b > a:
        raise TransformError("support hint must be a nondegenerate interval")
    pad = 0.05 * (b - a)
    xs = np.linspace(a - pad, b + pad, scan)
    dens = inverted_density(G, xs, eps, richardson)
    if np.max(dens) * np.pi * eps > 0.05:
        raise InversionError("transform behaves like a point mass near "
                             f"x={xs[np.argmax(dens)]:.6g}; no density to recover")
    runs = components(dens > threshold)
    if not runs:
        raise InversionError("no density detected above threshold")
    step = xs[1] - xs[0]
    ivs = [[xs[i] - step, xs[j] + step] for i, j in runs]
    width = ivs[-1][1] - ivs[0][0]
    for iv in ivs:
        iv[0] -= 0.01 * width
        iv[1] += 0.01 * width
    merged = [ivs[0]]
    for iv in ivs[1:]:
        if iv[0] <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], iv[1])
        else:
            merged.append(iv)
    parts = grid_on_intervals(merged, n)
    grid = np.concatenate(parts)
    dens = np.clip(inverted_density(G, grid, eps, richardson), 0.0, None)
    # separate components with explicit zero-density gaps
    grid, dens = _join_parts(parts, dens)
    mass = float(trapezoid(dens, grid))
    if abs(mass - 1.0) > 1e-3:
        raise InversionError(f"recovered mass {mass:.6g} deviates from 1 by more than 1e-3")
    return Measure1D.build(grid, dens, label=label)


def _join_parts(parts, dens):
    out_g, out_f = [], []
    k = 0
    for p in parts:
        f = dens[k:k + p.size].copy()
        k += p.size
        if len(parts) > 1:
            f[0] = f[-1] = 0.0
        out_g.append(p)
        out_f.append(f)
    g = np.concatenate(out_g)
    f = np.concatenate(out_f)
    keep = np.concatenate(([True], np.diff(g) > 0))
    return g[keep], f[keep]


__all__ = [
    "TransformError", "InversionError", "MeasureError", "cauchy", "cauchy_evaluator",
    "hilbert", "log_potential", "log_energy", "stieltjes_invert", "inverted_density",
]
