"""Free additive convolution by analytic subordination.

Three solvers share the output machinery:

* :func:`semicircular_flow` (law of ``X + sqrt(t) S``) uses the real-axis
  description of the subordination function: for each ``u`` the point
  ``omega = u + i v`` with ``int dmu(y) / |omega - y|^2 = 1/t`` is mapped to
  ``x = u + t Re G_mu(omega)`` where the density equals ``v / (pi t)``.  This
  gives exact support edges and no smoothing bias.
* :func:`free_add` solves the two-function subordination system
  ``omega_1 = z + h_nu(z + h_mu(omega_1))``, ``h = F - id``, ``F = 1/G``.
* :func:`free_power` solves ``N omega - (N-1) F_mu(omega) = z`` for the
  ``N``-fold free convolution power.

The implicit equations are solved along a path from high in the upper
half-plane down to the real axis: damped fixed-point iteration (factor 0.5)
at the top level, then Newton steps with backtracking at each lower level,
falling back to the damped iteration where Newton fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import entropy as _ent
from . import measure as _m
from .measure import DEFAULT_N, INVSQRT, REGULAR, AnalyticCauchy, Measure1D, cheb_grid, graded_grid
from .transforms import cauchy_evaluator, components

DAMPING = 0.5
FP_TOL = 1e-12
FP_MAXITER = 10_000
EPS_FINAL = 1e-13
DENSITY_FLOOR = 1e-10


class ConvergenceError(RuntimeError):
    """Subordination iteration failed; ``z`` holds the offending points."""

    def __init__(self, msg, z=None):
        super().__init__(msg)
        self.z = z


# ---------------------------------------------------------------------------
# implicit subordination equations


class _Equation:
    """Residual ``Phi(omega, z)`` with derivatives and a fixed-point map."""

    def omega0(self, z):
        return z.copy()

    def residual(self, w, z):  # -> Phi, dPhi/domega
        raise NotImplementedError

    def fp_map(self, w, z):
        raise NotImplementedError

    def admissible(self, w, z):
        return w.imag >= z.imag * (1.0 - 1e-9)


class _FlowEq(_Equation):
    # omega + t G(omega) = z
    def __init__(self, G, t):
        self.G, self.t = G, t

    def residual(self, w, z):
        g, dg = self.G(w)
        return w + self.t * g - z, 1.0 + self.t * dg

    def fp_map(self, w, z):
        return z - self.t * self.G(w)[0]


class _SumEq(_Equation):
    # omega_1 = z + h_nu(z + h_mu(omega_1)),  h = 1/G - id
    def __init__(self, Gm, Gn):
        self.Gm, self.Gn = Gm, Gn

    @staticmethod
    def _h(G, w):
        g, dg = G(w)
        return 1.0 / g - w, -dg / g**2 - 1.0

    def residual(self, w, z):
        hm, dhm = self._h(self.Gm, w)
        w2 = z + hm
        hn, dhn = self._h(self.Gn, w2)
        return w - z - hn, 1.0 - dhn * dhm

    def fp_map(self, w, z):
        hm, _ = self._h(self.Gm, w)
        hn, _ = self._h(self.Gn, z + hm)
        return z + hn

    def admissible(self, w, z):
        w2 = z + self._h(self.Gm, w)[0]
        tol = z.imag * (1.0 - 1e-9)
        return (w.imag >= tol) & (w2.imag >= tol)


class _PowerEq(_Equation):
    # N omega - (N - 1) F(omega) = z
    def __init__(self, G, N):
        self.G, self.N = G, N

    def residual(self, w, z):
        g, dg = self.G(w)
        N = self.N
        return N * w - (N - 1) / g - z, N + (N - 1) * dg / g**2

    def fp_map(self, w, z):
        g, _ = self.G(w)
        return (z + (self.N - 1) / g) / self.N


def _newton(eq, w, z, maxiter=40, tol=1e-14):
    """Newton with backtracking; returns (omega, converged mask)."""
    w = w.copy()
    done = np.zeros(w.shape, bool)
    phi, dphi = eq.residual(w, z)
    for _ in range(maxiter):
        act = ~done
        if not act.any():
            break
        with np.errstate(all="ignore"):
            step = phi[act] / dphi[act]
        wa, za, pa = w[act], z[act], np.abs(phi[act])
        lam = np.ones(wa.shape)
        ok = np.zeros(wa.shape, bool)
        new_w = wa.copy()
        new_phi = phi[act].copy()
        new_dphi = dphi[act].copy()
        for _ in range(30):
            cand = wa - lam * step
            trial = ~ok
            with np.errstate(all="ignore"):
                p, dp = eq.residual(cand[trial], za[trial])
            good = np.isfinite(p) & (cand[trial].imag > 0) & (np.abs(p) <= pa[trial] * (1 - 1e-4 * lam[trial]) + 1e-15 * (1 + np.abs(cand[trial])))
            idx = np.flatnonzero(trial)[good]
            new_w[idx], new_phi[idx], new_dphi[idx] = cand[idx], p[good], dp[good]
            ok[idx] = True
            if ok.all():
                break
            lam[~ok] *= 0.5
        small = np.abs(lam * step) <= tol * (1.0 + np.abs(wa))
        w[act], phi[act], dphi[act] = new_w, new_phi, new_dphi
        fin = small | ~ok
        conv = small & ok | (~ok & (pa <= 1e-13 * (1 + np.abs(wa))))
        sub = np.flatnonzero(act)
        done[sub[fin]] = True
        done[sub[conv]] = True
        # points where backtracking failed but residual is not small stay
        # marked as done; the caller checks the residual
    phi, _ = eq.residual(w, z)
    conv = np.isfinite(phi) & (np.abs(phi) <= 1e-10 * (1.0 + np.abs(w))) & eq.admissible(w, z)
    return w, conv


def _fixed_point(eq, w, z):
    w = w.copy()
    conv = np.zeros(w.shape, bool)
    for _ in range(FP_MAXITER):
        act = ~conv
        if not act.any():
            break
        new = (1 - DAMPING) * w[act] + DAMPING * eq.fp_map(w[act], z[act])
        conv[np.flatnonzero(act)[np.abs(new - w[act]) < FP_TOL * (1 + np.abs(new))]] = True
        w[act] = new
    return w, conv


def solve_subordination(eq: _Equation, z, y_top: float = None, ratio: float = 0.1):
    """Solve ``eq`` at points ``z`` (Im z > 0) by continuation in Im z."""
    z = np.asarray(z, dtype=complex).ravel()
    if np.any(z.imag <= 0):
        raise ValueError("subordination solve needs Im z > 0")
    y_top = max(float(y_top or 1.0), float(z.imag.max()))
    zt = z.real + 1j * y_top
    w, conv = _fixed_point(eq, eq.omega0(zt), zt)
    if not conv.all():
        raise ConvergenceError("damped fixed point did not converge at the top level",
                               zt[~conv])
    w, _ = _newton(eq, w, zt)
    y = y_top
    while True:
        y_next = max(y * ratio, float(z.imag.min()))
        zl = z.real + 1j * np.maximum(y_next, z.imag)
        w_new, conv = _newton(eq, w, zl)
        if not conv.all():
            # retry failing points with a finer path, then the damped map
            bad = np.flatnonzero(~conv)
            wb = w[bad]
            for frac in (0.5, 0.25, 0.125, 0.0625):
                yb = np.maximum(y * (ratio + (1 - ratio) * frac), z.imag[bad])
                wb, _ = _newton(eq, wb, z.real[bad] + 1j * yb)
            wb2, cb = _newton(eq, wb, zl[bad])
            if not cb.all():
                wf, cf = _fixed_point(eq, wb2, zl[bad])
                wf, cb2 = _newton(eq, wf, zl[bad])
                if not (cb2 | cb).all():
                    raise ConvergenceError("subordination failed near the real axis",
                                           zl[bad][~(cb2 | cb)])
                wb2 = np.where(cb, wb2, wf)
            w_new[bad] = wb2
        w = w_new
        y = y_next
        if y <= z.imag.min():
            break
    return w


# ---------------------------------------------------------------------------
# Cauchy transforms of convolution outputs


class _SubordinatedCauchy(AnalyticCauchy):
    """``G(z) = G_mu(omega(z))`` with ``omega`` solved on demand."""

    depth = 1

    def __init__(self, eq, G_outer, scale):
        self.eq, self.G_outer, self.scale = eq, G_outer, scale

    def _domega(self, w, z):
        raise NotImplementedError

    def _solve(self, z):
        # (G, G') at points of the upper half plane
        w = solve_subordination(self.eq, z, y_top=self.scale)
        g, dg = self.G_outer(w)
        return g, dg * self._domega(w, z)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        lower = z.imag < 0
        zz = np.where(lower, z.conj(), z)
        # real-axis requests are served at a tiny positive height
        zz = zz.real + 1j * np.maximum(zz.imag, EPS_FINAL * self.scale)
        g, dg = self._solve(zz)
        g = np.where(lower, g.conj(), g)
        dg = np.where(lower, dg.conj(), dg)
        return g.reshape(shape), dg.reshape(shape)


class FlowCauchy(_SubordinatedCauchy):
    def __init__(self, G, t, scale):
        super().__init__(_FlowEq(G, t), G, scale)
        self.depth = getattr(G, "depth", 0) + 1

    def _domega(self, w, z):
        return 1.0 / self.eq.residual(w, z)[1]


class FreeSumCauchy(_SubordinatedCauchy):
    def __init__(self, Gm, Gn, scale):
        super().__init__(_SumEq(Gm, Gn), Gm, scale)
        self.swapped = _SumEq(Gn, Gm)
        self.depth = max(getattr(Gm, "depth", 0), getattr(Gn, "depth", 0)) + 1

    @staticmethod
    def _domega_of(eq, w, z):
        hm, dhm = _SumEq._h(eq.Gm, w)
        _, dhn = _SumEq._h(eq.Gn, z + hm)
        return (1.0 + dhn) / (1.0 - dhn * dhm)

    def _domega(self, w, z):
        return self._domega_of(self.eq, w, z)

    def _solve(self, z):
        # G = G_mu(omega_1) = G_nu(omega_2).  Inside a spectral gap one of the
        # two subordination functions runs off to infinity, so the system
        # for the other one is tried when the first fails.
        try:
            return super()._solve(z)
        except ConvergenceError:
            eq = self.swapped
            w = solve_subordination(eq, z, y_top=self.scale)
            g, dg = eq.Gm(w)
            return g, dg * self._domega_of(eq, w, z)


class FreePowerCauchy(_SubordinatedCauchy):
    def __init__(self, G, N, scale):
        super().__init__(_PowerEq(G, N), G, scale)
        self.depth = getattr(G, "depth", 0) + 1

    def _domega(self, w, z):
        return 1.0 / self.eq.residual(w, z)[1]


MAX_ANALYTIC_DEPTH = 2


def _evaluator(mu):
    return cauchy_evaluator(mu)


def _attachable(G):
    return G if getattr(G, "depth", 0) <= MAX_ANALYTIC_DEPTH else None


# ---------------------------------------------------------------------------
# density reconstruction from a subordinated transform


def _edge_kind(dens_fn, edge, inward, width):
    """Classify a support edge as square-root-like or inverse-square-root."""
    d = np.array([1e-7, 1e-5]) * width
    f = dens_fn(edge + inward * d)
    if np.all(f > 0) and f[0] > f[1]:
        slope = np.log(f[0] / f[1]) / np.log(d[1] / d[0])
        if 0.3 < slope < 0.7:
            return INVSQRT
    return REGULAR


def _density_from_transform(G, bound, n, label, scan=801):
    """Sample ``-Im G(x + i0)/pi`` on a grid adapted to the support."""
    a, b = bound
    width = b - a
    eps = EPS_FINAL * max(1.0, width)

    def dens(x, e=eps):
        x = np.asarray(x, dtype=float)
        return np.clip(-G(x + 1j * e)[0].imag / np.pi, 0.0, None)

    def inside(x):
        # off the support -Im G is proportional to the height above the axis
        x = np.asarray(x, dtype=float)
        z = np.concatenate((x + 1j * eps, x + 1j * (10 * eps)))
        d = np.clip(-G(z)[0].imag / np.pi, 0.0, None)
        d1, d10 = d[:x.size], d[x.size:]
        return (d1 > thr) & (d1 > 0.5 * d10)

    xs = np.linspace(a, b, scan)
    ds = dens(xs)
    thr = max(DENSITY_FLOOR, 1e-9 * ds.max())
    runs = components(inside(xs))
    if not runs:
        raise ConvergenceError("no absolutely continuous mass found")
    step = xs[1] - xs[0]
    intervals = []
    for i, j in runs:
        lo_out, lo_in = xs[i] - step, xs[i]
        hi_in, hi_out = xs[j], xs[j] + step
        intervals.append([lo_out, lo_in, hi_in, hi_out])
    iv = np.array(intervals)
    # k-section on all edges at once: [outside, inside] brackets, 4 bits per round
    outs = np.concatenate((iv[:, 0], iv[:, 3]))
    ins = np.concatenate((iv[:, 1], iv[:, 2]))
    frac = np.arange(1, 16) / 16.0
    for _ in range(16):
        pts = outs[:, None] + frac[None, :] * (ins - outs)[:, None]
        pos = inside(pts.ravel()).reshape(pts.shape)
        # first inside point walking from the outside end
        k = np.where(pos.any(axis=1), pos.argmax(axis=1), frac.size)
        lo_f = np.where(k > 0, frac[np.maximum(k - 1, 0)], 0.0)
        hi_f = np.where(k < frac.size, frac[np.minimum(k, frac.size - 1)], 1.0)
        outs, ins = outs + lo_f * (ins - outs), outs + hi_f * (ins - outs)
        if np.max(np.abs(ins - outs)) < 1e-15 * max(1.0, width):
            break
    k = len(intervals)
    edges = np.stack((0.5 * (outs[:k] + ins[:k]), 0.5 * (outs[k:] + ins[k:])), axis=1)
    total = float(np.sum(edges[:, 1] - edges[:, 0]))
    parts, kinds = [], []
    for lo, hi in edges:
        w = hi - lo
        kl = _edge_kind(dens, lo, 1.0, w)
        kr = _edge_kind(dens, hi, -1.0, w)
        cnt = max(65, int(round(n * w / total)))
        grid = graded_grid(lo, hi, cnt) if INVSQRT in (kl, kr) else cheb_grid(lo, hi, cnt)
        parts.append(grid)
        kinds.append((kl, kr))
    # only the outermost edges can carry an inverse square-root cell
    grid = np.concatenate(parts)
    f = dens(grid)
    off = 0
    for p, (kl, kr) in zip(parts, kinds):
        sl = slice(off, off + p.size)
        fp = f[sl]
        fp[0] = fp[1] if kl == INVSQRT else 0.0
        fp[-1] = fp[-2] if kr == INVSQRT else 0.0
        f[sl] = fp
        off += p.size
    keep = np.concatenate(([True], np.diff(grid) > 0))
    grid, f = grid[keep], f[keep]
    edge_flags = (kinds[0][0], kinds[-1][1])
    mu = Measure1D.build(grid, f, edges=edge_flags, analytic=_attachable(G), label=label)
    raw = Measure1D.build(grid, f, edges=edge_flags, normalize=True)
    return mu, raw


# ---------------------------------------------------------------------------
# semicircular flow, real-axis parametrization


def _real_G(G, u):
    """Real-axis value of ``G`` and ``G'`` at points outside the support."""
    g, dg = G(np.asarray(u, dtype=float) + 1e-300j)
    return g.real, dg.real


def _pieces(mu: Measure1D):
    """Closed intervals carrying mass: density runs and atoms."""
    out = []
    g, f = mu.grid, mu.density
    if g.size:
        pos = (f[:-1] > 0) | (f[1:] > 0)
        for i, j in components(pos):
            out.append((g[i], g[j + 1]))
    for a in mu.atoms[:, 0]:
        out.append((a, a))
    out.sort()
    merged = []
    for lo, hi in out:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
        else:
            merged.append((lo, hi))
    return merged


def _flow_components(G, mu, t):
    """u-intervals where ``int dmu/(u-y)^2 > 1/t`` (the flow's u-support)."""
    pieces = _pieces(mu)
    inv_t = 1.0 / t

    def phi(u):
        return -_real_G(G, np.atleast_1d(u))[1][0] - inv_t

    span = pieces[-1][1] - pieces[0][0]
    tiny = 1e-13 * max(1.0, span)
    lo_edge = pieces[0][0]
    left = lo_edge - np.sqrt(t) - tiny
    a_edge = lo_edge if phi(lo_edge - tiny) <= 0 else brentq(phi, left, lo_edge - tiny, xtol=1e-15, rtol=1e-15)
    hi_edge = pieces[-1][1]
    right = hi_edge + np.sqrt(t) + tiny
    b_edge = hi_edge if phi(hi_edge + tiny) <= 0 else brentq(phi, hi_edge + tiny, right, xtol=1e-15, rtol=1e-15)
    comps = [[a_edge, None]]
    for (l0, h0), (l1, h1) in zip(pieces[:-1], pieces[1:]):
        g0, g1 = h0 + tiny, l1 - tiny
        if g1 <= g0:
            continue
        res = minimize_scalar(phi, bounds=(g0, g1), method="bounded",
                              options={"xatol": 1e-12 * max(1.0, span)})
        if res.fun >= 0:
            continue
        r0 = h0 if phi(g0) <= 0 else brentq(phi, g0, res.x, xtol=1e-15, rtol=1e-15)
        r1 = l1 if phi(g1) <= 0 else brentq(phi, res.x, g1, xtol=1e-15, rtol=1e-15)
        comps[-1][1] = r0
        comps.append([r1, None])
    comps[-1][1] = b_edge
    return [tuple(c) for c in comps]


def _solve_v(G, u, t, scale):
    """Solve ``-Im G(u+iv)/v = 1/t`` for ``v > 0`` (Newton in log v, bracketed)."""
    lo = np.full(u.shape, np.log(1e-14 * scale))
    hi = np.full(u.shape, 0.5 * np.log(t))
    log_t = np.log(t)

    def F(ell, uu):
        v = np.exp(ell)
        g, dg = G(uu + 1j * v)
        I = -g.imag / v
        with np.errstate(all="ignore"):
            return np.log(I) + log_t, -dg.real / I - 1.0

    f_lo, _ = F(lo, u)
    zero = ~(f_lo > 0)
    ell = np.where(zero, lo, hi - 0.5)
    act = ~zero
    for _ in range(100):
        if not act.any():
            break
        idx = np.flatnonzero(act)
        f, df = F(ell[idx], u[idx])
        up = f > 0
        lo[idx[up]] = ell[idx[up]]
        hi[idx[~up]] = ell[idx[~up]]
        with np.errstate(all="ignore"):
            nxt = ell[idx] - f / df
        bad = ~np.isfinite(nxt) | (nxt <= lo[idx]) | (nxt >= hi[idx])
        nxt[bad] = 0.5 * (lo[idx[bad]] + hi[idx[bad]])
        done = (np.abs(nxt - ell[idx]) < 1e-14) | (hi[idx] - lo[idx] < 1e-14)
        ell[idx] = nxt
        act[idx[done]] = False
    v = np.exp(ell)
    v[zero] = 0.0
    return v


def _biane_flow(mu: Measure1D, t: float, n: int, G=None) -> Measure1D:
    G = G or _evaluator(mu)
    lo, hi = mu.support
    scale = max(1.0, hi - lo, np.sqrt(t))
    comps = _flow_components(G, mu, t)
    widths = np.array([b - a for a, b in comps])
    grids, dens = [], []
    for (a, b), w in zip(comps, widths):
        cnt = max(65, int(round(n * w / widths.sum())))
        u = cheb_grid(a, b, cnt)
        v = np.zeros_like(u)
        v[1:-1] = _solve_v(G, u[1:-1], t, scale)
        inner = v > 0
        x = np.empty_like(u)
        if inner.any():
            x[inner] = u[inner] + t * G(u[inner] + 1j * v[inner])[0].real
        if (~inner).any():
            x[~inner] = u[~inner] + t * _real_G(G, u[~inner])[0]
        grids.append(x)
        dens.append(v / (np.pi * t))
    x = np.concatenate(grids)
    f = np.concatenate(dens)
    order = np.argsort(x, kind="stable")
    x, f = x[order], f[order]
    keep = np.concatenate(([True], np.diff(x) > 1e-15 * scale))
    x, f = x[keep], f[keep]
    return x, f


# ---------------------------------------------------------------------------
# public operations


def _check_atoms(mu):
    if mu.has_atoms and mu.atoms[:, 1].max() > 0.5:
        raise ValueError("inputs with an atom of mass > 1/2 are not supported")


def semicircular_flow(mu: Measure1D, t: float, n: int = DEFAULT_N,
                      method: str = "biane") -> Measure1D:
    """Law of ``X + sqrt(t) S`` with ``S`` semicircular and free from ``X``.

    Parameters
    ----------
    mu : Measure1D
        Law of ``X``.
    t : float
        Variance of the semicircular increment (``t > 0``).
    n : int
        Approximate number of output nodes.
    method : {"biane", "subordination"}
        ``"biane"`` parametrizes the output by the subordination function on
        the real axis (default).  ``"subordination"`` calls :func:`free_add`
        with a semicircle, i.e. the implicit equation solved in the upper
        half-plane.
    """
    t = float(t)
    if not t > 0:
        raise ValueError("flow time must be positive")
    if method == "subordination":
        return free_add(mu, _m.semicircle(0.0, t), n=n)
    if method != "biane":
        raise ValueError(f"unknown flow method {method!r}")
    G = _evaluator(mu)
    x, f = _biane_flow(mu, t, n, G)
    lo, hi = mu.support
    an = _attachable(FlowCauchy(G, t, max(1.0, hi - lo + 4 * np.sqrt(t))))
    return Measure1D.build(x, f, analytic=an,
                           label=f"{mu.label} boxplus semicircle(t={t:g})")


def free_add(mu: Measure1D, nu: Measure1D, n: int = DEFAULT_N) -> Measure1D:
    """Free additive convolution ``mu boxplus nu``.

    Point masses are handled in closed form (translation).  Otherwise the
    subordination system is solved at ``x + i 1e-13`` and the density read
    off from ``-Im G / pi`` on a grid whose support edges are located by
    bisection.
    """
    for p, q in ((mu, nu), (nu, mu)):
        if not p.has_density and p.atoms.shape[0] == 1:
            return _m.translate(q, p.atoms[0, 0]).with_label(f"{q.label} shifted")
    _check_atoms(mu)
    _check_atoms(nu)
    Gm, Gn = _evaluator(mu), _evaluator(nu)
    a = mu.support[0] + nu.support[0]
    b = mu.support[1] + nu.support[1]
    G = FreeSumCauchy(Gm, Gn, max(1.0, b - a))
    out, _ = _density_from_transform(G, (a, b), n, f"({mu.label}) boxplus ({nu.label})")
    return out


def free_power(mu: Measure1D, N: int, n: int = DEFAULT_N, method: str = "subordination") -> Measure1D:
    """``N``-fold free convolution power ``mu^{boxplus N}``.

    ``method="subordination"`` solves the single equation
    ``N omega - (N - 1) F_mu(omega) = z``; ``method="split"`` uses binary
    splitting with :func:`free_add` (``N`` must be a power of two).
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be a positive integer")
    if N == 1:
        return mu
    _check_atoms(mu)
    if method == "split":
        if N & (N - 1):
            raise ValueError("binary splitting needs N to be a power of two")
        out = mu
        while N > 1:
            out = free_add(out, out, n=n)
            N //= 2
        return out
    if method != "subordination":
        raise ValueError(f"unknown method {method!r}")
    G0 = _evaluator(mu)
    a, b = N * mu.support[0], N * mu.support[1]
    G = FreePowerCauchy(G0, N, max(1.0, b - a))
    out, _ = _density_from_transform(G, (a, b), n, f"({mu.label})^boxplus{N}")
    return out


@dataclass(frozen=True)
class FlowPoint:
    """State of the Ornstein-Uhlenbeck interpolation at time ``t``.

    ``chi_star`` is the entropy relative to ``V_rho``
    (``rho m2/2 - chi``); ``chi`` is the free entropy itself.
    """

    t: float
    rho: float
    law: Measure1D
    chi: float
    chi_star: float
    fisher_rel: float
    variance: float


def ou_law(mu: Measure1D, t: float, rho: float = 1.0, n: int = DEFAULT_N) -> Measure1D:
    """Law of ``e^{-t} X + sqrt(1 - e^{-2t}) rho^{-1/2} S``."""
    if t < 0 or not rho > 0:
        raise ValueError("need t >= 0 and rho > 0")
    if t == 0:
        return mu
    return semicircular_flow(_m.dilate(mu, np.exp(-t)), -np.expm1(-2 * t) / rho, n=n)


def ou_flow(mu: Measure1D, t: float, rho: float = 1.0, n: int = DEFAULT_N) -> FlowPoint:
    """Ornstein-Uhlenbeck interpolation towards the Gibbs state of ``V_rho``."""
    law = ou_law(mu, t, rho, n)
    chi = _ent.free_entropy(law)
    return FlowPoint(
        t=float(t), rho=float(rho), law=law, chi=chi,
        chi_star=0.5 * rho * _m.moment(law, 2) - chi,
        fisher_rel=_ent.relative_fisher(law, rho),
        variance=_m.variance(law),
    )
