"""Free entropy and free Fisher information of one-dimensional laws.

Conventions
-----------
The conjugate variable is ``xi(x) = 2 * p.v. int dmu(y) / (x - y)``.  With
this normalization the semicircle law of variance one has ``xi(x) = x``,
i.e. it is the free Gibbs state of ``V_1 = t^2 / 2``, and
``relative_fisher(semicircle(0, 1/rho), rho) == 0``.

Relative quantities are taken with respect to ``V_rho = rho t^2 / 2``:

* ``chi(mu | V_rho) = rho/2 * m2(mu) - chi(mu)``,
* ``Phi(mu | V_rho) = int (xi(x) - rho x)^2 dmu(x)``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import measure as _m
from .measure import Measure1D
from .transforms import hilbert, log_energy

ENTROPY_CONST = 0.75 + 0.5 * np.log(2 * np.pi)
CHI_SEMICIRCLE = 0.5 * np.log(2 * np.pi * np.e)


@dataclass(frozen=True)
class EntropyReport:
    chi: float
    chi_rel: float
    fisher_rel: float
    fisher_abs: float
    variance: float
    rho: float = 1.0

    def as_dict(self):
        return asdict(self)


def free_entropy(mu: Measure1D) -> float:
    """``chi(mu) = int int log|x-y| dmu dmu + 3/4 + log(2 pi)/2``.

    Returns ``-inf`` for measures with atoms.
    """
    e = log_energy(mu)
    return e + ENTROPY_CONST if np.isfinite(e) else float("-inf")


def relative_entropy(mu: Measure1D, rho: float = 1.0) -> float:
    """Free entropy of ``mu`` relative to ``V_rho``: ``rho m2 / 2 - chi``."""
    return 0.5 * rho * _m.moment(mu, 2) - free_entropy(mu)


def conjugate_variable(mu: Measure1D, x):
    """Free score ``xi(x) = 2 H mu(x)`` at real points ``x``."""
    return 2.0 * hilbert(mu, x)


def _fisher_nodes(mu: Measure1D):
    key = "fisher_nodes"
    if key not in mu._cache:
        x, w = mu.quadrature(order=3)
        mu._cache[key] = (x, w, conjugate_variable(mu, x))
    return mu._cache[key]


def _finite_fisher(mu: Measure1D) -> bool:
    # atoms and inverse square-root edges both give density outside L^3
    return not mu.has_atoms and mu.edges == (_m.REGULAR, _m.REGULAR) and mu.has_density


def fisher(mu: Measure1D) -> float:
    """Free Fisher information ``int xi^2 dmu`` (``inf`` if the law has no L^3 density)."""
    if not _finite_fisher(mu):
        return float("inf")
    x, w, xi = _fisher_nodes(mu)
    return float(np.dot(w, xi * xi))


def relative_fisher(mu: Measure1D, rho: float = 1.0) -> float:
    """Free Fisher information relative to ``V_rho``: ``int (xi - rho x)^2 dmu``."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    if not _finite_fisher(mu):
        return float("inf")
    x, w, xi = _fisher_nodes(mu)
    r = xi - rho * x
    return float(np.dot(w, r * r))


def fisher_from_density(mu: Measure1D) -> float:
    """Independent route: ``Phi = (4 pi^2 / 3) int f^3 dx`` for an L^3 density."""
    if not _finite_fisher(mu):
        return float("inf")
    t, wt = np.polynomial.legendre.leggauss(4)
    t, wt = 0.5 * (t + 1), 0.5 * wt
    g, f = mu.grid, mu.density
    h = np.diff(g)
    fy = f[:-1, None] + (f[1:] - f[:-1])[:, None] * t
    return float(4 * np.pi**2 / 3 * np.sum(h[:, None] * wt * fy**3))


def entropy_report(mu: Measure1D, rho: float = 1.0) -> EntropyReport:
    chi = free_entropy(mu)
    return EntropyReport(
        chi=chi,
        chi_rel=0.5 * rho * _m.moment(mu, 2) - chi,
        fisher_rel=relative_fisher(mu, rho),
        fisher_abs=fisher(mu),
        variance=_m.variance(mu),
        rho=rho,
    )


def chi_star_via_flow(mu: Measure1D, t_max: float = 100.0, steps: int = 48,
                      n: int = 2001) -> float:
    """Non-microstates entropy from the semicircular-flow integral.

    ``chi*(mu) = 1/2 int_0^inf (1/(1+t) - Phi(mu boxplus sigma_t)) dt
    + log(2 pi e)/2``.  The range ``[0, t_max]`` is split into
    logarithmically spaced panels with Gauss-Legendre nodes (``steps`` in
    total); beyond ``t_max`` the Fisher information is replaced by its
    asymptotic form ``1/(v + t)`` with ``v`` the variance, whose
    contribution is integrated exactly.
    """
    from .freeconv import semicircular_flow

    if t_max < 50:
        raise ValueError("t_max must be at least 50")
    edges = np.concatenate(([0.0], np.geomspace(1e-3, t_max, 6)))
    per = max(2, steps // (edges.size - 1))
    x, w = np.polynomial.legendre.leggauss(per)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        ts = 0.5 * (b - a) * (x + 1) + a
        vals = np.array([1.0 / (1.0 + t) - fisher(semicircular_flow(mu, t, n=n)) for t in ts])
        total += 0.5 * (b - a) * float(np.dot(w, vals))
    v = _m.variance(mu)
    tail = np.log((v + t_max) / (1.0 + t_max))
    return 0.5 * (total + tail) + CHI_SEMICIRCLE
