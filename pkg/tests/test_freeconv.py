import numpy as np
import pytest

from freestein import freeconv as fc
from freestein import measure as m
from freestein import transforms as tr


def kesten_mckay(x, N):
    """Density of the sum of ``N`` free symmetric Bernoulli variables."""
    r = 4 * (N - 1) - x * x
    return np.where(r > 0, N * np.sqrt(np.clip(r, 0, None)) / (2 * np.pi * (N * N - x * x)), 0.0)


def l1_to_density(mu, f, order=4):
    t, w = np.polynomial.legendre.leggauss(order)
    g = mu.grid
    h = np.diff(g)
    y = g[:-1, None] + 0.5 * h[:, None] * (t + 1)
    return float(np.sum(0.5 * h[:, None] * w * np.abs(mu.density_at(y) - f(y))))


def test_flow_of_semicircle():
    out = fc.semicircular_flow(m.semicircle(0.0, 1.0), 1.0)
    assert m.l1_distance(out, m.semicircle(0.0, 2.0)) < 1e-6


def test_flow_of_point_mass():
    out = fc.semicircular_flow(m.point_mass(0.3), 2.0, n=1001)
    assert m.l1_distance(out, m.semicircle(0.3, 2.0, n=1001)) < 1e-12


def test_flow_routes_agree():
    mu = m.uniform(1.0)
    a = fc.semicircular_flow(mu, 0.5, n=2001)
    b = fc.semicircular_flow(mu, 0.5, n=2001, method="subordination")
    assert m.l1_distance(a, b) < 1e-5


def test_flow_of_centered_mp_keeps_mean():
    out = fc.semicircular_flow(m.marchenko_pastur(0.5), 1.0, n=2001)
    assert abs(m.mean(out)) < 1e-6
    assert abs(m.variance(out) - 1.5) < 1e-5


def test_flow_of_uniform_is_symmetric():
    out = fc.ou_law(m.uniform(np.sqrt(3.0)), 1.95, n=2001)
    lo, hi = out.support
    assert abs(lo + hi) < 1e-12
    assert abs(m.mean(out)) < 1e-9


def test_bernoulli_sum_is_arcsine():
    out = fc.free_add(m.bernoulli(), m.bernoulli())
    assert out.edges == (m.INVSQRT, m.INVSQRT)
    assert np.allclose(out.support, (-2.0, 2.0), atol=1e-9)
    assert m.l1_distance(out, m.arcsine(2.0)) < 1e-4
    z = np.linspace(-3, 3, 13) + 1j
    assert np.abs(out.analytic(z)[0] - m.arcsine(2.0).analytic(z)[0]).max() < 1e-12


def test_free_add_with_point_mass_translates():
    mu = m.uniform(1.0, n=401)
    out = fc.free_add(mu, m.point_mass(0.5), n=401)
    assert m.l1_distance(out, m.translate(mu, 0.5)) < 1e-12


def test_free_add_matches_flow():
    mu = m.uniform(1.0)
    a = fc.free_add(mu, m.semicircle(0.0, 0.5))
    b = fc.semicircular_flow(mu, 0.5)
    assert m.l1_distance(a, b) < 1e-5


def test_free_add_rejects_heavy_atom():
    heavy = m.Measure1D.build(atoms=[(0.0, 0.6), (1.0, 0.4)])
    with pytest.raises(ValueError):
        fc.free_add(heavy, m.bernoulli())


@pytest.mark.parametrize("N", [3, 4])
def test_free_power_kesten_mckay(N):
    out = fc.free_power(m.bernoulli(), N, n=2001)
    assert abs(out.support[1] - 2 * np.sqrt(N - 1)) < 1e-9
    assert l1_to_density(out, lambda x: kesten_mckay(x, N)) < 1e-5
    assert abs(m.variance(out) - N) < 1e-5


def test_free_power_routes_agree():
    a = fc.free_power(m.bernoulli(), 4, n=801)
    b = fc.free_power(m.bernoulli(), 4, n=801, method="split")
    assert m.l1_distance(a, b) < 1e-6


def test_free_power_errors():
    with pytest.raises(ValueError):
        fc.free_power(m.bernoulli(), 3, method="split")
    with pytest.raises(ValueError):
        fc.free_power(m.bernoulli(), 0)
    assert fc.free_power(m.bernoulli(), 1) is not None


def test_flow_semigroup():
    mu = m.uniform(1.0, n=2001)
    two_step = fc.semicircular_flow(fc.semicircular_flow(mu, 0.2, n=2001), 0.3, n=2001)
    one_step = fc.semicircular_flow(mu, 0.5, n=2001)
    assert m.l1_distance(two_step, one_step) < 5e-5


@pytest.mark.parametrize("swap", [False, True])
def test_free_add_across_spectral_gap(swap):
    # 0 lies in a gap of the sum, where one subordination function blows up
    pair = (m.bernoulli(), m.uniform(1.0, n=401))
    out = fc.free_add(*(pair[::-1] if swap else pair), n=1001)
    assert out.density_at(np.array([0.0]))[0] == 0.0
    assert abs(m.variance(out) - 4.0 / 3.0) < 1e-4
    assert abs(m.mean(out)) < 1e-9


def test_subordinated_transform_is_herglotz():
    out = fc.free_add(m.bernoulli(), m.uniform(1.0, n=401), n=1001)
    z = np.concatenate([np.linspace(-4, 4, 41) + 1j * y for y in (1e-3, 0.1, 2.0)])
    assert np.all(out.analytic(z)[0].imag < 0)
    assert np.all(tr.cauchy(out, z).imag < 0)


def test_ou_variance():
    mu = m.marchenko_pastur(0.5)
    for t in (0.3, 1.0):
        p = fc.ou_flow(mu, t, rho=2.0, n=2001)
        ref = 0.5 * np.exp(-2 * t) + (1 - np.exp(-2 * t)) / 2.0
        assert abs(p.variance - ref) < 1e-5
        assert p.fisher_rel >= 0


def test_ou_law_at_zero_is_input():
    mu = m.uniform(1.0, n=101)
    assert fc.ou_law(mu, 0.0) is mu
    with pytest.raises(ValueError):
        fc.ou_law(mu, -1.0)
