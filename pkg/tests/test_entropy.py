import numpy as np
import pytest

from freestein import entropy as e
from freestein import measure as m

# log energy of uniform[-1/2, 1/2] is -3/2 (nested scipy quad), so
# chi = -3/2 + 3/4 + log(2 pi)/2
CHI_UNIFORM_HALF = -0.75 + 0.5 * np.log(2 * np.pi)


def test_constants():
    assert abs(e.CHI_SEMICIRCLE - 1.4189385332046727) < 1e-15
    assert abs(e.ENTROPY_CONST - 1.6689385332046727) < 1e-15


@pytest.mark.parametrize("v", [0.5, 1.0, 3.0])
def test_semicircle_entropy(v):
    assert abs(e.free_entropy(m.semicircle(0.0, v)) - 0.5 * np.log(2 * np.pi * np.e * v)) < 1e-6


def test_uniform_entropy():
    assert abs(e.free_entropy(m.uniform(0.5)) - CHI_UNIFORM_HALF) < 1e-8


def test_entropy_translation_invariant():
    mu = m.uniform(1.0, n=1001)
    assert abs(e.free_entropy(m.translate(mu, 3.0)) - e.free_entropy(mu)) < 1e-10


def test_entropy_of_atoms():
    assert e.free_entropy(m.bernoulli()) == -np.inf
    assert e.relative_entropy(m.bernoulli()) == np.inf


@pytest.mark.parametrize("v", [0.5, 2.0])
def test_semicircle_fisher(v):
    mu = m.semicircle(0.0, v)
    assert abs(e.fisher(mu) - 1 / v) < 1e-5
    assert abs(e.relative_fisher(mu) - (1 - v) ** 2 / v) < 1e-5


def test_gibbs_state_has_zero_relative_fisher():
    for rho in (0.5, 2.0):
        assert e.relative_fisher(m.semicircle(0.0, 1 / rho), rho) < 1e-9


def test_uniform_fisher_two_routes():
    c = np.sqrt(3.0)
    mu = m.uniform(c)
    ref = np.pi**2 / (3 * c * c)
    assert abs(e.fisher_from_density(mu) - ref) < 1e-12
    assert abs(e.fisher(mu) - ref) < 1e-5


def test_conjugate_variable_semicircle():
    mu = m.semicircle(0.0, 2.0)
    x = np.array([-2.5, 0.3, 2.0])
    assert np.abs(e.conjugate_variable(mu, x) - x / 2).max() < 1e-5


def test_fisher_infinite_for_singular_laws():
    assert e.fisher(m.bernoulli()) == np.inf
    assert e.fisher(m.arcsine(2.0, n=201)) == np.inf
    assert e.relative_fisher(m.arcsine(2.0, n=201), 1.0) == np.inf


def test_relative_fisher_rejects_bad_rho():
    with pytest.raises(ValueError):
        e.relative_fisher(m.semicircle(0.0, 1.0, n=101), 0.0)


def test_entropy_report():
    r = e.entropy_report(m.semicircle(0.0, 1.0), rho=1.0)
    assert abs(r.chi - e.CHI_SEMICIRCLE) < 1e-6
    assert abs(r.chi_rel - (0.5 - e.CHI_SEMICIRCLE)) < 1e-6
    assert r.fisher_rel < 1e-9
    assert set(r.as_dict()) == {"chi", "chi_rel", "fisher_rel", "fisher_abs", "variance", "rho"}


def test_entropy_via_flow_integral():
    # independent route through the Fisher information of the semicircular flow
    mu = m.uniform(np.sqrt(3.0))
    assert abs(e.chi_star_via_flow(mu) - e.free_entropy(mu)) < 1e-4
