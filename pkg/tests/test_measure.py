import json

import numpy as np
import pytest

from freestein import measure as m


@pytest.mark.parametrize("mu, var, tol", [
    (m.semicircle(0.0, 2.0, n=1001), 2.0, 1e-5),
    # piecewise-linear 1/sqrt profile next to the singular end cells
    (m.arcsine(2.0, n=1001), 2.0, 2e-4),
    (m.uniform(np.sqrt(3.0), n=1001), 1.0, 1e-5),
    (m.marchenko_pastur(0.5, n=1001), 0.5, 1e-5),
    (m.bernoulli(), 1.0, 1e-15),
])
def test_family_moments(mu, var, tol):
    assert abs(mu.total_mass - 1.0) < 1e-12
    assert abs(m.mean(mu)) < 1e-9
    assert abs(m.variance(mu) - var) < tol


def test_arcsine_variance_converges():
    errs = [abs(m.variance(m.arcsine(2.0, n=n)) - 2.0) for n in (1001, 4001)]
    assert errs[1] < errs[0] / 8


def test_semicircle_catalan_moments():
    mu = m.semicircle(0.0, 1.0)
    for k, cat in zip((2, 4, 6, 8), (1, 2, 5, 14)):
        assert abs(m.moment(mu, k) - cat) < 1e-5


def test_uncentered_marchenko_pastur():
    mu = m.marchenko_pastur(0.5, centered=False)
    assert abs(m.mean(mu) - 1.0) < 1e-6
    lo, hi = mu.support
    assert abs(lo - (1 - np.sqrt(0.5)) ** 2) < 1e-12
    assert abs(hi - (1 + np.sqrt(0.5)) ** 2) < 1e-12


def test_marchenko_pastur_with_atom():
    mu = m.marchenko_pastur(2.0, centered=False)
    assert mu.has_atoms
    assert abs(mu.atoms[0, 1] - 0.5) < 1e-6


def test_centered_mp_edges_match_closed_form_transform():
    # the attached transform must describe the discretized law's support
    mu = m.marchenko_pastur(0.5)
    lo, hi = mu.support
    # just outside, -Im G scales with the height; just inside it does not
    for u, sign in ((lo - 1e-9, -1.0), (hi + 1e-9, 1.0)):
        g1 = mu.analytic(np.array([u + 1e-14j]))[0].imag[0]
        g2 = mu.analytic(np.array([u + 1e-13j]))[0].imag[0]
        assert abs(g2 / g1 - 10.0) < 1e-3
        inside = u - sign * 2e-9
        h1 = mu.analytic(np.array([inside + 1e-14j]))[0].imag[0]
        h2 = mu.analytic(np.array([inside + 1e-13j]))[0].imag[0]
        assert abs(h2 / h1 - 1.0) < 1e-2


def test_affine_maps():
    mu = m.semicircle(0.0, 1.0, n=1001)
    nu = m.affine(mu, 2.0, 1.0)
    assert abs(m.mean(nu) - 1.0) < 1e-9
    assert abs(m.variance(nu) - 4.0) < 1e-5
    flipped = m.dilate(m.uniform(1.0, n=101), -1.0)
    assert np.all(np.diff(flipped.grid) > 0)
    z = np.array([0.5 + 0.5j])
    ref = m.semicircle(1.0, 4.0).analytic(z)[0]
    assert abs(nu.analytic(z)[0][0] - ref[0]) < 1e-14


def test_center_removes_mean():
    mu = m.translate(m.uniform(1.0, n=101), 0.37)
    assert abs(m.mean(m.center(mu))) < 1e-14


def test_graded_grid_is_symmetric():
    g = m.graded_grid(-1.0, 1.0, 101)
    assert np.allclose(g, -g[::-1], atol=1e-15)
    assert g[1] - g[0] < 1e-6


def test_spec_roundtrip():
    mu = m.named_family("arcsine", {"c": 1.5, "n": 201})
    spec = json.loads(json.dumps(m.to_spec(mu)))
    nu = m.from_spec(spec)
    assert nu.edges == mu.edges
    assert m.l1_distance(mu, nu) < 1e-14


def test_scale_parameter():
    mu = m.named_family("uniform", {"c": 1.0, "n": 201, "scale": 2.0})
    assert abs(mu.support[1] - 2.0) < 1e-14


def test_l1_distance_counts_atoms():
    a = m.Measure1D.build(atoms=[(0.0, 0.5), (1.0, 0.5)])
    b = m.Measure1D.build(atoms=[(0.0, 0.5), (2.0, 0.5)])
    assert abs(m.l1_distance(a, b) - 1.0) < 1e-14


@pytest.mark.parametrize("kwargs", [
    {"grid": [0.0, 1.0], "density": [1.0]},
    {"grid": [1.0, 0.0], "density": [1.0, 1.0]},
    {"grid": [0.0, 1.0], "density": [-1.0, 1.0]},
    {"atoms": [(0.0, 0.0)]},
    {"atoms": [(0.0, 0.5), (0.0, 0.5)]},
    {"grid": [0.0, 1.0], "density": [1.0, 1.0], "edges": ("regular", "weird")},
])
def test_build_rejects_bad_input(kwargs):
    with pytest.raises(m.MeasureError):
        m.Measure1D.build(**kwargs)


def test_unknown_family_and_parameter():
    with pytest.raises(m.MeasureError):
        m.named_family("cauchy")
    with pytest.raises(m.MeasureError):
        m.named_family("semicircle", {"sigma": 1.0})
    with pytest.raises(m.MeasureError):
        m.from_spec({"nothing": 1})
