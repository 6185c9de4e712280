import numpy as np
import pytest

from freestein import ncpoly as nc
from freestein.ncpoly import NCPoly, NCPolyTensor


def random_poly(rng, n_vars=2, max_deg=4, n_terms=4, real=False):
    terms = {}
    for _ in range(n_terms):
        w = tuple(rng.integers(1, n_vars + 1, size=rng.integers(0, max_deg + 1)))
        c = rng.standard_normal() + (0 if real else 1j * rng.standard_normal())
        terms[w] = terms.get(w, 0) + c
    return NCPoly(n_vars, terms)


def t(j, n=2):
    return NCPoly.var(j, n)


def test_cubic_difference_quotient():
    p = t(1) ** 3
    one = NCPoly.const(1, 2)
    ref = (NCPolyTensor.simple(one, t(1) ** 2) + NCPolyTensor.simple(t(1), t(1))
           + NCPolyTensor.simple(t(1) ** 2, one))
    assert nc.difference_quotient(p, 1) == ref
    assert nc.difference_quotient(p, 2).is_zero()


def test_cyclic_derivative_of_word():
    # D_1 (t1 t2 t1 t2) = 2 t2 t1 t2
    p = t(1) * t(2) * t(1) * t(2)
    assert nc.cyclic_derivative(p, 1) == 2 * (t(2) * t(1) * t(2))
    assert nc.cyclic_derivative(nc.gibbs_potential(2, 3.0), 2) == 3.0 * t(2)


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_leibniz_rule(seed):
    rng = np.random.default_rng(seed)
    for _ in range(5):
        p, q = random_poly(rng, 3, 3), random_poly(rng, 3, 3)
        one = NCPoly.const(1, 3)
        for j in (1, 2, 3):
            lhs = nc.difference_quotient(p * q, j)
            rhs = (NCPolyTensor.simple(one, q) * nc.difference_quotient(p, j)
                   + NCPolyTensor.simple(p, one) * nc.difference_quotient(q, j))
            assert lhs == rhs


def test_leibniz_factor_order_matters():
    # with (a (x) b)(c (x) d) = ac (x) db, putting 1 (x) q on the right of d_j p
    # is not a valid product rule
    p, q = t(1) * t(2), t(1)
    one = NCPoly.const(1, 2)
    wrong = (nc.difference_quotient(p, 1) * NCPolyTensor.simple(one, q)
             + NCPolyTensor.simple(p, one) * nc.difference_quotient(q, 1))
    assert wrong != nc.difference_quotient(p * q, 1)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_flip_of_difference_quotient_is_cyclic_derivative(seed):
    p = random_poly(np.random.default_rng(seed), 2, 5, 6)
    for j in (1, 2):
        assert nc.difference_quotient(p, j).flip() == nc.cyclic_derivative(p, j)


def test_sharp_evaluation_is_directional_derivative():
    rng = np.random.default_rng(7)
    p = random_poly(rng, 2, 4, 6)
    X = nc.random_selfadjoint(2, 3, rng)
    H = nc.random_selfadjoint(1, 3, rng)[0]
    h = 1e-5
    for j in (0, 1):
        plus = list(X)
        minus = list(X)
        plus[j] = X[j] + h * H
        minus[j] = X[j] - h * H
        fd = (nc.eval_poly(p, plus) - nc.eval_poly(p, minus)) / (2 * h)
        exact = nc.eval_tensor_sharp(nc.difference_quotient(p, j + 1), X, H)
        assert np.abs(fd - exact).max() < 1e-7


def test_cyclic_gradient_is_trace_gradient():
    rng = np.random.default_rng(11)
    p = random_poly(rng, 2, 4, 6, real=True)
    X = nc.random_selfadjoint(2, 4, rng)
    H = nc.random_selfadjoint(1, 4, rng)[0]
    h = 1e-5
    fd = (nc.trace_state(nc.eval_poly(p, (X[0] + h * H, X[1])))
          - nc.trace_state(nc.eval_poly(p, (X[0] - h * H, X[1])))) / (2 * h)
    exact = nc.trace_state(nc.eval_poly(nc.cyclic_derivative(p, 1), X) @ H)
    assert abs(fd - exact) < 1e-8


@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_r_norm_submultiplicative(seed):
    rng = np.random.default_rng(seed)
    for R in (0.5, 1.0, 2.5):
        p, q = random_poly(rng), random_poly(rng)
        assert nc.r_norm(p * q, R) <= nc.r_norm(p, R) * nc.r_norm(q, R) * (1 + 1e-12)


def test_r_norm_value():
    p = 2 * t(1) * t(2) - 3 * NCPoly.const(1, 2)
    assert nc.r_norm(p, 2.0) == 2 * 4 + 3
    with pytest.raises(nc.NCPolyError):
        nc.r_norm(p, 0.0)


def test_star_and_self_adjoint():
    p = t(1) * t(2) + t(2) * t(1)
    assert p.is_self_adjoint()
    assert not (t(1) * t(2)).is_self_adjoint()
    assert (1j * t(1)).star() == -1j * t(1)


def test_jacobian_entries():
    P = (t(1) * t(2), t(2) ** 2)
    J = nc.jacobian(P)
    assert J.size == 2
    assert J[0, 1] == nc.difference_quotient(P[0], 2)
    assert J[1, 0].is_zero()
    with pytest.raises(nc.NCPolyError):
        nc.jacobian((t(1),))


def test_text_roundtrip():
    p = random_poly(np.random.default_rng(3), 3, 5, 8)
    q = nc.from_text(nc.to_text(p))
    assert q.n_vars == 3
    assert q == p


def test_from_text_errors():
    with pytest.raises(nc.NCPolyError):
        nc.from_text("1.0\n")
    with pytest.raises(nc.NCPolyError):
        nc.from_text("1.0 x 1 2\n")
    with pytest.raises(nc.NCPolyError):
        nc.from_text("1.0 0.0 3\n", n_vars=2)


def test_bad_inputs():
    with pytest.raises(nc.NCPolyError):
        NCPoly(2, {(3,): 1.0})
    with pytest.raises(nc.NCPolyError):
        t(1, 2) + t(1, 3)
    with pytest.raises(nc.NCPolyError):
        nc.MatrixTuple([np.array([[0, 1], [0, 0]])])
    with pytest.raises(nc.NCPolyError):
        nc.eval_poly(t(1), [np.eye(2)] * 3)


@pytest.mark.parametrize("f", [
    nc.gibbs_potential(2),
    nc.power_sum(2, 4),
    nc.gibbs_potential(2) + nc.power_sum(2, 4, 0.25),
])
def test_tangent_inequality_for_convex_potentials(f):
    rng = np.random.default_rng(5)
    for _ in range(10):
        r = nc.tangent_inequality_check(f, nc.random_selfadjoint(2, 4, rng), nc.random_selfadjoint(2, 4, rng))
        assert r.holds and r.margin >= -1e-10


def test_tangent_inequality_fails_for_concave():
    rng = np.random.default_rng(5)
    r = nc.tangent_inequality_check(-nc.gibbs_potential(2), nc.random_selfadjoint(2, 4, rng),
                                    nc.random_selfadjoint(2, 4, rng))
    assert not r.holds
    with pytest.raises(nc.NCPolyError):
        nc.tangent_inequality_check(t(1) * t(2), nc.random_selfadjoint(2, 4, rng),
                                    nc.random_selfadjoint(2, 4, rng))
