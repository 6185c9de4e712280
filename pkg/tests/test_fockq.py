import itertools

import numpy as np
import pytest

from freestein import fockq as fq
from freestein import ncpoly as nc

QMIX = np.array([[0.3, -0.2, 0.1],
                 [-0.2, 0.5, 0.4],
                 [0.1, 0.4, -0.6]])


@pytest.mark.parametrize("q", [-0.5, 0.0, 0.3, 0.9])
def test_single_variable_moments(q):
    fock = fq.build_fock(1, q, depth=6)
    assert fq.vacuum_moment(fock, (1, 1)) == 1.0
    assert abs(fq.vacuum_moment(fock, (1,) * 4) - (2 + q)) < 1e-15
    # q-Gaussian sixth moment: 5 + 6q + 3q^2 + q^3 (Touchard-Riordan)
    assert abs(fq.vacuum_moment(fock, (1,) * 6) - (5 + 6 * q + 3 * q * q + q**3)) < 1e-14
    assert fq.vacuum_moment(fock, (1,) * 5) == 0.0


def test_mixed_crossing_weights():
    fock = fq.build_mixed(QMIX, depth=4)
    assert abs(fq.vacuum_moment(fock, (1, 2, 1, 2)) - QMIX[0, 1]) < 1e-15
    assert abs(fq.vacuum_moment(fock, (1, 1, 2, 2)) - 1.0) < 1e-15
    assert abs(fq.vacuum_moment(fock, (2, 3, 3, 2)) - 1.0) < 1e-15
    assert fq.vacuum_moment(fock, (1, 2, 2, 3)) == 0.0


@pytest.mark.parametrize("n, q", [(2, 0.3), (3, -0.5), (2, QMIX[:2, :2])])
def test_moments_match_pair_partition_oracle(n, q):
    fock = fq.build_fock(n, q, depth=6) if np.ndim(q) == 0 else fq.build_mixed(q, depth=6)
    moms = fq.vacuum_moments(fock)
    assert len(moms) == sum(n**k for k in range(7))
    for w, val in moms.items():
        assert abs(val - fq.q_moment_oracle(n, q, w)) < 1e-12


def test_vacuum_moments_agree_with_single_word():
    fock = fq.build_fock(2, 0.3, depth=6)
    moms = fq.vacuum_moments(fock, 4)
    for w in itertools.product((1, 2), repeat=4):
        assert abs(moms[w] - fq.vacuum_moment(fock, w)) < 1e-15


@pytest.mark.parametrize("make", [
    lambda: fq.build_fock(2, 0.4, depth=4),
    lambda: fq.build_fock(3, -0.3, depth=4),
    lambda: fq.build_mixed(QMIX, depth=4),
])
def test_gram_recursion_matches_permutation_sum(make):
    fock = make()
    for d in range(1, 5):
        assert np.abs(fock.gram(d) - fq.gram_direct(fock, d)).max() < 1e-13


def test_free_case_gram_is_identity():
    fock = fq.build_fock(2, 0.0, depth=4)
    for d in range(5):
        assert np.array_equal(fock.gram(d), np.eye(2**d))


@pytest.mark.parametrize("make", [lambda: fq.build_fock(2, 0.3, depth=4), lambda: fq.build_mixed(QMIX, depth=3)])
def test_annihilation_is_deformed_adjoint(make):
    fock = make()
    for d in range(1, fock.depth + 1):
        for j in range(1, fock.n + 1):
            a = fq.annihilation_matrix(fock, j, d)
            b = fq.annihilation_via_gram(fock, j, d)
            assert np.abs(a - b).max() < 1e-12


def test_truncated_kernel_norm_by_trace():
    # ||A - pi_0||^2 = sum_d tr(G_d^-1 A_d^T G_d A_d) in the deformed inner product
    for fock in (fq.build_fock(2, 0.3, depth=4), fq.build_mixed(QMIX, depth=3)):
        for A in fq.kernel_family(fock):
            tot = 0.0
            for d in range(1, fock.depth + 1):
                D = np.diag(A.weights[d].reshape(-1))
                G = fock.gram(d)
                tot += np.trace(np.linalg.solve(G, D.T @ G @ D))
            assert abs(tot - A.truncated_sq) < 1e-12


def test_kernel_norm_closed_form():
    fock = fq.build_fock(2, 0.3, depth=6)
    xi = fq.xi_q(fock)
    r = 0.18
    assert abs(xi.closed_form_sq - r / (1 - r)) < 1e-15
    assert abs(xi.truncated_sq - sum(r**d for d in range(1, 7))) < 1e-15
    assert abs(xi.closed_form_sq - xi.truncated_sq) < r**7 / (1 - r) + 1e-15


def test_discrepancy_bounds():
    # |q| n / sqrt(1 - q^2 n) at n = 2, q = 0.3
    one = fq.discrepancy_bound(fq.build_fock(2, 0.3, depth=4))
    assert abs(one - 0.6 / np.sqrt(0.82)) < 1e-15
    assert round(one, 5) == 0.66259
    two = fq.discrepancy_bound(fq.build_mixed(np.full((2, 2), 0.3), depth=4))
    assert round(two, 4) == 0.6626
    assert fq.discrepancy_bound(fq.build_fock(2, 0.0, depth=4)) == 0.0


@pytest.mark.parametrize("make", [
    lambda: fq.build_fock(2, 0.3, depth=5),
    lambda: fq.build_fock(1, -0.7, depth=6),
    lambda: fq.build_mixed(QMIX, depth=4),
])
def test_stein_identity(make):
    fock = make()
    rng = np.random.default_rng(2)
    for _ in range(4):
        terms = {}
        for _ in range(5):
            w = tuple(rng.integers(1, fock.n + 1, size=rng.integers(0, fock.depth)))
            terms[w] = rng.standard_normal()
        p = nc.NCPoly(fock.n, terms)
        for j in range(1, fock.n + 1):
            assert fq.stein_identity_residual(fock, p, j) < 1e-10


def test_identity_kernel_fails_stein_identity():
    fock = fq.build_fock(1, 0.5, depth=5)
    one = fq.HSKernelOp(tuple(np.ones((1,) * d) for d in range(6)), 0.0, 0.0)
    p = nc.NCPoly.var(1, 1) ** 3
    assert fq.stein_identity_residual(fock, p, 1, kernels=[one]) > 0.1


def test_inner_product_is_symmetric():
    fock = fq.build_mixed(QMIX, depth=4)
    u = fock.apply_word((1, 2, 3))
    v = fock.apply_word((3, 1, 2))
    assert abs(fock.inner(u, v) - fock.inner(v, u)) < 1e-14


def test_errors():
    with pytest.raises(fq.FockError):
        fq.build_fock(2, 1.0)
    with pytest.raises(fq.FockError):
        fq.build_fock(2, 0.3, depth=1)
    with pytest.raises(fq.FockError):
        fq.build_mixed(np.array([[0.1, 0.2], [0.3, 0.1]]))
    with pytest.raises(fq.FockError):
        fq.build_mixed(np.full((2, 2), 0.8))
    fock = fq.build_fock(2, 0.3, depth=4)
    with pytest.raises(fq.FockError):
        fq.vacuum_moment(fock, (1,) * 5)
    with pytest.raises(fq.FockError):
        fq.vacuum_moment(fock, (3,))
    with pytest.raises(fq.FockError):
        fq.q_moment_oracle(1, 0.1, (1,) * 14)
    with pytest.raises(fq.FockError):
        fq.xi_q(fq.build_mixed(QMIX, depth=2))
    with pytest.raises(fq.FockError):
        fq.stein_identity_residual(fock, nc.NCPoly.var(1, 2) ** 4, 1)
