import numpy as np
import pytest

from freestein import ineq as iq
from freestein import measure as m

# sigma_v against V_1 at v = 2: gap (v - 1 - log v) / 2, Fisher (1 - v)^2 / v,
# discrepancy |v - 1|
GAP_V2 = 0.5 * (1 - np.log(2.0))
HSI_RHS_V2 = 0.5 * np.log(1.5)
# Bernoulli with two summands is the arcsine law on [-sqrt 2, sqrt 2]
CLT_GAP_N2 = 0.5 * np.log(2.0) - 0.25


def test_closed_form_constants():
    assert round(GAP_V2, 5) == 0.15343
    assert round(HSI_RHS_V2, 5) == 0.20273


def test_lsi_on_scaled_semicircle():
    r = iq.lsi_check(m.semicircle(0.0, 2.0))
    assert r.holds and not r.vacuous
    assert abs(r.lhs - GAP_V2) < 1e-5
    assert abs(r.rhs - 0.25) < 1e-5


@pytest.mark.parametrize("rho", [0.5, 1.0, 2.0])
def test_lsi_saturates_at_gibbs_state(rho):
    r = iq.lsi_check(m.semicircle(0.0, 1 / rho), rho)
    assert abs(r.slack) < 1e-5


def test_hsi_on_scaled_semicircle():
    r = iq.hsi_check(m.semicircle(0.0, 2.0))
    assert r.holds and r.conservative and not r.inconclusive
    assert abs(r.rhs - HSI_RHS_V2) < 1e-5
    # strictly sharper than the log-Sobolev bound
    assert r.rhs < r.inputs["lsi_rhs"]


def test_hsi_rhs_limits():
    assert iq.hsi_rhs(0.0, 3.0, 1.0) == 0.0
    assert iq.hsi_rhs(1.0, np.inf, 1.0) == np.inf
    # small s: (s^2/2) log(1 + phi/s^2) -> 0
    assert iq.hsi_rhs(1e-8, 1.0, 1.0) < 1e-14


@pytest.mark.parametrize("v", [0.5, 1.25, 2.0])
def test_deficit_equality_for_semicircles(v):
    r = iq.deficit_check(m.semicircle(0.0, v))
    assert abs(r.slack) < 1e-5


def test_deficit_strict_for_uniform(unit_uniform):
    r = iq.deficit_check(unit_uniform)
    assert r.holds and r.slack > 1e-3


def test_deficit_function():
    assert iq.deficit_d(0.0) == 0.0
    t = np.array([-0.5, 0.3, 4.0])
    assert np.all(iq.deficit_d(t) > 0)


def test_lsi_with_atoms_is_vacuous():
    r = iq.lsi_check(m.bernoulli())
    assert r.vacuous and r.holds


def test_stam_equality_for_semicircles():
    r = iq.stam_check(m.semicircle(0.0, 1.0), m.semicircle(0.0, 0.5))
    assert abs(r.slack) < 1e-6
    assert abs(r.lhs - 1.5) < 1e-6


def test_stam_strict_for_uniforms():
    mu = m.uniform(1.0, n=401)
    r = iq.stam_check(mu, mu, n=1001)
    assert r.holds and r.slack > 0.01


def test_flow_inequalities_on_semicircle():
    # sigma_2 stays semicircular along the flow: variance 1 + e^{-2t}
    mu = m.semicircle(0.0, 2.0)
    t = 0.5
    vt = 1 + np.exp(-2 * t)
    (db,) = iq.de_bruijn_check(mu, t_grid=(t,), n=1001)
    assert db.holds and db.inputs["relative_error"] < 1e-4
    assert abs(db.rhs + (1 - vt) ** 2 / vt) < 1e-5
    (ed,) = iq.exp_decay_check(mu, t_grid=(t,), n=1001)
    assert ed.holds
    (sd,) = iq.stein_decay_check(mu, t_grid=(t,), n=1001)
    assert sd.holds and sd.conservative


def test_flow_checks_reject_bad_time():
    with pytest.raises(ValueError):
        iq.de_bruijn_check(m.semicircle(0.0, 1.0, n=201), t_grid=(0.0,))


def test_clt_first_rows():
    rep = iq.clt_harness(m.bernoulli(), N_list=(1, 2))
    one, two = rep.rows
    assert one["entropy_gap"] == np.inf and np.isnan(one["ratio"])
    assert abs(two["entropy_gap"] - CLT_GAP_N2) < 1e-5
    assert abs(two["ratio"] - CLT_GAP_N2 / (np.log(2) / 2)) < 1e-4
    text = rep.to_csv()
    assert text.splitlines()[0] == "N,weights,sigma_N,entropy_gap,fisher_rel,bound,ratio"


def test_clt_rejects_unnormalized():
    with pytest.raises(ValueError):
        iq.clt_harness(m.semicircle(0.0, 2.0, n=201))
    with pytest.raises(ValueError):
        iq.clt_harness(m.bernoulli(), N_list=(2,), weights=[0.5, 0.5])


def test_weighted_sum_of_semicircles():
    a = np.array([0.6, 0.8])
    out = iq.free_weighted_sum(m.semicircle(0.0, 1.0, n=1001), a, n=1001)
    assert abs(m.variance(out) - 1.0) < 1e-5


@pytest.mark.parametrize("a", [np.full(4, 0.5), np.array([0.6, 0.8])])
def test_stein_kernel_of_sum(a):
    r = iq.stein_kernel_of_sum(m.uniform(np.sqrt(3.0)), a)
    assert r.holds
    assert 0 < r.lhs < r.rhs


def test_preconditions():
    off = m.translate(m.semicircle(0.0, 1.0, n=201), 0.5)
    with pytest.raises(ValueError):
        iq.lsi_check(off)
    with pytest.raises(ValueError):
        iq.deficit_check(m.bernoulli())
    with pytest.raises(ValueError):
        iq.stam_check(m.bernoulli(), m.semicircle(0.0, 1.0, n=201))
    with pytest.raises(ValueError):
        iq.stein_kernel_of_sum(m.uniform(np.sqrt(3.0), n=201), [0.5, 0.5])


def test_report_as_dict():
    d = iq.lsi_check(m.semicircle(0.0, 1.0, n=401)).as_dict()
    assert {"name", "lhs", "rhs", "slack", "holds", "tolerance", "inputs"} <= set(d)
