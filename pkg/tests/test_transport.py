import math

import numpy as np
import pytest
from hypothesis import given

from corrlab.corpus import dirac_spike_mixture, constant_point, zero_sum_uniform
from corrlab.errors import CapacityExceeded, NotProduct, SpaceMismatch
from corrlab.oracles import transport_by_tree_enumeration
from corrlab.space import JointDist, ProductSpace, point_mass, product, product_of_marginals, uniform
from corrlab.transport import (
    cost_matrix,
    fano_bound,
    fano_tc_bound,
    hamming_avg,
    marton_check,
    solve_transport,
    total_variation,
    transport_distance,
)

from conftest import joint_dists

LN2 = math.log(2)


def test_hamming_examples():
    s = ProductSpace.discrete([2] * 4)
    assert hamming_avg(s, (0, 1, 0, 1), (0, 1, 0, 1)) == 0
    assert hamming_avg(s, (0, 1, 0, 1), (0, 1, 1, 1)) == 0.25
    assert hamming_avg(s, (0, 0, 0, 0), (1, 1, 1, 1)) == 1


def test_transport_identity_and_point_masses():
    s = ProductSpace.discrete([3, 3])
    mu = uniform(s)
    value, plan = transport_distance(mu, mu)
    assert value == pytest.approx(0, abs=1e-12)
    assert np.allclose(plan.plan, np.diag(np.full(9, 1 / 9)))
    a, b = point_mass(s, (0, 0)), point_mass(s, (2, 0))
    assert transport_distance(a, b)[0] == pytest.approx(0.5)


def test_parity_vs_uniform():
    # half the uniform mass sits on odd-parity points, each one flip (1/3) from parity
    value, plan = transport_distance(zero_sum_uniform(3, 2), uniform(ProductSpace.discrete([2, 2, 2])))
    assert value == pytest.approx(1 / 6, abs=1e-12)
    assert value < 1 / 3


def test_weighted_metric():
    met = np.array([[0, 0.25, 1.0], [0.25, 0, 0.5], [1.0, 0.5, 0]])
    s = ProductSpace([("a", "b", "c")], [met])
    mu = JointDist(s, np.array([1.0, 0, 0]))
    nu = JointDist(s, np.array([0, 0.5, 0.5]))
    assert transport_distance(mu, nu)[0] == pytest.approx(0.5 * 0.25 + 0.5 * 1.0)


def test_sub_coordinates():
    s = ProductSpace.discrete([2, 2])
    mu = point_mass(s, (0, 0))
    nu = point_mass(s, (1, 0))
    assert transport_distance(mu, nu)[0] == pytest.approx(0.5)
    assert transport_distance(mu, nu, sub=[0])[0] == pytest.approx(1.0)
    assert transport_distance(mu, nu, sub=[1])[0] == pytest.approx(0.0)


def test_errors():
    a = uniform(ProductSpace.discrete([2]))
    b = uniform(ProductSpace.discrete([3]))
    with pytest.raises(SpaceMismatch):
        transport_distance(a, b)
    big = uniform(ProductSpace.discrete([2] * 10))
    with pytest.raises(CapacityExceeded):
        transport_distance(big, big)


def test_total_variation_examples(diagonal2):
    s = diagonal2.space
    assert total_variation(diagonal2, diagonal2) == 0
    assert total_variation(point_mass(s, (0, 0)), point_mass(s, (1, 1))) == 1
    assert total_variation(uniform(s), diagonal2) == pytest.approx(0.5)


def test_dirac_spike_distance():
    for n, k, delta in [(2, 3, 0.5), (3, 4, 0.2)]:
        d = dirac_spike_mixture(n, k, delta)
        assert transport_distance(d, constant_point(n, k))[0] == pytest.approx(delta, abs=1e-9)


def test_oracle_matches_solver_on_fixed_instance():
    a = np.array([0.2, 0.5, 0.3])
    b = np.array([0.6, 0.1, 0.3])
    C = np.array([[0.0, 0.5, 1.0], [0.5, 0.0, 0.5], [1.0, 0.5, 0.0]])
    exact = transport_by_tree_enumeration(a, b, C)
    assert solve_transport(a, b, C)[0] == pytest.approx(exact, abs=1e-12)
    # independent closed form: 1-D transport with |i - j| / 2 as cost
    ca, cb = np.cumsum(a), np.cumsum(b)
    assert exact == pytest.approx(0.5 * float(np.sum(np.abs(ca - cb)[:-1])), abs=1e-12)


@given(joint_dists(max_n=3, max_k=3, allow_zeros=False))
def test_plan_invariants_and_tv(d):
    nu = product_of_marginals(d)
    value, plan = transport_distance(d, nu)
    plan.check(d, nu)
    assert plan.dual_gap <= 1e-10
    assert value <= total_variation(d, nu) + 1e-10


def test_marton_examples(parity3):
    p = product([np.array([0.3, 0.7])] * 3)
    rep = marton_check(p, p)
    assert rep.lhs == pytest.approx(0, abs=1e-12) and rep.rhs == pytest.approx(0, abs=1e-12)
    rep = marton_check(parity3)
    assert rep.satisfied and rep.rhs == pytest.approx(math.sqrt(LN2 / 6), abs=1e-12)
    assert rep.lhs == pytest.approx(1 / 6, abs=1e-12)
    with pytest.raises(NotProduct):
        marton_check(p, parity3)


def test_fano_examples():
    d = dirac_spike_mixture(2, 3, 0.5)
    rep = fano_tc_bound(d, d)
    assert rep.delta == 0 and rep.bound == 0 and rep.tc_gap == 0
    rep = fano_tc_bound(d, constant_point(2, 3))
    assert rep.delta == pytest.approx(0.5)
    assert rep.tc_gap == pytest.approx(1.5 * LN2, abs=1e-12)
    assert rep.bound == pytest.approx(2 * (LN2 + 0.5 * LN2) * 2, abs=1e-12)
    assert rep.satisfied
    assert fano_bound(3, 2, 0.25) == pytest.approx(2 * (-(0.25 * math.log(0.25) + 0.75 * math.log(0.75))) * 3)


def test_cost_matrix():
    s = ProductSpace.discrete([2, 3])
    X = np.array([[0, 0], [1, 2]])
    assert np.allclose(cost_matrix(s, X, X), [[0, 1], [1, 0]])
