import math

import numpy as np
import pytest

from corrlab.corpus import disjoint_products, opposed_products, planted_product_mixture, zero_sum_uniform
from corrlab.decompose import (
    find_low_info_subset,
    overlap_coupling,
    sample_count,
    sample_mixture,
    theorem_a,
    theorem_a2,
    theorem_a_prime,
)
from corrlab.errors import CapacityExceeded, GoodSetTooSmall, PreconditionError
from corrlab.info import cond_budget_terms, dtc, mutual_info
from corrlab.oracles import brute_subset_entropy
from corrlab.space import Mixture, ProductSpace, is_product, marginal_array, mix, product

LN2 = math.log(2)


def _product3():
    return product([np.array([0.3, 0.7]), np.array([0.5, 0.5]), np.array([0.9, 0.1])])


def test_subset_search_examples(parity3):
    assert find_low_info_subset(_product3(), 0.5).S == ()
    c = find_low_info_subset(parity3, 0.9)
    assert c.S == () and c.achieved == pytest.approx(3 * LN2, abs=1e-12) and c.budget == pytest.approx(2.43)
    c = find_low_info_subset(parity3, 0.8)
    assert c.S == (0, 1) and c.achieved == pytest.approx(0, abs=1e-12)


def test_subset_search_brute_force(parity3):
    # every singleton leaves 2 ln 2 of conditional TC + DTC
    for i in range(3):
        assert sum(cond_budget_terms(parity3, [i])) == pytest.approx(2 * LN2, abs=1e-12)
    with pytest.raises(PreconditionError):
        find_low_info_subset(parity3, 0)
    with pytest.raises(PreconditionError):
        find_low_info_subset(parity3, 1.5)


def test_tc_only_relaxation(parity3):
    c = find_low_info_subset(parity3, 0.5, tc_only=True)
    assert c.tc_only and c.achieved <= c.budget + 1e-9


def test_theorem_a_product():
    r = theorem_a(_product3(), 0.5)
    assert len(r.components) == 1 and r.mix_mi == 0 and r.transport_err == pytest.approx(0, abs=1e-12)


def test_theorem_a_parity9():
    d = zero_sum_uniform(9, 2)
    r = theorem_a(d, 0.9)
    assert r.hypothesis_holds
    assert r.mix_mi <= 8 * LN2 + 1e-9
    assert r.transport_err < 1.8
    # S is empty here: the single component is mu itself against the uniform product
    assert r.S == () and r.transport_err == pytest.approx(1 / 18, abs=1e-12)


def test_theorem_a_opposed_products():
    d = mix(opposed_products(8))
    assert dtc(d) <= LN2
    r = theorem_a(d, 0.5)
    assert r.hypothesis_holds and r.transport_err < 1.0
    assert r.S == (0,)
    # lifted mixture information equals I(X_1 ; X_2..X_8) by brute-force entropies
    h = lambda S: brute_subset_entropy(d.pmf, S)
    assert r.mix_mi == pytest.approx(h([0]) + h(range(1, 8)) - h(range(8)), abs=1e-10)
    # pinned regression values
    assert r.transport_err == pytest.approx(0.10142650691833459, abs=1e-12)
    assert r.mix_mi == pytest.approx(0.3640216725055123, abs=1e-12)


def test_theorem_a_invariants():
    d = mix(opposed_products(6, 0.08, 0.8))
    r = theorem_a(d, 0.5, strict=False)
    assert r.S
    recon = sum(w * c.pmf for w, c in zip(r.weights, r.components))
    assert np.allclose(recon, d.pmf, atol=1e-12)
    Sc = [i for i in range(d.n) if i not in r.S]
    for p in r.products:
        assert is_product(p)
    for y, c in zip(r.labels, r.components):
        # slice mu at X_S = y: the lifted component must keep that law on S^c
        idx = [slice(None)] * d.n
        for i, v in zip(r.S, y):
            idx[i] = v
        slab = d.pmf[tuple(idx)]
        assert np.allclose(marginal_array(c, Sc), slab / slab.sum(), atol=1e-10)
    assert r.mix_mi == pytest.approx(mutual_info(d, r.S, Sc), abs=1e-9)


def test_theorem_a_hypothesis_failure(parity3):
    r = theorem_a(parity3, 0.3, strict=True)
    assert not r.hypothesis_holds and r.notes
    assert "transport_lt_2delta" not in r.guarantees


def test_theorem_a_prime_examples(parity3):
    r = theorem_a_prime(_product3(), 0.5)
    assert r.m == 1 and r.transport_err == pytest.approx(0, abs=1e-12)
    r = theorem_a_prime(parity3, 0.8)
    assert r.m == 4
    assert r.m_bound == pytest.approx(2 ** (2 * LN2 / 0.64))
    assert r.m <= r.m_bound
    assert all(e == pytest.approx(0, abs=1e-12) for e in r.component_errors)
    assert sorted(r.labels) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_sample_count():
    m, log10 = sample_count(0.0, 0.45)
    assert log10 == pytest.approx((math.log(16) - 2 * math.log(0.45) + 16 / 0.45) / math.log(10))
    assert m > 1e6


def test_sample_mixture_examples():
    s = ProductSpace.discrete([2, 2])
    single = Mixture(np.array([1.0]), (product([np.array([0.4, 0.6])] * 2, s),))
    res = sample_mixture(single, 0.3, lambda y: True, seed=1, clip=True)
    assert res.tv == 0 and set(res.labels.tolist()) == {0} and res.capped
    with pytest.raises(CapacityExceeded):
        sample_mixture(single, 0.3, lambda y: True, seed=1)
    two = disjoint_products(3)
    res = sample_mixture(two, 0.4, lambda y: True, seed=2, clip=True)
    assert res.tv < 1.2 and res.mutual_info == pytest.approx(LN2)
    ten = planted_product_mixture(3, 2, 10, seed=5, concentration=50.0)
    res = sample_mixture(ten, 0.1, lambda y: True, seed=3, clip=True)
    assert res.tv < 0.3
    with pytest.raises(GoodSetTooSmall):
        sample_mixture(two, 0.4, lambda y: y == 0, seed=2, clip=True)
    with pytest.raises(PreconditionError):
        sample_mixture(two, 0.5, lambda y: True, seed=2)


def test_sample_mixture_deterministic():
    ten = planted_product_mixture(3, 2, 4, seed=5)
    a = sample_mixture(ten, 0.2, lambda y: True, seed=9, m=5000)
    b = sample_mixture(ten, 0.2, lambda y: True, seed=9, m=5000)
    assert np.array_equal(a.labels, b.labels)


def test_overlap_coupling():
    mu = np.array([0.5, 0.3, 0.2, 0.0])
    gamma = np.array([0.1, 0.3, 0.2, 0.4])
    diag, pairs = overlap_coupling(mu, gamma)
    assert np.allclose(diag, [0.1, 0.3, 0.2, 0.0])
    assert len(pairs) == 1 and pairs[0][:2] == (0, 3) and pairs[0][2] == pytest.approx(0.4)


def test_theorem_a2_product():
    r = theorem_a2(_product3(), 0.5, 0.45, seed=0)
    for c in r.components:
        assert np.allclose(c.pmf, _product3().pmf, atol=1e-12)
    assert r.transport_err == pytest.approx(0, abs=1e-12)


def test_theorem_a2_two_product_fixture():
    d = mix(opposed_products(8))
    r = theorem_a2(d, 0.5, 0.45, seed=42)
    recon = sum(w * c.pmf for w, c in zip(r.weights, r.components))
    assert np.max(np.abs(recon - d.pmf)) <= 1e-9
    assert r.transport_err < 3 * 0.45 + 4 * 0.5 / 0.45
    assert r.m == 10**6 and r.diagnostics["m_capped"]
    assert abs(sum(r.weights) - 1) < 1e-12
    # pinned regression values for seed 42
    assert r.transport_err == pytest.approx(0.1014881550616464, abs=1e-12)
    assert r.diagnostics["sample_tv"] == pytest.approx(0.00016469648640004278, abs=1e-14)
    assert list(r.weights) == pytest.approx([0.500207, 0.499793], abs=1e-15)


def test_theorem_a2_preconditions(parity3):
    with pytest.raises(PreconditionError):
        theorem_a2(parity3, 0.5, 0.5)
    with pytest.raises(PreconditionError):
        theorem_a2(parity3, 0.5, 0.0)
