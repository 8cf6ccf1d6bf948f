import numpy as np
import pytest
from hypothesis import given

from corrlab.errors import BadMetric, BadPoint, BadShape, CapacityExceeded, NegativeMass, NotNormalized
from corrlab.info import entropy, tc
from corrlab.oracles import brute_marginal
from corrlab.space import (
    Alphabet,
    Mixture,
    ProductSpace,
    clump,
    disintegrate,
    is_product,
    make_joint,
    marginal,
    mix,
    point_mass,
    product,
    product_of_marginals,
    quantize,
    uniform,
)

from conftest import joint_dists

BITS2 = ProductSpace.discrete([2, 2])


def test_make_joint_examples():
    u = make_joint(BITS2, [0.25] * 4)
    assert is_product(u)
    d = make_joint(BITS2, [0.5, 0, 0, 0.5])
    assert not is_product(d)
    with pytest.raises(NotNormalized):
        make_joint(BITS2, [0.3] * 4)
    with pytest.raises(NegativeMass):
        make_joint(BITS2, [1.1, -0.1, 0, 0])
    with pytest.raises(BadShape):
        make_joint(BITS2, [0.5, 0.5])


def test_make_joint_renormalizes_within_tolerance():
    d = make_joint(BITS2, [0.25 + 1e-10, 0.25, 0.25, 0.25])
    assert abs(d.pmf.sum() - 1) < 1e-15


def test_space_validation():
    with pytest.raises(BadShape):
        Alphabet(("a", "a"))
    with pytest.raises(BadMetric):
        ProductSpace([Alphabet(("a", "b"))], [np.array([[0, 0.5], [0.4, 0]])])
    with pytest.raises(BadMetric):
        ProductSpace([Alphabet(("a", "b"))], [np.array([[0, 2.0], [2.0, 0]])])
    with pytest.raises(BadPoint):
        BITS2.point_index((0, 2))
    assert BITS2.point_index(("1", 0)) == (1, 0)


def test_capacity(monkeypatch):
    monkeypatch.setenv("CORRLAB_CAPACITY", "3")
    with pytest.raises(CapacityExceeded):
        make_joint(BITS2, [0.25] * 4)


def test_marginal_examples(parity3):
    m = marginal(parity3, [0])
    assert np.allclose(m.pmf, [0.5, 0.5])
    # brute-force marginal agrees on every subset
    for S in ([0], [1, 2], [0, 2]):
        bf = brute_marginal(parity3.pmf, S)
        arr = marginal(parity3, S).pmf
        for key, v in bf.items():
            assert arr[key] == pytest.approx(v, abs=1e-15)
    assert marginal(parity3, [0, 1, 2]).allclose(parity3)
    p = product([np.array([0.3, 0.7]), np.array([0.1, 0.2, 0.7])])
    assert np.allclose(marginal(p, [1]).pmf, [0.1, 0.2, 0.7])


def test_disintegrate_parity(parity3):
    k = disintegrate(parity3, [0])
    c = k.table[(0,)].pmf
    assert c[0, 0, 0] == pytest.approx(0.5) and c[0, 1, 1] == pytest.approx(0.5)
    assert c.sum() == pytest.approx(1.0)
    assert k.reconstitute().allclose(parity3)


def test_disintegrate_product_and_zero_mass():
    p = product([np.array([0.0, 1.0]), np.array([0.4, 0.6])])
    k = disintegrate(p, [0])
    assert list(k.table) == [(1,)]
    assert np.allclose(k.table[(1,)].pmf, p.pmf)


@given(joint_dists(min_n=2))
def test_reconstitution(d):
    for S in ([0], list(range(d.n - 1))):
        assert np.allclose(disintegrate(d, S).reconstitute().pmf, d.pmf, atol=1e-10)


def test_product_of_marginals_examples(parity3, diagonal2):
    assert np.allclose(product_of_marginals(parity3).pmf, 1 / 8)
    assert np.allclose(product_of_marginals(diagonal2).pmf, 1 / 4)
    p = product([np.array([0.2, 0.8]), np.array([0.5, 0.5])])
    assert np.allclose(product_of_marginals(p).pmf, p.pmf, atol=1e-12)


def test_mix_examples(diagonal2):
    a = point_mass(BITS2, (0, 0))
    b = point_mass(BITS2, (1, 1))
    assert mix(Mixture(np.array([0.5, 0.5]), (a, b))).allclose(diagonal2)
    assert mix(Mixture(np.array([1.0]), (a,))).allclose(a)


@given(joint_dists(min_n=2))
def test_mixture_marginal_consistency(d):
    other = product_of_marginals(d)
    m = Mixture(np.array([0.3, 0.7]), (d, other))
    lhs = marginal(mix(m), [0]).pmf
    rhs = 0.3 * marginal(d, [0]).pmf + 0.7 * marginal(other, [0]).pmf
    assert np.allclose(lhs, rhs, atol=1e-12)


def test_quantize_examples(parity3):
    same = quantize(parity3, [None, None, None])
    assert np.allclose(same.pmf, parity3.pmf)
    collapsed = quantize(parity3, [None, None, [[0, 1]]])
    assert collapsed.space.shape == (2, 2, 1)
    assert np.allclose(collapsed.pmf.reshape(2, 2), 0.25)


def test_quantize_one_coordinate_drops_tc():
    from corrlab.corpus import random_dense

    d = random_dense(3, 3, seed=11)
    q = quantize(d, [None, None, [[0, 1, 2]]])
    assert tc(q) == pytest.approx(tc(marginal(d, [0, 1])), abs=1e-12)


def test_quantize_composes():
    from corrlab.corpus import random_dense

    d = random_dense(2, 4, seed=3)
    fine = quantize(d, [[[0], [1, 2], [3]], None])
    coarse_after = quantize(fine, [[[0, 1], [2]], None])
    direct = quantize(d, [[[0, 1, 2], [3]], None])
    assert np.allclose(coarse_after.pmf, direct.pmf, atol=1e-15)


def test_clump_examples(parity3):
    assert np.allclose(clump(parity3, [[0], [1], [2]]).pmf, parity3.pmf)
    one = clump(parity3, [[0, 1, 2]])
    assert one.n == 1 and tc(one) == 0
    two = clump(parity3, [[0, 1], [2]])
    from corrlab.info import mutual_info

    assert mutual_info(two, [0], [1]) == pytest.approx(np.log(2), abs=1e-12)


@given(joint_dists(min_n=2))
def test_clump_preserves_entropy(d):
    blocks = [[0], list(range(1, d.n))]
    assert entropy(clump(d, blocks)) == pytest.approx(entropy(d), abs=1e-12)


def test_uniform_is_product():
    assert is_product(uniform(ProductSpace.discrete([2, 3, 2])))


def test_joint_dist_is_read_only(parity3):
    with pytest.raises(ValueError):
        parity3.pmf[0, 0, 0] = 1.0
