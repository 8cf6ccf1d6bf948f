import math

import numpy as np
import pytest

from corrlab.corpus import (
    InstanceSpec,
    dirac_spike_mixture,
    dirac_spike_weights,
    low_dtc_instances,
    noisy_coupling,
    planted_product_mixture,
    random_dense,
    zero_sum_uniform,
)
from corrlab.errors import PreconditionError
from corrlab.info import dtc, mixture_mutual_info, tc
from corrlab.space import marginal, mix


def test_zero_sum_examples():
    d = zero_sum_uniform(3, 2)
    assert np.count_nonzero(d.pmf) == 4 and np.allclose(d.pmf[d.pmf > 0], 0.25)
    two = zero_sum_uniform(2, 5)
    assert tc(two) == pytest.approx(math.log(5), abs=1e-12) and dtc(two) == pytest.approx(math.log(5), abs=1e-12)
    assert dtc(zero_sum_uniform(3, 3)) == pytest.approx(2 * math.log(3), abs=1e-12)
    for i in range(3):
        assert np.allclose(marginal(zero_sum_uniform(3, 3), [i]).pmf, 1 / 3, atol=1e-15)


def test_dirac_spike_examples():
    w = dirac_spike_weights(3, 0.5)
    h = -float(np.sum(w * np.log(w)))
    assert tc(dirac_spike_mixture(2, 3, 0.5)) == pytest.approx(h, abs=1e-12)
    for n, k, delta in [(3, 4, 0.2), (4, 3, 0.3), (2, 5, 0.7)]:
        d = dirac_spike_mixture(n, k, delta)
        assert tc(d) >= (n - 1) * delta * math.log(k - 1) - 1e-12
    assert tc(dirac_spike_mixture(3, 3, 1e-6)) < 1e-4


def test_planted_examples():
    one = mix(planted_product_mixture(4, 3, 1, seed=2))
    assert dtc(one) == pytest.approx(0, abs=1e-12)
    for seed in range(10):
        m = planted_product_mixture(4, 2, 3, seed=seed)
        d = mix(m)
        assert dtc(d) <= mixture_mutual_info(m) + 1e-9 <= math.log(3) + 1e-9


def test_random_dense_regression():
    d = random_dense(3, 2, 0)
    assert d.flat[:4].tolist() == [
        0.12754847250006068,
        0.19126629019515307,
        0.0037155331935617257,
        0.00042570314777804874,
    ]
    assert np.array_equal(random_dense(3, [2, 3, 2], 7).pmf, random_dense(3, [2, 3, 2], 7).pmf)
    assert tc(random_dense(2, 3, 1, concentration=1e6)) < 1e-2


def test_noisy_coupling_shape():
    base = random_dense(2, 3, 0)
    d = noisy_coupling(base, 0.2, 1)
    assert d.n == 4 and np.allclose(marginal(d, [0, 1]).pmf, base.pmf)


def test_instance_spec():
    assert InstanceSpec("zero_sum", {"n": 3, "p": 2}).build().n == 3
    with pytest.raises(PreconditionError):
        InstanceSpec("zero_sum", {"n": 3, "p": 1})
    with pytest.raises(PreconditionError):
        InstanceSpec("dirac_mixture", {"n": 3, "k": 2, "delta": 1.0})
    with pytest.raises(PreconditionError):
        InstanceSpec("nope", {})


def test_low_dtc_instances_meet_hypothesis():
    for d, delta in low_dtc_instances(12, seed=3):
        assert dtc(d) <= delta**3 * d.n
        assert d.space.cells <= 729
