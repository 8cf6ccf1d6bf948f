import numpy as np
import pytest
from hypothesis import settings, strategies as st

from corrlab.space import JointDist, ProductSpace

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@st.composite
def joint_dists(draw, max_n=4, max_k=3, min_n=1, allow_zeros=True):
    n = draw(st.integers(min_n, max_n))
    shape = tuple(draw(st.lists(st.integers(1 if n > 1 else 2, max_k), min_size=n, max_size=n)))
    cells = int(np.prod(shape))
    lo = 0.0 if allow_zeros else 0.01
    raw = draw(st.lists(st.floats(lo, 1.0), min_size=cells, max_size=cells))
    w = np.array(raw)
    if w.sum() <= 0:
        w[0] = 1.0
    w = w / w.sum()
    return JointDist(ProductSpace.discrete(shape), w.reshape(shape))


@pytest.fixture
def parity3():
    from corrlab.corpus import zero_sum_uniform

    return zero_sum_uniform(3, 2)


@pytest.fixture
def diagonal2():
    space = ProductSpace.discrete([2, 2])
    return JointDist(space, np.array([[0.5, 0.0], [0.0, 0.5]]))
