"""Named example measures and seeded random instance generators.

Randomness comes from numpy's PCG64 generator (``np.random.default_rng``),
which is specified bit-for-bit across platforms.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .info import dtc
from .space import (
    JointDist,
    Mixture,
    ProductSpace,
    check_capacity,
    extend_with_channel,
    mix,
    product,
)


def zero_sum_uniform(n: int, p: int) -> JointDist:
    """Uniform law on {a in (Z/pZ)^n : a_1 + ... + a_n = 0}."""
    if n < 2 or p < 2:
        raise PreconditionError("zero-sum fixture needs n >= 2 and p >= 2")
    space = ProductSpace.discrete([p] * n)
    check_capacity(space.cells)
    grids = np.indices(space.shape).sum(axis=0)
    arr = (grids % p == 0).astype(float)
    return JointDist(space, arr / arr.sum())


def dirac_spike_mixture(n: int, k: int, delta: float) -> JointDist:
    """(1 - delta) at (0,...,0) plus delta/(k-1) at each constant tuple (j,...,j)."""
    if k < 2 or not 0 < delta < 1:
        raise PreconditionError("dirac spike fixture needs k >= 2 and delta in (0, 1)")
    if n < 1:
        raise PreconditionError("n must be positive")
    space = ProductSpace.discrete([k] * n)
    check_capacity(space.cells)
    arr = np.zeros(space.shape)
    arr[(0,) * n] = 1.0 - delta
    for j in range(1, k):
        arr[(j,) * n] = delta / (k - 1)
    return JointDist(space, arr)


def constant_point(n: int, k: int, j: int = 0) -> JointDist:
    space = ProductSpace.discrete([k] * n)
    arr = np.zeros(space.shape)
    arr[(j,) * n] = 1.0
    return JointDist(space, arr)


def dirac_spike_weights(k: int, delta: float) -> np.ndarray:
    return np.array([1.0 - delta] + [delta / (k - 1)] * (k - 1))


def _sizes(n: int, alphabet_sizes) -> list[int]:
    if isinstance(alphabet_sizes, (int, np.integer)):
        return [int(alphabet_sizes)] * n
    sizes = [int(k) for k in alphabet_sizes]
    if len(sizes) != n:
        raise PreconditionError(f"need {n} alphabet sizes, got {len(sizes)}")
    return sizes


def random_dense(n: int, alphabet_sizes, seed: int, concentration: float = 1.0) -> JointDist:
    """Symmetric Dirichlet(concentration) pmf over the whole table."""
    sizes = _sizes(n, alphabet_sizes)
    if concentration <= 0:
        raise PreconditionError("concentration must be positive")
    space = ProductSpace.discrete(sizes)
    check_capacity(space.cells)
    rng = np.random.default_rng(seed)
    pmf = rng.dirichlet(np.full(space.cells, float(concentration)))
    return JointDist(space, pmf.reshape(space.shape))


def planted_product_mixture(
    n: int, alphabet_size, components: int, seed: int, concentration: float = 1.0
) -> Mixture:
    """Random product measures with random Dirichlet(1) weights."""
    if components < 1:
        raise PreconditionError("need at least one component")
    sizes = _sizes(n, alphabet_size)
    space = ProductSpace.discrete(sizes)
    check_capacity(space.cells)
    rng = np.random.default_rng(seed)
    comps = []
    for _ in range(components):
        factors = [rng.dirichlet(np.full(k, float(concentration))) for k in sizes]
        comps.append(product(factors, space))
    weights = rng.dirichlet(np.ones(components)) if components > 1 else np.ones(1)
    return Mixture(weights, tuple(comps))


def opposed_products(n: int, bias: float = 0.1, weight: float = 0.5) -> Mixture:
    """Bern(bias)^n and Bern(1 - bias)^n mixed with weights (weight, 1 - weight)."""
    if not 0 < bias < 0.5:
        raise PreconditionError("bias must lie in (0, 1/2)")
    space = ProductSpace.discrete([2] * n)
    lo = product([np.array([1 - bias, bias])] * n, space)
    hi = product([np.array([bias, 1 - bias])] * n, space)
    return Mixture(np.array([weight, 1.0 - weight]), (lo, hi))


def noised_product(n: int, alphabet_sizes, eta: float, seed: int) -> JointDist:
    """(1 - eta) * random product + eta * random dense table."""
    sizes = _sizes(n, alphabet_sizes)
    space = ProductSpace.discrete(sizes)
    check_capacity(space.cells)
    rng = np.random.default_rng(seed)
    base = product([rng.dirichlet(np.ones(k)) for k in sizes], space)
    noise = rng.dirichlet(np.ones(space.cells)).reshape(space.shape)
    return JointDist(space, (1 - eta) * base.pmf + eta * noise)


def noisy_coupling(dist: JointDist, flip: float, seed: int) -> JointDist:
    """Adjoin noisy copies Y_i of every X_i through random channels.

    Row x of the channel for coordinate i keeps x with probability 1 - flip
    and otherwise moves to a random symbol. The result has 2n coordinates
    (X_1..X_n, Y_1..Y_n).
    """
    if not 0 <= flip <= 1:
        raise PreconditionError("flip must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    out = dist
    for i, k in enumerate(dist.space.shape):
        noise = rng.dirichlet(np.ones(k), size=k)
        channel = (1 - flip) * np.eye(k) + flip * noise
        out = extend_with_channel(out, i, channel)
    return out


def disjoint_products(n: int, weights=(0.5, 0.5)) -> Mixture:
    """Point masses at (0,...,0) and (1,...,1): products with disjoint supports."""
    space = ProductSpace.discrete([2] * n)
    zero = product([np.array([1.0, 0.0])] * n, space)
    one = product([np.array([0.0, 1.0])] * n, space)
    return Mixture(np.asarray(weights, dtype=float), (zero, one))


KINDS = ("zero_sum", "dirac_mixture", "planted_product_mixture", "random_dense", "noisy_coupling")


@dataclass(frozen=True)
class InstanceSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PreconditionError(f"unknown instance kind {self.kind!r}; expected one of {KINDS}")
        p = self.params
        n = p.get("n", 2)
        if n < 2 and self.kind != "random_dense":
            raise PreconditionError("n must be at least 2")
        if self.kind == "zero_sum" and p.get("p", 2) < 2:
            raise PreconditionError("p must be at least 2")
        if self.kind == "dirac_mixture" and not 0 < p.get("delta", 0.5) < 1:
            raise PreconditionError("delta must lie in (0, 1)")

    def build(self) -> JointDist:
        p = dict(self.params)
        if self.kind == "zero_sum":
            return zero_sum_uniform(p["n"], p["p"])
        if self.kind == "dirac_mixture":
            return dirac_spike_mixture(p["n"], p["k"], p["delta"])
        if self.kind == "planted_product_mixture":
            return mix(planted_product_mixture(p["n"], p["k"], p.get("components", 2), p.get("seed", 0)))
        if self.kind == "random_dense":
            return random_dense(p["n"], p["k"], p.get("seed", 0), p.get("concentration", 1.0))
        base = random_dense(p["n"], p["k"], p.get("seed", 0))
        return noisy_coupling(base, p.get("flip", 0.2), p.get("seed", 0) + 1)


def random_space_sizes(rng: np.random.Generator, max_n: int, max_k: int, min_n: int = 2) -> list[int]:
    n = int(rng.integers(min_n, max_n + 1))
    return [int(k) for k in rng.integers(2, max_k + 1, size=n)]


def random_instance(rng: np.random.Generator, max_n: int = 5, max_k: int = 4, min_n: int = 2) -> JointDist:
    """Random dense pmf on a random small space; concentration varies so that
    sparse and near-uniform tables both appear."""
    sizes = random_space_sizes(rng, max_n, max_k, min_n)
    space = ProductSpace.discrete(sizes)
    alpha = float(rng.choice([0.1, 0.5, 1.0, 5.0]))
    pmf = rng.dirichlet(np.full(space.cells, alpha))
    if rng.random() < 0.2:
        # knock out some cells so that zero-mass conditioning events occur
        mask = rng.random(space.cells) < 0.3
        if mask.sum() < space.cells:
            pmf = np.where(mask, 0.0, pmf)
            pmf = pmf / pmf.sum()
    return JointDist(space, pmf.reshape(space.shape))


DELTA_GRID = tuple(round(0.3 + 0.05 * i, 2) for i in range(13))


def low_dtc_instances(count: int, seed: int, max_n: int = 8) -> list[tuple[JointDist, float]]:
    """Instances paired with a delta from DELTA_GRID for which DTC <= delta^3 n holds.

    Cycles through planted product mixtures, lopsided two-product mixtures
    and mildly noised products on binary
    or ternary alphabets, keeping the table at most 729 cells so every
    transport problem stays within the atom-pair cap.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        k = int(rng.choice([2, 3]))
        top = max_n if k == 2 else min(max_n, 6)
        n = int(rng.integers(3, top + 1))
        sub_seed = int(rng.integers(2**31))
        family = len(out) % 3
        if family == 0:
            comps = int(rng.integers(1, 5))
            conc = float(rng.choice([0.1, 0.3, 0.7]))
            dist = mix(planted_product_mixture(n, k, comps, sub_seed, concentration=conc))
        elif family == 1:
            # two sharp products with lopsided weights: TC is large while DTC stays
            # near the small label entropy, so conditioning becomes necessary
            bias = float(rng.uniform(0.02, 0.15))
            weight = float(rng.uniform(0.6, 0.97))
            if k == 2:
                dist = mix(opposed_products(n, bias, weight))
            else:
                lo = np.array([1 - 2 * bias, bias, bias])
                hi = np.array([bias, bias, 1 - 2 * bias])
                space = ProductSpace.discrete([k] * n)
                dist = mix(Mixture(np.array([weight, 1 - weight]), (product([lo] * n, space), product([hi] * n, space))))
        else:
            eta = float(rng.choice([0.05, 0.1, 0.2]))
            dist = noised_product(n, k, eta, sub_seed)
        # the tightest admissible delta keeps the subset search non-trivial
        d = dtc(dist, check=False)
        admissible = [g for g in DELTA_GRID if d <= g**3 * n]
        if admissible:
            pick = 0 if family < 2 else int(rng.integers(min(3, len(admissible))))
            out.append((dist, float(admissible[pick])))
    return out


def all_nonempty_subsets(n: int):
    for r in range(1, n + 1):
        yield from itertools.combinations(range(n), r)


def random_partition(rng: np.random.Generator, n: int) -> list[list[int]]:
    m = int(rng.integers(1, n + 1))
    labels = rng.integers(0, m, size=n)
    blocks = [sorted(int(i) for i in np.flatnonzero(labels == b)) for b in range(m)]
    return [b for b in blocks if b]


def random_cells(rng: np.random.Generator, k: int) -> list[list[int]]:
    """A random partition of range(k) into cells (for quantization)."""
    return random_partition(rng, k)
