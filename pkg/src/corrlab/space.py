"""Finite product spaces, dense probability tables and structural operations.

Coordinates are 0-based everywhere in the library; the CLI and the file
format translate to and from the 1-based convention.
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadMetric,
    BadPartition,
    BadShape,
    CapacityExceeded,
    EmptySubset,
    FullSubset,
    IdentityViolation,
    NegativeMass,
    NotNormalized,
    SpaceMismatch,
)

DEFAULT_CELL_CAP = 10**7
INPUT_NORM_TOL = 1e-9
IDENTITY_TOL = 1e-10
# Sums within this distance of 1 are left alone so canonical files round-trip bit-exactly.
_RENORM_SKIP = 2.0**-45


def cell_capacity() -> int:
    """Maximum number of cells in a dense table (env ``CORRLAB_CAPACITY`` overrides)."""
    raw = os.environ.get("CORRLAB_CAPACITY")
    if raw is None:
        return DEFAULT_CELL_CAP
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"CORRLAB_CAPACITY must be an integer, got {raw!r}") from None


def check_capacity(cells: int) -> None:
    cap = cell_capacity()
    if cells > cap:
        raise CapacityExceeded(f"table of {cells} cells exceeds capacity {cap}")


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        syms = tuple(str(s) for s in self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise BadShape("an alphabet needs at least one symbol")
        if len(set(syms)) != len(syms):
            raise BadShape(f"alphabet symbols are not distinct: {syms}")

    @property
    def size(self) -> int:
        return len(self.symbols)

    @classmethod
    def range(cls, k: int) -> "Alphabet":
        return cls(tuple(str(i) for i in range(k)))

    def index(self, symbol) -> int:
        if isinstance(symbol, (int, np.integer)) and not isinstance(symbol, bool):
            if 0 <= symbol < self.size:
                return int(symbol)
            raise KeyError(symbol)
        return self.symbols.index(str(symbol))


def discrete_metric(k: int) -> np.ndarray:
    return 1.0 - np.eye(k)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


class ProductSpace:
    """Ordered finite alphabets, each carrying a symmetric metric of diameter <= 1."""

    __slots__ = ("alphabets", "metrics", "_discrete")

    def __init__(self, alphabets: Sequence[Alphabet], metrics: Sequence[np.ndarray] | None = None):
        alphabets = tuple(a if isinstance(a, Alphabet) else Alphabet(tuple(a)) for a in alphabets)
        if not alphabets:
            raise BadShape("a product space needs at least one coordinate")
        if metrics is None:
            metrics = [None] * len(alphabets)
        if len(metrics) != len(alphabets):
            raise BadShape("one metric table per coordinate is required")
        frozen = []
        discrete = []
        for i, (alph, met) in enumerate(zip(alphabets, metrics)):
            if met is None:
                m = discrete_metric(alph.size)
            else:
                m = np.asarray(met, dtype=float)
                if m.shape != (alph.size, alph.size):
                    raise BadMetric(f"metric {i} has shape {m.shape}, expected {(alph.size, alph.size)}")
                if not np.allclose(m, m.T, atol=0, rtol=0):
                    raise BadMetric(f"metric {i} is not symmetric")
                if np.any(np.diag(m) != 0):
                    raise BadMetric(f"metric {i} is not zero on the diagonal")
                if np.any(m < 0) or np.any(m > 1):
                    raise BadMetric(f"metric {i} has entries outside [0, 1]")
            frozen.append(_freeze(m))
            discrete.append(bool(np.array_equal(m, discrete_metric(alph.size))))
        object.__setattr__(self, "alphabets", alphabets)
        object.__setattr__(self, "metrics", tuple(frozen))
        object.__setattr__(self, "_discrete", tuple(discrete))

    def __setattr__(self, name, value):
        raise AttributeError("ProductSpace is immutable")

    @classmethod
    def discrete(cls, sizes: Iterable[int]) -> "ProductSpace":
        return cls([Alphabet.range(k) for k in sizes])

    @property
    def n(self) -> int:
        return len(self.alphabets)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.size for a in self.alphabets)

    @property
    def cells(self) -> int:
        return math.prod(self.shape)

    @property
    def is_discrete(self) -> bool:
        return all(self._discrete)

    def sub(self, coords: Sequence[int]) -> "ProductSpace":
        return ProductSpace([self.alphabets[i] for i in coords], [self.metrics[i] for i in coords])

    def with_discrete_metrics(self) -> "ProductSpace":
        return ProductSpace(self.alphabets)

    def point_index(self, point: Sequence) -> tuple[int, ...]:
        from .errors import BadPoint

        if len(point) != self.n:
            raise BadPoint(f"point has {len(point)} coordinates, space has {self.n}")
        try:
            return tuple(a.index(s) for a, s in zip(self.alphabets, point))
        except (KeyError, ValueError):
            raise BadPoint(f"point {tuple(point)} is not in the space") from None

    def __eq__(self, other):
        if not isinstance(other, ProductSpace):
            return NotImplemented
        return self.alphabets == other.alphabets and all(
            np.array_equal(a, b) for a, b in zip(self.metrics, other.metrics)
        )

    def __hash__(self):
        return hash(self.alphabets)

    def __repr__(self):
        return f"ProductSpace(shape={self.shape})"


def _check_subset(n: int, S: Iterable[int], *, allow_empty=False, allow_full=True) -> tuple[int, ...]:
    S = tuple(sorted(set(int(i) for i in S)))
    if any(i < 0 or i >= n for i in S):
        raise IndexError(f"coordinate subset {S} out of range for n={n}")
    if not S and not allow_empty:
        raise EmptySubset("coordinate subset is empty")
    if len(S) == n and not allow_full:
        raise FullSubset("coordinate subset is the whole index set")
    return S


@dataclass(frozen=True, eq=False)
class JointDist:
    """A normalized dense pmf over a ProductSpace, stored with shape ``space.shape``.

    Construct with :func:`make_joint`; the raw constructor trusts its input.
    """

    space: ProductSpace
    pmf: np.ndarray
    _entropy_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.pmf, dtype=float).reshape(self.space.shape)
        if arr.flags.writeable or arr.base is not None:
            arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pmf", arr)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def flat(self) -> np.ndarray:
        return self.pmf.reshape(-1)

    def support(self) -> np.ndarray:
        """Flat indices of cells with positive mass, ascending."""
        return np.flatnonzero(self.flat > 0)

    def allclose(self, other: "JointDist", atol: float = 1e-10) -> bool:
        return self.space == other.space and bool(np.allclose(self.pmf, other.pmf, rtol=0, atol=atol))

    def __repr__(self):
        return f"JointDist(shape={self.space.shape}, support={len(self.support())})"


def make_joint(space: ProductSpace, pmf) -> JointDist:
    arr = np.asarray(pmf, dtype=float)
    check_capacity(space.cells)
    if arr.size != space.cells:
        raise BadShape(f"pmf has {arr.size} entries, space has {space.cells} cells")
    if np.any(np.isnan(arr)):
        raise NegativeMass("pmf contains NaN")
    if np.any(arr < 0):
        raise NegativeMass(f"pmf has negative entries (min {arr.min()!r})")
    total = math.fsum(arr.reshape(-1))
    if abs(total - 1.0) > INPUT_NORM_TOL:
        raise NotNormalized(f"pmf sums to {total!r}")
    if abs(total - 1.0) > _RENORM_SKIP:
        arr = arr / total
    return JointDist(space, arr.reshape(space.shape))


def point_mass(space: ProductSpace, point: Sequence) -> JointDist:
    arr = np.zeros(space.shape)
    arr[space.point_index(point)] = 1.0
    return JointDist(space, arr)


def uniform(space: ProductSpace) -> JointDist:
    return JointDist(space, np.full(space.shape, 1.0 / space.cells))


def product(factors: Sequence[np.ndarray], space: ProductSpace | None = None) -> JointDist:
    """Product measure of one-dimensional pmfs."""
    factors = [np.asarray(f, dtype=float) for f in factors]
    if space is None:
        space = ProductSpace.discrete(len(f) for f in factors)
    if tuple(len(f) for f in factors) != space.shape:
        raise BadShape("factor lengths do not match the space")
    check_capacity(space.cells)
    arr = factors[0]
    for f in factors[1:]:
        arr = np.multiply.outer(arr, f)
    return JointDist(space, arr)


def marginal_array(dist: JointDist, S: Sequence[int]) -> np.ndarray:
    """Marginal table on sorted coordinates ``S`` (empty S gives a 0-d array holding 1)."""
    S = tuple(S)
    other = tuple(i for i in range(dist.n) if i not in S)
    return dist.pmf.sum(axis=other) if other else dist.pmf


def marginal(dist: JointDist, S: Iterable[int]) -> JointDist:
    S = _check_subset(dist.n, S)
    if len(S) == dist.n:
        return dist
    return JointDist(dist.space.sub(S), marginal_array(dist, S))


def coordinate_marginals(dist: JointDist) -> list[np.ndarray]:
    return [marginal_array(dist, (i,)) for i in range(dist.n)]


def product_of_marginals(dist: JointDist) -> JointDist:
    return product(coordinate_marginals(dist), dist.space)


def is_product(dist: JointDist, atol: float = IDENTITY_TOL) -> bool:
    return bool(np.allclose(dist.pmf, product_of_marginals(dist).pmf, rtol=0, atol=atol))


@dataclass(frozen=True)
class Mixture:
    weights: np.ndarray
    components: tuple[JointDist, ...]
    labels: tuple | None = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        comps = tuple(self.components)
        if w.ndim != 1 or len(w) != len(comps) or not comps:
            raise BadShape("weights and components must be non-empty and of equal length")
        if np.any(w < 0):
            raise NegativeMass("mixture weights must be non-negative")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise NotNormalized(f"mixture weights sum to {math.fsum(w)!r}")
        space = comps[0].space
        if any(c.space != space for c in comps[1:]):
            raise SpaceMismatch("mixture components live on different spaces")
        labels = tuple(range(len(comps))) if self.labels is None else tuple(self.labels)
        if len(labels) != len(comps):
            raise BadShape("one label per component is required")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "labels", labels)

    @property
    def space(self) -> ProductSpace:
        return self.components[0].space

    def __len__(self):
        return len(self.components)


def mix(mixture: Mixture) -> JointDist:
    space = mixture.space
    if any(c.space != space for c in mixture.components):
        raise SpaceMismatch("mixture components live on different spaces")
    stacked = np.stack([c.pmf for c in mixture.components])
    return JointDist(space, np.tensordot(mixture.weights, stacked, axes=1))


@dataclass(frozen=True)
class Kernel:
    """Conditional distributions given the values of the coordinates in ``base_subset``.

    ``table`` maps each value index tuple ``y`` of positive marginal mass to the
    conditional law on the full space, with the base coordinates pinned to ``y``.
    """

    base_subset: tuple[int, ...]
    table: Mapping[tuple[int, ...], JointDist]
    base_marginal: JointDist

    def as_mixture(self) -> Mixture:
        ys = sorted(self.table)
        w = np.array([self.base_marginal.pmf[y] for y in ys])
        return Mixture(w / math.fsum(w), tuple(self.table[y] for y in ys), tuple(ys))

    def reconstitute(self) -> JointDist:
        return mix(self.as_mixture())


def disintegrate(dist: JointDist, S: Iterable[int], check: bool = True) -> Kernel:
    S = _check_subset(dist.n, S, allow_full=False)
    base = marginal(dist, S)
    table = {}
    for y in zip(*np.nonzero(base.pmf)):
        y = tuple(int(v) for v in y)
        idx = [slice(None)] * dist.n
        for i, v in zip(S, y):
            idx[i] = v
        idx = tuple(idx)
        cond = np.zeros(dist.space.shape)
        cond[idx] = dist.pmf[idx] / base.pmf[y]
        table[y] = JointDist(dist.space, cond)
    kernel = Kernel(S, table, base)
    if check:
        back = kernel.reconstitute()
        err = float(np.max(np.abs(back.pmf - dist.pmf)))
        if err > IDENTITY_TOL:
            raise IdentityViolation(f"disintegration does not reconstitute (error {err:.3e})")
    return kernel


def _normalize_partition(alph: Alphabet, cells) -> list[list[int]]:
    if cells is None:
        return [[i] for i in range(alph.size)]
    out = []
    try:
        for cell in cells:
            out.append([alph.index(s) for s in cell])
    except (KeyError, ValueError) as exc:
        raise BadPartition(f"partition names a symbol outside the alphabet: {exc}") from None
    flat = [i for cell in out for i in cell]
    if any(not cell for cell in out):
        raise BadPartition("partition has an empty cell")
    if len(flat) != len(set(flat)):
        raise BadPartition("partition cells overlap")
    if set(flat) != set(range(alph.size)):
        raise BadPartition("partition does not cover the alphabet")
    return out


def quantize(dist: JointDist, partitions: Sequence) -> JointDist:
    """Push ``dist`` forward through per-coordinate cell maps.

    ``partitions[i]`` is a list of cells (symbols or indices), or None for the
    identity partition. Cell symbols are the member symbols joined by ``|``.
    """
    if len(partitions) != dist.n:
        raise BadPartition(f"need {dist.n} partitions, got {len(partitions)}")
    arr = dist.pmf
    alphabets = []
    for i, (alph, cells) in enumerate(zip(dist.space.alphabets, partitions)):
        cells = _normalize_partition(alph, cells)
        member = np.zeros((len(cells), alph.size))
        for c, cell in enumerate(cells):
            member[c, cell] = 1.0
        arr = np.moveaxis(np.tensordot(member, arr, axes=([1], [i])), 0, i)
        alphabets.append(Alphabet(tuple("|".join(alph.symbols[j] for j in cell) for cell in cells)))
    return JointDist(ProductSpace(alphabets), arr)


def _check_blocks(n: int, blocks) -> list[tuple[int, ...]]:
    blocks = [tuple(sorted(int(i) for i in b)) for b in blocks]
    flat = [i for b in blocks for i in b]
    if any(not b for b in blocks) or sorted(flat) != list(range(n)):
        raise BadPartition(f"blocks {blocks} do not partition range({n})")
    return blocks


def clump(dist: JointDist, blocks: Sequence[Iterable[int]]) -> JointDist:
    """Regroup coordinates into blocks; each block becomes one coordinate.

    A block's alphabet is the Cartesian product of its members' alphabets
    (symbols joined by ``,``) and its metric is the average of theirs.
    """
    blocks = _check_blocks(dist.n, blocks)
    order = [i for b in blocks for i in b]
    arr = np.transpose(dist.pmf, order)
    sp = dist.space
    alphabets, metrics = [], []
    for b in blocks:
        syms = tuple(",".join(t) for t in itertools.product(*(sp.alphabets[i].symbols for i in b)))
        alphabets.append(Alphabet(syms))
        met = np.zeros((1, 1))
        for i in b:
            met = (met[:, None, :, None] + sp.metrics[i][None, :, None, :]).reshape(
                met.shape[0] * sp.alphabets[i].size, -1
            )
        metrics.append(met / len(b))
    space = ProductSpace(alphabets, metrics)
    return JointDist(space, arr.reshape(space.shape))


def extend_with_channel(dist: JointDist, source: int, channel: np.ndarray, symbols=None) -> JointDist:
    """Adjoin a new last coordinate Y drawn from ``channel[x_source, :]``."""
    channel = np.asarray(channel, dtype=float)
    k = dist.space.alphabets[source].size
    if channel.ndim != 2 or channel.shape[0] != k:
        raise BadShape(f"channel must have {k} rows")
    if np.any(channel < 0) or not np.allclose(channel.sum(axis=1), 1.0, atol=1e-12, rtol=0):
        raise NotNormalized("channel rows must be probability vectors")
    shape = [1] * dist.n + [channel.shape[1]]
    shape[source] = k
    arr = dist.pmf[..., None] * channel.reshape(shape)
    alph = Alphabet.range(channel.shape[1]) if symbols is None else Alphabet(tuple(symbols))
    space = ProductSpace(list(dist.space.alphabets) + [alph], list(dist.space.metrics) + [None])
    check_capacity(space.cells)
    return JointDist(space, arr)
