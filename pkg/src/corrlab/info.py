"""Entropy, divergence, TC, DTC and their conditional and reference-measure forms.

All values are computed in nats. ``base`` arguments only rescale the returned
number. Where two formulas for the same quantity are available, both are
evaluated and compared at ``CROSS_TOL`` unless ``check=False``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    CoverDeficient,
    EmptySubset,
    FullSubset,
    IdentityViolation,
    InfiniteDivergence,
    OverlappingSubsets,
    SpaceMismatch,
)
from .space import (
    JointDist,
    Mixture,
    coordinate_marginals,
    disintegrate,
    marginal_array,
    mix,
    product,
    product_of_marginals,
)

CROSS_TOL = 1e-9


class LogBase(enum.Enum):
    NATURAL = "e"
    BITS = "2"
    DITS = "10"

    @property
    def factor(self) -> float:
        """Multiplier taking a value in nats to this base."""
        return {"e": 1.0, "2": 1.0 / math.log(2), "10": 1.0 / math.log(10)}[self.value]

    def convert(self, nats: float) -> float:
        return nats * self.factor

    @classmethod
    def parse(cls, base) -> "LogBase":
        if isinstance(base, LogBase):
            return base
        if base is None:
            return cls.NATURAL
        key = str(base).strip().lower()
        if key in ("e", "nat", "nats", "natural", "ln"):
            return cls.NATURAL
        if key in ("2", "bit", "bits"):
            return cls.BITS
        if key in ("10", "dit", "dits", "hartley"):
            return cls.DITS
        raise ValueError(f"unsupported log base {base!r}")


def _out(value: float, base) -> float:
    return LogBase.parse(base).convert(value) if base is not None else value


def _xlogx_sum(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def entropy_of_pmf(p) -> float:
    """Shannon entropy (nats) of a probability vector, with 0 log 0 = 0."""
    return max(_xlogx_sum(np.asarray(p, dtype=float).reshape(-1)), 0.0)


def binary_entropy(d: float) -> float:
    return entropy_of_pmf([d, 1.0 - d])


def _subset(dist: JointDist, S) -> frozenset[int]:
    S = frozenset(int(i) for i in S)
    if any(i < 0 or i >= dist.n for i in S):
        raise IndexError(f"coordinate subset {sorted(S)} out of range for n={dist.n}")
    return S


def H(dist: JointDist, S: Iterable[int]) -> float:
    """Joint entropy of X_S in nats, memoized on the distribution."""
    S = _subset(dist, S)
    cache = dist._entropy_cache
    if S not in cache:
        cache[S] = 0.0 if not S else entropy_of_pmf(marginal_array(dist, sorted(S)))
    return cache[S]


def _full(dist: JointDist) -> frozenset[int]:
    return frozenset(range(dist.n))


def entropy(dist: JointDist, base=None) -> float:
    return _out(H(dist, _full(dist)), base)


def _disjoint(*subsets: frozenset) -> None:
    seen: set[int] = set()
    for s in subsets:
        if seen & s:
            raise OverlappingSubsets(f"subsets {[sorted(x) for x in subsets]} overlap")
        seen |= s


def cond_entropy(dist: JointDist, A, B=(), base=None) -> float:
    A, B = _subset(dist, A), _subset(dist, B)
    if not A:
        raise EmptySubset("conditional entropy needs a non-empty target subset")
    _disjoint(A, B)
    return _out(max(H(dist, A | B) - H(dist, B), 0.0), base)


def kl_divergence(p: JointDist, q: JointDist, base=None) -> float:
    """D(p || q); ``math.inf`` when p charges a cell that q does not."""
    if p.space.shape != q.space.shape:
        raise SpaceMismatch("divergence between distributions on different spaces")
    return _out(_kl(p.flat, q.flat), base)


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    pm = p[mask]
    return max(float(np.sum(pm * (np.log(pm) - np.log(q[mask])))), 0.0)


def _cross(name: str, values: Sequence[float], tol: float = CROSS_TOL) -> None:
    lo, hi = min(values), max(values)
    if hi - lo > tol:
        raise IdentityViolation(f"{name}: formulas disagree {list(values)}")


def mutual_info(dist: JointDist, A, B, base=None, check: bool = True) -> float:
    A, B = _subset(dist, A), _subset(dist, B)
    if not A or not B:
        raise EmptySubset("mutual information needs two non-empty subsets")
    _disjoint(A, B)
    value = max(H(dist, A) + H(dist, B) - H(dist, A | B), 0.0)
    if check:
        joint_axes = sorted(A | B)
        joint = marginal_array(dist, joint_axes)
        pa = marginal_array(dist, sorted(A))
        pb = marginal_array(dist, sorted(B))
        # product table laid out in A-then-B order; transpose the joint to match
        perm = [joint_axes.index(i) for i in sorted(A)] + [joint_axes.index(i) for i in sorted(B)]
        joint = np.transpose(joint, perm)
        via_kl = _kl(joint.reshape(-1), np.multiply.outer(pa, pb).reshape(-1))
        _cross("mutual_info", [value, via_kl])
    return _out(value, base)


def cond_mutual_info(dist: JointDist, A, B, C=(), base=None) -> float:
    """I(X_A ; X_B | X_C) = H(A|C) - H(A|B,C)."""
    A, B, C = _subset(dist, A), _subset(dist, B), _subset(dist, C)
    if not A or not B:
        raise EmptySubset("conditional mutual information needs non-empty A and B")
    _disjoint(A, B, C)
    value = H(dist, A | C) - H(dist, C) - H(dist, A | B | C) + H(dist, B | C)
    return _out(max(value, 0.0), base)


# ---------------------------------------------------------------------------
# total correlation and dual total correlation


def _tc_definition(dist: JointDist) -> float:
    return sum(H(dist, {i}) for i in range(dist.n)) - H(dist, _full(dist))


def _dtc_definition(dist: JointDist) -> float:
    full = _full(dist)
    h = H(dist, full)
    return h - sum(h - H(dist, full - {i}) for i in range(dist.n))


def tc_chain(dist: JointDist, order: Sequence[int] | None = None) -> float:
    """sum_i I(X_{o(i)} ; X_{o(1..i-1)})."""
    order = list(range(dist.n)) if order is None else list(order)
    total, prefix = 0.0, frozenset()
    for i in order:
        if prefix:
            total += H(dist, {i}) + H(dist, prefix) - H(dist, prefix | {i})
        prefix = prefix | {i}
    return total


def dtc_chain(dist: JointDist, order: Sequence[int] | None = None, tail: bool = False) -> float:
    """sum_i I(X_{o(i)} ; X_rest | X_{o(1..i-1)}) where rest is everything else, or
    only the later coordinates when ``tail`` is set."""
    order = list(range(dist.n)) if order is None else list(order)
    full = frozenset(order)
    total, prefix = 0.0, frozenset()
    for pos, i in enumerate(order):
        other = frozenset(order[pos + 1:]) if tail else full - prefix - {i}
        if other:
            total += cond_mutual_info(dist, {i}, other, prefix)
        prefix = prefix | {i}
    return total


def tc(dist: JointDist, base=None, check: bool = True) -> float:
    value = _tc_definition(dist)
    if check and dist.n > 1:
        via_kl = _kl(dist.flat, product_of_marginals(dist).flat)
        _cross("tc", [value, via_kl, tc_chain(dist)])
    return _out(max(value, 0.0), base)


def dtc(dist: JointDist, base=None, check: bool = True) -> float:
    value = _dtc_definition(dist)
    if check and dist.n > 1:
        _cross("dtc", [value, dtc_chain(dist), dtc_chain(dist, tail=True)])
    return _out(max(value, 0.0), base)


def full_mutual_infos(dist: JointDist) -> list[float]:
    """I(X_i ; X_{[n] minus i}) for every coordinate (zero when n = 1)."""
    full = _full(dist)
    if dist.n == 1:
        return [0.0]
    return [max(H(dist, {i}) + H(dist, full - {i}) - H(dist, full), 0.0) for i in range(dist.n)]


def dtc_permutation_average(dist: JointDist) -> float:
    """Exact average of the chain sum over all n! coordinate orderings."""
    n = dist.n
    full = _full(dist)
    term_cache: dict = {}

    def term(j, prefix):
        key = (j, prefix)
        if key not in term_cache:
            rest = full - prefix - {j}
            term_cache[key] = cond_mutual_info(dist, {j}, rest, prefix) if rest else 0.0
        return term_cache[key]

    total = 0.0
    count = 0
    for perm in itertools.permutations(range(n)):
        prefix = frozenset()
        s = 0.0
        for j in perm:
            s += term(j, prefix)
            prefix = prefix | {j}
        total += s
        count += 1
    return total / count


# ---------------------------------------------------------------------------
# conditional versions


def _proper(dist: JointDist, S) -> frozenset[int]:
    S = _subset(dist, S)
    if len(S) == dist.n:
        raise FullSubset("conditioning on every coordinate is not allowed")
    return S


def _cond_tc_entropy(dist: JointDist, S: frozenset) -> float:
    free = [i for i in range(dist.n) if i not in S]
    hs = H(dist, S)
    return sum(H(dist, S | {i}) - hs for i in free) - (H(dist, _full(dist)) - hs)


def _cond_dtc_entropy(dist: JointDist, S: frozenset) -> float:
    full = _full(dist)
    h = H(dist, full)
    free = [i for i in range(dist.n) if i not in S]
    return (h - H(dist, S)) - sum(h - H(dist, full - {i}) for i in free)


def cond_tc(dist: JointDist, S=(), base=None, check: bool = True) -> float:
    """TC(X_1; ...; X_n | X_S)."""
    S = _proper(dist, S)
    if not S:
        return tc(dist, base=base, check=check)
    value = _cond_tc_entropy(dist, S)
    if check:
        kernel = disintegrate(dist, S, check=False)
        avg = sum(kernel.base_marginal.pmf[y] * tc(c, check=False) for y, c in kernel.table.items())
        _cross("cond_tc", [value, avg])
    return _out(max(value, 0.0), base)


def cond_dtc(dist: JointDist, S=(), base=None, check: bool = True) -> float:
    """DTC(X_1; ...; X_n | X_S)."""
    S = _proper(dist, S)
    if not S:
        return dtc(dist, base=base, check=check)
    value = _cond_dtc_entropy(dist, S)
    if check:
        kernel = disintegrate(dist, S, check=False)
        avg = sum(kernel.base_marginal.pmf[y] * dtc(c, check=False) for y, c in kernel.table.items())
        _cross("cond_dtc", [value, avg])
    return _out(max(value, 0.0), base)


def cond_budget_terms(dist: JointDist, S) -> tuple[float, float]:
    """(conditional TC, conditional DTC) given X_S by the entropy formulas only."""
    S = _proper(dist, S)
    return max(_cond_tc_entropy(dist, S), 0.0), max(_cond_dtc_entropy(dist, S), 0.0)


# ---------------------------------------------------------------------------
# reference measures


def _check_refs(dist: JointDist, refs) -> list[np.ndarray]:
    refs = [np.asarray(r, dtype=float).reshape(-1) for r in refs]
    if len(refs) != dist.n or any(len(r) != k for r, k in zip(refs, dist.space.shape)):
        raise SpaceMismatch("one reference pmf per coordinate, of matching length, is required")
    for i, (mi, r) in enumerate(zip(coordinate_marginals(dist), refs)):
        if math.isinf(_kl(mi, r)):
            raise InfiniteDivergence(f"marginal {i} is not absolutely continuous w.r.t. its reference")
    return refs


def divergence_to_product(dist: JointDist, refs) -> float:
    """D(mu || lambda_1 x ... x lambda_n)."""
    return _kl(dist.flat, product(refs, dist.space).flat)


def conditional_divergence_sum(dist: JointDist, refs) -> float:
    """sum_i  integral D(mu_{i,z} || lambda_i) mu_{[n] minus i}(dz)."""
    p = dist.pmf
    total = 0.0
    for i, r in enumerate(refs):
        rest = p.sum(axis=i, keepdims=True)
        with np.errstate(divide="ignore", invalid="ignore"):
            cond = np.where(rest > 0, p / rest, 0.0)
        shape = [1] * dist.n
        shape[i] = len(r)
        lam = np.broadcast_to(r.reshape(shape), p.shape)
        mask = p > 0
        if np.any(lam[mask] <= 0):
            return math.inf
        # sum_z mu(z) sum_x cond log(cond/lam) = sum_{x,z} p log(cond/lam)
        total += float(np.sum(p[mask] * (np.log(cond[mask]) - np.log(lam[mask]))))
    return total


def csiszar_gap(dist: JointDist, refs) -> float:
    """D(mu||prod lambda) - D(mu||prod mu_i) - sum_i D(mu_i||lambda_i), zero in theory."""
    refs = _check_refs(dist, refs)
    margs = coordinate_marginals(dist)
    lhs = divergence_to_product(dist, refs)
    rhs = _kl(dist.flat, product(margs, dist.space).flat) + sum(_kl(m, r) for m, r in zip(margs, refs))
    return lhs - rhs


def tc_ref(dist: JointDist, refs, base=None, check: bool = True) -> float:
    refs = _check_refs(dist, refs)
    margs = coordinate_marginals(dist)
    value = divergence_to_product(dist, refs) - sum(_kl(m, r) for m, r in zip(margs, refs))
    if check:
        _cross("tc_ref", [value, tc(dist, check=False)])
        if abs(csiszar_gap(dist, refs)) > CROSS_TOL:
            raise IdentityViolation("Csiszar identity fails")
    return _out(value, base)


def dtc_ref(dist: JointDist, refs, base=None, check: bool = True) -> float:
    refs = _check_refs(dist, refs)
    upper = conditional_divergence_sum(dist, refs)
    d = divergence_to_product(dist, refs)
    value = upper - d
    if check:
        _cross("dtc_ref", [value, dtc(dist, check=False)])
        if abs(csiszar_gap(dist, refs)) > CROSS_TOL:
            raise IdentityViolation("Csiszar identity fails")
        if d > upper + CROSS_TOL:
            raise IdentityViolation("tensorization inequality fails")
    return _out(value, base)


# ---------------------------------------------------------------------------
# mixtures and Shearer gaps


def mixture_mutual_info(mixture: Mixture, base=None) -> float:
    """sum_j w_j D(mu_j || mixture), the information between label and sample."""
    avg = mix(mixture).flat
    total = 0.0
    for w, comp in zip(mixture.weights, mixture.components):
        if w > 0:
            total += w * _kl(comp.flat, avg)
    return _out(max(total, 0.0), base)


def shearer_gap(dist: JointDist, cover: Sequence[Iterable[int]], k: int, base=None) -> float:
    """(1/k) sum_{S in cover} H(X_S) - H(X_[n]); needs every coordinate covered k times."""
    if k < 1:
        raise CoverDeficient("cover multiplicity k must be positive")
    cover = [_subset(dist, S) for S in cover]
    counts = [sum(i in S for S in cover) for i in range(dist.n)]
    if min(counts) < k:
        raise CoverDeficient(f"coordinate coverage {counts} is below k={k}")
    value = sum(H(dist, S) for S in cover) / k - H(dist, _full(dist))
    return _out(value, base)


def singleton_cover(n: int) -> list[tuple[int, ...]]:
    return [(i,) for i in range(n)]


def codim1_cover(n: int) -> list[tuple[int, ...]]:
    return [tuple(j for j in range(n) if j != i) for i in range(n)]


# ---------------------------------------------------------------------------
# report


@dataclass(frozen=True)
class InfoReport:
    entropy: float
    coordinate_entropies: tuple[float, ...]
    conditional_entropies: tuple[float, ...]
    tc: float
    dtc: float
    full_mutual_infos: tuple[float, ...]
    shearer_singletons: float
    shearer_codim1: float | None
    base: str

    def to_dict(self) -> dict:
        d = asdict(self)
        for key, val in d.items():
            if isinstance(val, tuple):
                d[key] = list(val)
        return d


def info_report(dist: JointDist, base=None) -> InfoReport:
    """All headline measures of ``dist``, with the sandwich invariants enforced."""
    lb = LogBase.parse(base)
    n = dist.n
    full = _full(dist)
    h = H(dist, full)
    hi = [H(dist, {i}) for i in range(n)]
    hc = [h - H(dist, full - {i}) for i in range(n)]
    t = tc(dist)
    d = dtc(dist)
    mis = full_mutual_infos(dist)
    if abs(t + d - sum(mis)) > CROSS_TOL:
        raise IdentityViolation("TC + DTC differs from the sum of full mutual informations")
    top = max(mis)
    for name, v in (("tc", t), ("dtc", d)):
        if v < top - CROSS_TOL or v > (n - 1) * top + CROSS_TOL:
            raise IdentityViolation(f"{name} escapes the max-mutual-information sandwich")
    gap1 = shearer_gap(dist, singleton_cover(n), 1)
    gapn = shearer_gap(dist, codim1_cover(n), n - 1) if n >= 2 else None
    c = lb.convert
    return InfoReport(
        entropy=c(h),
        coordinate_entropies=tuple(c(x) for x in hi),
        conditional_entropies=tuple(c(max(x, 0.0)) for x in hc),
        tc=c(t),
        dtc=c(d),
        full_mutual_infos=tuple(c(x) for x in mis),
        shearer_singletons=c(gap1),
        shearer_codim1=None if gapn is None else c(gapn),
        base=lb.value,
    )
