"""Property suites: identities, inequalities and transport facts checked on many instances.

Each check returns a residual that must not exceed the tolerance: an
absolute difference for identities, the amount by which the larger side
exceeds the smaller for inequalities. Auxiliary randomness (orderings,
partitions, reference measures, partners) comes from a seeded generator.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .corpus import random_cells, random_instance, random_partition
from .info import (
    cond_dtc,
    cond_entropy,
    cond_mutual_info,
    conditional_divergence_sum,
    csiszar_gap,
    divergence_to_product,
    dtc,
    dtc_chain,
    dtc_permutation_average,
    full_mutual_infos,
    mixture_mutual_info,
    mutual_info,
    shearer_gap,
    codim1_cover,
    singleton_cover,
    tc,
    tc_chain,
    _kl,
)
from .oracles import transport_by_tree_enumeration
from .space import (
    JointDist,
    Mixture,
    ProductSpace,
    clump,
    coordinate_marginals,
    extend_with_channel,
    marginal,
    mix,
    product_of_marginals,
    quantize,
)
from .transport import (
    cost_matrix,
    fano_tc_bound,
    marton_check,
    solve_transport,
    total_variation,
    transport_distance,
    transport_value,
)

TOL = 1e-9
SUITES = ("identities", "inequalities", "transport", "permutation")


@dataclass
class CheckResult:
    name: str
    runs: int = 0
    failures: int = 0
    worst: float = 0.0
    seconds: float = 0.0
    tol: float = TOL
    counterexample: JointDist | None = None
    message: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, residual: float, dist: JointDist | None, note: str = "") -> None:
        self.runs += 1
        if not math.isfinite(residual) and residual > 0:
            residual = math.inf
        self.worst = max(self.worst, residual)
        if residual > self.tol:
            self.failures += 1
            if self.counterexample is None:
                self.counterexample = dist
                self.message = note or f"residual {residual:.3e}"


@dataclass
class SuiteResult:
    suite: str
    checks: dict[str, CheckResult] = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def check(self, name: str, tol: float = TOL) -> CheckResult:
        if name not in self.checks:
            self.checks[name] = CheckResult(name, tol=tol)
        return self.checks[name]

    def run(self, name: str, fn: Callable[[], float], dist: JointDist | None, tol: float = TOL) -> None:
        c = self.check(name, tol)
        t0 = time.perf_counter()
        try:
            residual = float(fn())
            note = ""
        except Exception as exc:  # a raising check is a failed check, reported with its cause
            residual, note = math.inf, f"{type(exc).__name__}: {exc}"
        c.seconds += time.perf_counter() - t0
        c.record(residual, dist, note)

    def table(self) -> str:
        lines = [f"{'check':34} {'runs':>6} {'fail':>5} {'worst':>10} {'time s':>8}  status"]
        for c in self.checks.values():
            lines.append(
                f"{c.name:34} {c.runs:6d} {c.failures:5d} {c.worst:10.2e} {c.seconds:8.3f}  "
                + ("pass" if c.passed else "FAIL")
            )
        return "\n".join(lines)


def random_dists(count: int, seed: int, max_n: int = 5, max_k: int = 4, max_cells: int | None = None) -> list[JointDist]:
    """Seeded random instances; ``max_cells`` rejects spaces with larger tables."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        d = random_instance(rng, max_n, max_k)
        if max_cells is None or d.space.cells <= max_cells:
            out.append(d)
    return out


def fixed_space_dists(count: int, seed: int, n: int, k: int) -> list[JointDist]:
    """Seeded random instances on the single space {0..k-1}^n."""
    rng = np.random.default_rng(seed)
    space = ProductSpace.discrete([k] * n)
    out = []
    for _ in range(count):
        alpha = float(rng.choice([0.1, 0.5, 1.0, 5.0]))
        out.append(JointDist(space, rng.dirichlet(np.full(space.cells, alpha)).reshape(space.shape)))
    return out


def random_refs(rng: np.random.Generator, dist: JointDist) -> list[np.ndarray]:
    """Fully supported reference pmfs, one per coordinate."""
    return [rng.dirichlet(np.ones(k)) * 0.9 + 0.1 / k for k in dist.space.shape]


def _random_like(rng: np.random.Generator, dist: JointDist) -> JointDist:
    """A partner on the same space: fresh Dirichlet, the product of marginals, or a perturbation."""
    r = rng.random()
    if r < 0.3:
        return product_of_marginals(dist)
    fresh = rng.dirichlet(np.full(dist.space.cells, float(rng.choice([0.3, 1.0]))))
    if r < 0.6:
        pmf = fresh
    else:
        t = float(rng.uniform(0.01, 0.5))
        pmf = (1 - t) * dist.flat + t * fresh
    return JointDist(dist.space, (pmf / pmf.sum()).reshape(dist.space.shape))


# ---------------------------------------------------------------------------
# identities


def _recurse_tc(d: JointDist) -> float:
    n = d.n
    head = marginal(d, range(n - 1))
    return abs(tc(d) - tc(head) - mutual_info(d, {n - 1}, set(range(n - 1))))


def _recurse_dtc(d: JointDist) -> float:
    n = d.n
    head = marginal(d, range(n - 1))
    extra = sum(cond_mutual_info(d, {i}, {n - 1}, set(range(n - 1)) - {i}) for i in range(n - 1))
    return abs(dtc(d) - dtc(head) - extra)


def _tc_clumping(d: JointDist, blocks) -> float:
    inner = sum(tc(marginal(d, b)) for b in blocks)
    return abs(tc(d) - tc(clump(d, blocks)) - inner)


def _dtc_clumping(d: JointDist, blocks) -> float:
    n = d.n
    inner = 0.0
    for b in blocks:
        rest = [i for i in range(n) if i not in b]
        if len(b) > 1:
            # DTC of the block given everything outside it
            value = cond_dtc(d, rest) if rest else dtc(d)
            # cond_dtc counts the free coordinates only, which here are exactly the block
            inner += value
    return abs(dtc(d) - dtc(clump(d, blocks)) - inner)


def _mini_clumping(d: JointDist) -> float:
    n = d.n
    X = set(range(n - 1))
    return abs(dtc(d) - mutual_info(d, X, {n - 1}) - cond_dtc(d, {n - 1}))


def _ref_tc(d: JointDist, refs) -> float:
    margs = coordinate_marginals(d)
    return abs(divergence_to_product(d, refs) - tc(d) - sum(_kl(m, r) for m, r in zip(margs, refs)))


def _ref_dtc(d: JointDist, refs) -> float:
    return abs(dtc(d) - (conditional_divergence_sum(d, refs) - divergence_to_product(d, refs)))


def _kl_chains(d: JointDist, rng) -> float:
    """Chain rules for D on a random two-block clumping X = X_A, Y = X_B."""
    n = d.n
    size = int(rng.integers(1, n))
    A = sorted(int(i) for i in rng.choice(n, size=size, replace=False))
    B = [i for i in range(n) if i not in A]
    c = clump(d, [A, B])
    lam = c.pmf
    mu, nu = lam.sum(axis=1), lam.sum(axis=0)
    mu_p = rng.dirichlet(np.ones(len(mu))) * 0.9 + 0.1 / len(mu)
    nu_p = rng.dirichlet(np.ones(len(nu))) * 0.9 + 0.1 / len(nu)

    def avg_kernel(ref):
        return sum(mu[x] * _kl(lam[x] / mu[x], ref) for x in range(len(mu)) if mu[x] > 0)

    def joint_kl(a, b):
        return _kl(lam.reshape(-1), np.multiply.outer(a, b).reshape(-1))

    info = mutual_info(c, {0}, {1})
    residuals = [
        joint_kl(mu_p, nu_p) - _kl(mu, mu_p) - avg_kernel(nu_p),
        joint_kl(mu, nu_p) - avg_kernel(nu_p),
        joint_kl(mu_p, nu_p) - _kl(mu, mu_p) - _kl(nu, nu_p) - info,
        info - (avg_kernel(nu_p) - _kl(nu, nu_p)),
        info - avg_kernel(nu),
    ]
    return max(abs(r) for r in residuals)


def identity_suite(dists: Iterable[JointDist], seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult("identities")
    t0 = time.perf_counter()
    for d in dists:
        n = d.n
        order = [int(i) for i in rng.permutation(n)]
        res.run("tc_chain", lambda: abs(tc(d) - tc_chain(d, order)), d)
        res.run("dtc_chain", lambda: abs(dtc(d) - dtc_chain(d, order)), d)
        res.run("dtc_chain_tail", lambda: abs(dtc(d) - dtc_chain(d, order, tail=True)), d)
        res.run("tc_plus_dtc", lambda: abs(tc(d) + dtc(d) - sum(full_mutual_infos(d))), d)
        if n >= 3:
            res.run("tc_recursion", lambda: _recurse_tc(d), d)
            res.run("dtc_recursion", lambda: _recurse_dtc(d), d)
        blocks = random_partition(rng, n)
        res.run("tc_clumping", lambda: _tc_clumping(d, blocks), d)
        res.run("dtc_clumping", lambda: _dtc_clumping(d, blocks), d)
        if n >= 2:
            res.run("mini_clumping", lambda: _mini_clumping(d), d)
        refs = random_refs(rng, d)
        res.run("tc_reference", lambda: _ref_tc(d, refs), d)
        res.run("dtc_reference", lambda: _ref_dtc(d, refs), d)
        res.run("csiszar", lambda: abs(csiszar_gap(d, refs)), d)
        if n >= 2:
            res.run("kl_chain_rules", lambda: _kl_chains(d, rng), d)
        res.run("shearer_singletons", lambda: abs(shearer_gap(d, singleton_cover(n), 1) - tc(d)), d)
        if n >= 2:
            res.run(
                "shearer_codim1",
                lambda: abs((n - 1) * shearer_gap(d, codim1_cover(n), n - 1) - dtc(d)),
                d,
            )
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------------------
# inequalities


def _sandwich(d: JointDist) -> float:
    top = max(full_mutual_infos(d))
    t, u = tc(d), dtc(d)
    n = d.n
    return max(
        top - t, top - u, t - (n - 1) * top, u - (n - 1) * top, -t, -u, t - (n - 1) * u, u - (n - 1) * t
    )


def _marginal_monotone(d: JointDist) -> float:
    head = marginal(d, range(d.n - 1))
    return max(tc(head) - tc(d), dtc(head) - dtc(d))


def _binary_split(d: JointDist, rng) -> float:
    n = d.n
    size = int(rng.integers(1, n))
    S = sorted(int(i) for i in rng.choice(n, size=size, replace=False))
    Sc = [i for i in range(n) if i not in S]
    return mutual_info(d, S, Sc) - min(tc(d), dtc(d))


def _clump_monotone(d: JointDist, blocks) -> float:
    c = clump(d, blocks)
    return max(tc(c) - tc(d), dtc(c) - dtc(d))


def _quantize_monotone(d: JointDist, parts) -> float:
    q = quantize(d, parts)
    return max(tc(q) - tc(d), dtc(q) - dtc(d))


def _channel_monotone(d: JointDist, rng) -> float:
    n = d.n
    joint = d
    for i, k in enumerate(d.space.shape):
        out = int(rng.integers(2, 4))
        joint = extend_with_channel(joint, i, rng.dirichlet(np.ones(out), size=k))
    y = marginal(joint, range(n, 2 * n))
    slack = sum(cond_entropy(joint, {n + i}, {i}) for i in range(n))
    return max(tc(y) - tc(d) - slack, dtc(y) - dtc(d) - (n - 1) * slack)


def _tensorization(d: JointDist, refs) -> float:
    return divergence_to_product(d, refs) - conditional_divergence_sum(d, refs)


def _approx_concavity(d: JointDist, rng) -> float:
    """Mix d with random partners and compare DTC of the mixture with the average plus I."""
    parts = int(rng.integers(2, 4))
    comps = [d] + [_random_like(rng, d) for _ in range(parts - 1)]
    w = rng.dirichlet(np.ones(parts))
    m = Mixture(w, tuple(comps))
    avg = float(sum(wi * dtc(c) for wi, c in zip(w, comps)))
    return dtc(mix(m)) - avg - mixture_mutual_info(m)


def _random_cover(d: JointDist, rng):
    n = d.n
    cover = []
    for _ in range(int(rng.integers(1, 2 * n + 2))):
        size = int(rng.integers(1, n + 1))
        cover.append(tuple(sorted(int(i) for i in rng.choice(n, size=size, replace=False))))
    counts = [sum(i in S for S in cover) for i in range(n)]
    for i in range(n):
        if counts[i] == 0:
            cover.append((i,))
    k = min(sum(i in S for S in cover) for i in range(n))
    return cover, k


def inequality_suite(dists: Iterable[JointDist], seed: int = 0) -> SuiteResult:
    rng = np.random.default_rng(seed)
    res = SuiteResult("inequalities")
    t0 = time.perf_counter()
    for d in dists:
        n = d.n
        res.run("sandwich", lambda: _sandwich(d), d)
        if n >= 2:
            res.run("drop_last_monotone", lambda: _marginal_monotone(d), d)
            res.run("binary_split", lambda: _binary_split(d, rng), d)
        blocks = random_partition(rng, n)
        res.run("clumping_monotone", lambda: _clump_monotone(d, blocks), d)
        parts = [random_cells(rng, k) for k in d.space.shape]
        res.run("quantization_monotone", lambda: _quantize_monotone(d, parts), d)
        if d.space.cells <= 256:
            res.run("channel_monotone", lambda: _channel_monotone(d, rng), d)
        refs = random_refs(rng, d)
        res.run("tensorization", lambda: _tensorization(d, refs), d)
        res.run("dtc_approx_concavity", lambda: _approx_concavity(d, rng), d)
        cover, k = _random_cover(d, rng)
        res.run("shearer_nonnegative", lambda: -shearer_gap(d, cover, k), d)
    res.seconds = time.perf_counter() - t0
    return res


# ---------------------------------------------------------------------------
# transport


def _oracle_instance(rng: np.random.Generator):
    """Random atoms (at most six per side) on a random small space, with weights and cost table."""
    n = int(rng.integers(1, 5))
    shape = tuple(int(k) for k in rng.integers(2, 5, size=n))
    space = ProductSpace.discrete(shape)
    cells = space.cells
    na = int(rng.integers(1, min(6, cells) + 1))
    nb = int(rng.integers(1, min(6, cells) + 1))
    rows = np.sort(rng.choice(cells, size=na, replace=False))
    cols = np.sort(rng.choice(cells, size=nb, replace=False))
    a = rng.dirichlet(np.ones(na))
    b = rng.dirichlet(np.ones(nb))
    X = np.stack(np.unravel_index(rows, shape), axis=1)
    Y = np.stack(np.unravel_index(cols, shape), axis=1)
    return space, rows, cols, a, b, cost_matrix(space, X, Y)


def oracle_gap(rng: np.random.Generator) -> tuple[float, JointDist]:
    space, rows, cols, a, b, C = _oracle_instance(rng)
    lp, plan, _ = solve_transport(a, b, C)
    exact = transport_by_tree_enumeration(a, b, C)
    mu = np.zeros(space.cells)
    mu[rows] = a
    # also route the same pair through the full distribution interface
    nu = np.zeros(space.cells)
    nu[cols] = b
    via_api = transport_value(JointDist(space, mu.reshape(space.shape)), JointDist(space, nu.reshape(space.shape)))
    return max(abs(lp - exact), abs(via_api - exact)), JointDist(space, mu.reshape(space.shape))


def _plan_valid(mu: JointDist, nu: JointDist) -> float:
    value, plan = transport_distance(mu, nu)
    plan.check(mu, nu)
    return abs(value - plan.cost)


def transport_suite(
    dists: Iterable[JointDist],
    seed: int = 0,
    oracle_runs: int = 100,
    triples: int | None = None,
    tv_pairs: int | None = None,
) -> SuiteResult:
    """Metric axioms on triples, transport <= TV, Marton and Fano on every instance,
    and ``oracle_runs`` comparisons against exhaustive enumeration."""
    rng = np.random.default_rng(seed)
    res = SuiteResult("transport")
    t0 = time.perf_counter()
    dists = list(dists)
    ntri = len(dists) if triples is None else triples
    ntv = len(dists) if tv_pairs is None else tv_pairs
    for idx, d in enumerate(dists):
        if idx < ntri:
            nu, rho = _random_like(rng, d), _random_like(rng, d)
            dmn, dnm = transport_value(d, nu), transport_value(nu, d)
            dnr, dmr = transport_value(nu, rho), transport_value(d, rho)
            res.run("symmetry", lambda: abs(dmn - dnm), d)
            res.run("triangle", lambda: dmr - dmn - dnr, d, tol=1e-8)
            res.run("identity", lambda: transport_value(d, d), d)
            res.run("plan_valid", lambda: _plan_valid(d, nu), d)
        if idx < ntv:
            other = _random_like(rng, d)
            res.run("below_total_variation", lambda: transport_value(d, other) - total_variation(d, other), d, tol=1e-10)
        res.run("marton", lambda: (lambda r: r.lhs - r.rhs)(marton_check(d)), d)
        partner = _random_like(rng, d)
        res.run("fano", lambda: (lambda r: r.tc_gap - r.bound)(fano_tc_bound(d, partner)), d)
    for _ in range(oracle_runs):
        gap, witness = oracle_gap(rng)
        res.run("oracle_agreement", lambda: gap, witness, tol=1e-10)
    res.seconds = time.perf_counter() - t0
    return res


def permutation_suite(dists: Iterable[JointDist], seed: int = 0) -> SuiteResult:
    res = SuiteResult("permutation")
    t0 = time.perf_counter()
    for d in dists:
        res.run("dtc_permutation_average", lambda: abs(dtc(d) - dtc_permutation_average(d)), d)
    res.seconds = time.perf_counter() - t0
    return res


def run_suite(name: str, dists: list[JointDist], seed: int = 0, oracle_runs: int = 100) -> SuiteResult:
    if name == "identities":
        return identity_suite(dists, seed)
    if name == "inequalities":
        return inequality_suite(dists, seed)
    if name == "transport":
        return transport_suite(dists, seed, oracle_runs=oracle_runs)
    if name == "permutation":
        return permutation_suite([d for d in dists if d.n <= 7], seed)
    raise ValueError(f"unknown suite {name!r}")
