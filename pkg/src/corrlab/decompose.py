"""Mixtures of near-product measures for distributions with small DTC.

``theorem_a`` conditions on a small coordinate subset S, lifts each
conditional back to the full space through its density on the complementary
coordinates, and pairs every lifted component with a product measure.
``theorem_a_prime`` keeps the raw conditionals (finitely many, no lifting).
``theorem_a2`` resamples the ``theorem_a`` mixture into m equally weighted
terms and repairs the sampling error with a total-variation coupling.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    BudgetInfeasible,
    CapacityExceeded,
    GoodSetTooSmall,
    GuaranteeViolation,
    IdentityViolation,
    PreconditionError,
    SamplingFailed,
)
from .info import cond_budget_terms, cond_dtc, cond_tc, dtc, mixture_mutual_info, mutual_info, tc
from .space import (
    JointDist,
    Mixture,
    coordinate_marginals,
    disintegrate,
    marginal_array,
    mix,
    product,
    is_product,
)
from .transport import cost_matrix, total_variation, transport_value

TOL = 1e-9
SAMPLE_CAP = 10**6
MAX_REDRAWS = 100


def _check_delta(delta: float) -> None:
    if not 0 < delta <= 1:
        raise PreconditionError(f"delta must lie in (0, 1], got {delta}")


def _check_epsilon(epsilon: float) -> None:
    if not 0 < epsilon < 0.5:
        raise PreconditionError(f"epsilon must lie in (0, 1/2), got {epsilon}")


@dataclass(frozen=True)
class SubsetCertificate:
    S: tuple[int, ...]
    size_bound: float
    achieved: float
    budget: float
    cond_tc: float
    cond_dtc: float
    tc_only: bool = False
    fallback: bool = False

    def to_dict(self) -> dict:
        return {
            "S": [i + 1 for i in self.S],
            "size_bound": self.size_bound,
            "achieved": self.achieved,
            "budget": self.budget,
            "cond_tc": self.cond_tc,
            "cond_dtc": self.cond_dtc,
            "tc_only": self.tc_only,
            "fallback": self.fallback,
        }


def find_low_info_subset(
    dist: JointDist, delta: float, tc_only: bool = False, on_infeasible: str = "raise"
) -> SubsetCertificate:
    """Smallest S (lexicographic among equals) with TC(.|X_S) + DTC(.|X_S) <= delta^2 |S^c|.

    Candidates are limited to |S| <= DTC/delta^2, where a valid subset is
    known to exist. ``tc_only`` drops the DTC term from the budget test.
    When nothing qualifies, ``on_infeasible="fallback"`` returns the first
    n - 1 coordinates flagged as a fallback instead of raising.
    """
    _check_delta(delta)
    n = dist.n
    d = dtc(dist)
    size_bound = d / delta**2
    cap = min(n - 1, math.floor(size_bound + TOL))
    for r in range(cap + 1):
        budget = delta**2 * (n - r)
        for S in itertools.combinations(range(n), r):
            ctc, cdtc = cond_budget_terms(dist, S)
            achieved = ctc if tc_only else ctc + cdtc
            if achieved <= budget + TOL:
                # re-derive through the disintegration route before certifying
                ctc = cond_tc(dist, S)
                cdtc = cond_dtc(dist, S)
                return SubsetCertificate(S, size_bound, ctc if tc_only else ctc + cdtc, budget, ctc, cdtc, tc_only)
    if on_infeasible != "fallback" or n < 2:
        raise BudgetInfeasible(
            f"no subset of size <= {cap} meets the budget at delta={delta} (DTC={d:.6g})"
        )
    S = tuple(range(n - 1))
    ctc, cdtc = cond_tc(dist, S), cond_dtc(dist, S)
    return SubsetCertificate(S, size_bound, ctc if tc_only else ctc + cdtc, delta**2, ctc, cdtc, tc_only, True)


@dataclass
class Check:
    value: float
    bound: float
    holds: bool
    strict: bool = False  # strict inequality demanded

    def to_dict(self) -> dict:
        return {"value": self.value, "bound": self.bound, "holds": self.holds}


def _le(value, bound, tol=TOL) -> Check:
    return Check(float(value), float(bound), bool(value <= bound + tol))


def _lt(value, bound) -> Check:
    return Check(float(value), float(bound), bool(value < bound), strict=True)


@dataclass
class DecompositionReport:
    mode: str
    S: tuple[int, ...]
    weights: np.ndarray
    components: list[JointDist]
    products: list[JointDist]
    labels: list
    mix_mi: float
    mi_bound: float
    transport_err: float
    err_bound: float
    m: int
    m_bound: float | None
    dtc: float
    delta: float
    hypothesis_holds: bool
    certificate: SubsetCertificate
    component_errors: list[float]
    epsilon: float | None = None
    guarantees: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def mixture(self) -> Mixture:
        return Mixture(self.weights, tuple(self.components), tuple(self.labels))

    @property
    def guarantees_hold(self) -> bool:
        return all(c.holds for c in self.guarantees.values())

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "S": [i + 1 for i in self.S],
            "delta": self.delta,
            "epsilon": self.epsilon,
            "dtc": self.dtc,
            "hypothesis_holds": self.hypothesis_holds,
            "m": self.m,
            "m_bound": self.m_bound,
            "components": len(self.components),
            "weights": [float(w) for w in self.weights],
            "labels": [_label_json(y) for y in self.labels],
            "mix_mi": self.mix_mi,
            "mi_bound": self.mi_bound,
            "transport_err": self.transport_err,
            "err_bound": self.err_bound,
            "component_errors": [float(e) for e in self.component_errors],
            "certificate": self.certificate.to_dict(),
            "guarantees": {k: v.to_dict() for k, v in self.guarantees.items()},
            "guarantees_hold": self.guarantees_hold,
            "diagnostics": self.diagnostics,
            "notes": list(self.notes),
        }


def _label_json(y):
    if isinstance(y, tuple):
        return [int(v) for v in y]
    return y


def _conditionals(dist: JointDist, S: Sequence[int]):
    """[(y, mu_S(y), nu_y)] over y of positive mass; S empty gives the single trivial label."""
    if not S:
        return [((), 1.0, dist)]
    kernel = disintegrate(dist, S)
    return [(y, float(kernel.base_marginal.pmf[y]), kernel.table[y]) for y in sorted(kernel.table)]


def _broadcast(arr: np.ndarray, axes: Sequence[int], n: int) -> np.ndarray:
    """Reshape a table over ``axes`` so it broadcasts against an n-axis table."""
    shape = [1] * n
    for ax, k in zip(axes, arr.shape):
        shape[ax] = k
    return arr.reshape(shape)


def _pinned_product(dist: JointDist, S, y, factors_sc) -> JointDist:
    """Point mass at y on the S coordinates times the given factors elsewhere."""
    factors = []
    it = iter(factors_sc)
    for i, k in enumerate(dist.space.shape):
        if i in S:
            e = np.zeros(k)
            e[y[S.index(i)]] = 1.0
            factors.append(e)
        else:
            factors.append(next(it))
    return product(factors, dist.space)


def _enforce(report: DecompositionReport, strict: bool) -> None:
    if not strict:
        return
    bad = [k for k, c in report.guarantees.items() if not c.holds]
    if bad:
        raise GuaranteeViolation(f"{report.mode}: guarantees violated: {bad}")


def _reconstitution_error(weights, components, dist: JointDist) -> float:
    back = np.tensordot(np.asarray(weights), np.stack([c.pmf for c in components]), axes=1)
    return float(np.max(np.abs(back - dist.pmf)))


def theorem_a(dist: JointDist, delta: float, tc_only: bool = False, strict: bool = True) -> DecompositionReport:
    """Lifted conditional mixture with mutual information <= DTC and average
    transport error < 2 delta (bounds asserted when DTC <= delta^3 n)."""
    _check_delta(delta)
    n = dist.n
    d = dtc(dist)
    hypothesis = d <= delta**3 * n
    cert = find_low_info_subset(dist, delta, tc_only=tc_only)
    S = list(cert.S)
    Sc = [i for i in range(n) if i not in S]
    mu_sc = marginal_array(dist, Sc)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_mu_sc = np.where(mu_sc > 0, 1.0 / mu_sc, 0.0)

    labels, weights, comps, prods = [], [], [], []
    errs, sub_errs, marton_terms = [], [], []
    lift_err = 0.0
    for y, w, nu_y in _conditionals(dist, S):
        nu_sc = marginal_array(nu_y, Sc)
        rho = nu_sc * inv_mu_sc
        mu_y = JointDist(dist.space, _broadcast(rho, Sc, n) * dist.pmf)
        lift_err = max(lift_err, float(np.max(np.abs(marginal_array(mu_y, Sc) - nu_sc))))
        factors_sc = [marginal_array(nu_y, (i,)) for i in Sc]
        xi_y = _pinned_product(dist, S, y, factors_sc)
        labels.append(y)
        weights.append(w)
        comps.append(mu_y)
        prods.append(xi_y)
        errs.append(transport_value(mu_y, xi_y))
        sub_errs.append(transport_value(nu_y, xi_y, sub=Sc))
        marton_terms.append(math.sqrt(tc(nu_y, check=False) / (2 * len(Sc))))

    weights = np.asarray(weights)
    weights = weights / math.fsum(weights)
    if lift_err > 1e-10:
        raise IdentityViolation(f"lifted components do not project onto the conditionals ({lift_err:.2e})")
    recon = _reconstitution_error(weights, comps, dist)
    if recon > TOL:
        raise IdentityViolation(f"lifted mixture does not reconstitute the measure ({recon:.2e})")
    if any(not is_product(p) for p in prods):
        raise IdentityViolation("a product approximant is not a product measure")

    mixture = Mixture(weights, tuple(comps), tuple(labels))
    mix_mi = mixture_mutual_info(mixture)
    projected = mutual_info(dist, S, Sc) if S else 0.0
    if abs(mix_mi - projected) > TOL:
        raise IdentityViolation(f"lifted mixture information {mix_mi} != I(X_S; X_Sc) = {projected}")
    transport_err = float(weights @ np.asarray(errs))
    avg_sub = float(weights @ np.asarray(sub_errs))
    avg_marton = float(weights @ np.asarray(marton_terms))
    holder = math.sqrt(cert.cond_tc / (2 * len(Sc)))
    a_end = len(S) / n + len(Sc) / n * avg_sub

    report = DecompositionReport(
        mode="theorem_a",
        S=tuple(S),
        weights=weights,
        components=comps,
        products=prods,
        labels=labels,
        mix_mi=mix_mi,
        mi_bound=d,
        transport_err=transport_err,
        err_bound=2 * delta,
        m=len(comps),
        m_bound=None,
        dtc=d,
        delta=delta,
        hypothesis_holds=hypothesis,
        certificate=cert,
        component_errors=errs,
        diagnostics={
            "projected_mi": projected,
            "subspace_transport": avg_sub,
            "marton_average": avg_marton,
            "holder_bound": holder,
            "delta_over_root2": delta / math.sqrt(2),
            "estimate_end": a_end,
            "reconstitution_error": recon,
            "lifting_error": lift_err,
        },
    )
    # inequalities that hold for every input
    report.guarantees["marton_per_component"] = _le(avg_sub, avg_marton)
    report.guarantees["holder"] = _le(avg_marton, holder)
    report.guarantees["estimate_end"] = _le(transport_err, a_end)
    report.guarantees["mi_le_dtc"] = _le(mix_mi, d)
    if not tc_only:
        report.guarantees["holder_le_delta_over_root2"] = _le(holder, delta / math.sqrt(2))
    if hypothesis:
        report.guarantees["transport_lt_2delta"] = _lt(transport_err, 2 * delta)
    else:
        report.notes.append(
            f"DTC = {d:.6g} exceeds delta^3 n = {delta**3 * n:.6g}; the 2*delta transport bound is not asserted"
        )
    _enforce(report, strict)
    return report


def theorem_a_prime(dist: JointDist, delta: float, strict: bool = True) -> DecompositionReport:
    """Raw conditional mixture: at most k^(DTC/delta^2) terms, average error < delta."""
    _check_delta(delta)
    d = dtc(dist)
    cert = find_low_info_subset(dist, delta)
    S = list(cert.S)
    labels, weights, comps, prods, errs = [], [], [], [], []
    for y, w, nu_y in _conditionals(dist, S):
        xi_y = product(coordinate_marginals(nu_y), dist.space)
        labels.append(y)
        weights.append(w)
        comps.append(nu_y)
        prods.append(xi_y)
        errs.append(transport_value(nu_y, xi_y))
    weights = np.asarray(weights)
    weights = weights / math.fsum(weights)
    recon = _reconstitution_error(weights, comps, dist)
    if recon > TOL:
        raise IdentityViolation(f"conditional mixture does not reconstitute the measure ({recon:.2e})")
    k = max(dist.space.shape)
    m_bound = float(k) ** (d / delta**2)
    transport_err = float(weights @ np.asarray(errs))
    mixture = Mixture(weights, tuple(comps), tuple(labels))
    report = DecompositionReport(
        mode="theorem_a_prime",
        S=tuple(S),
        weights=weights,
        components=comps,
        products=prods,
        labels=labels,
        mix_mi=mixture_mutual_info(mixture),
        mi_bound=d,
        transport_err=transport_err,
        err_bound=delta,
        m=len(comps),
        m_bound=m_bound,
        dtc=d,
        delta=delta,
        hypothesis_holds=True,
        certificate=cert,
        component_errors=errs,
        diagnostics={"reconstitution_error": recon, "alphabet_bound": k},
    )
    report.guarantees["m_le_bound"] = _le(len(comps), m_bound * (1 + TOL), tol=0.0)
    report.guarantees["transport_lt_delta"] = _lt(transport_err, delta)
    _enforce(report, strict)
    return report


def sample_count(mi: float, epsilon: float) -> tuple[float, float]:
    """(m, log10 m) for m = ceil(16 eps^-2 exp(16 (I + 1) / eps)); m is inf on overflow."""
    log_m = math.log(16.0) - 2 * math.log(epsilon) + 16 * (mi + 1) / epsilon
    log10 = float(log_m / math.log(10))
    m = float(math.ceil(math.exp(log_m))) if log_m < 700 else math.inf
    return m, log10


@dataclass
class SampleResult:
    labels: np.ndarray  # component index of every draw
    counts: np.ndarray  # draws per component
    gamma: JointDist
    tv: float
    m: int
    m_formula: float
    m_formula_log10: float
    capped: bool
    attempts: int
    mutual_info: float


def sample_mixture(
    mixture: Mixture,
    epsilon: float,
    good_set: Callable[[object], bool],
    seed: int,
    cap: int = SAMPLE_CAP,
    clip: bool = False,
    m: int | None = None,
) -> SampleResult:
    """Draw labels i.i.d. from the weights conditioned on ``good_set`` until the
    empirical mixture is within 3 epsilon of the mixture in total variation.

    The draw count follows the sampling formula; beyond ``cap`` it raises
    CapacityExceeded unless ``clip`` is set, in which case ``cap`` draws are used.
    An explicit ``m`` overrides both.
    """
    _check_epsilon(epsilon)
    mi = mixture_mutual_info(mixture)
    if not math.isfinite(mi):
        raise PreconditionError("the mixture has infinite mutual information")
    good = np.array([bool(good_set(lbl)) for lbl in mixture.labels])
    w = np.asarray(mixture.weights)
    mass = float(w[good].sum())
    if mass <= 1 - epsilon / 2:
        raise GoodSetTooSmall(f"good set has mass {mass:.6g} <= 1 - epsilon/2")
    m_formula, m_log10 = sample_count(mi, epsilon)
    capped = False
    if m is None:
        if m_formula > cap:
            if not clip:
                raise CapacityExceeded(f"sampling needs m ~ 10^{m_log10:.2f} draws, cap is {cap}")
            m, capped = cap, True
        else:
            m = int(m_formula)
    probs = np.where(good, w, 0.0) / mass
    target = mix(mixture)
    stacked = np.stack([c.flat for c in mixture.components])
    rng = np.random.default_rng(seed)
    for attempt in range(1, MAX_REDRAWS + 1):
        draws = rng.choice(len(w), size=m, p=probs)
        counts = np.bincount(draws, minlength=len(w))
        gamma = JointDist(mixture.space, (counts / m) @ stacked)
        tv = total_variation(gamma, target)
        if tv < 3 * epsilon:
            return SampleResult(draws, counts, gamma, tv, m, m_formula, m_log10, capped, attempt, mi)
    raise SamplingFailed(f"no draw within 3*epsilon after {MAX_REDRAWS} attempts")


def overlap_coupling(mu: np.ndarray, gamma: np.ndarray):
    """Coupling with min(mu, gamma) on the diagonal; residuals paired greedily
    in ascending flat-index order. Returns (diagonal, [(x, z, mass), ...])."""
    diag = np.minimum(mu, gamma)
    r_mu = mu - diag
    r_g = gamma - diag
    xs = [int(i) for i in np.flatnonzero(r_mu > 0)]
    zs = [int(i) for i in np.flatnonzero(r_g > 0)]
    left_mu = {x: float(r_mu[x]) for x in xs}
    left_g = {z: float(r_g[z]) for z in zs}
    pairs = []
    i = j = 0
    while i < len(xs) and j < len(zs):
        x, z = xs[i], zs[j]
        t = min(left_mu[x], left_g[z])
        if t > 0:
            pairs.append((x, z, t))
        left_mu[x] -= t
        left_g[z] -= t
        if left_mu[x] <= 1e-300 or (j == len(zs) - 1 and i < len(xs) - 1 and left_g[z] <= left_mu[x]):
            i += 1
        if left_g[z] <= 1e-300:
            j += 1
    # rounding leftovers go to the last column so the first marginal stays exact
    while i < len(xs):
        x = xs[i]
        if left_mu[x] > 0 and zs:
            pairs.append((x, zs[-1], left_mu[x]))
        i += 1
    return diag, pairs


def theorem_a2(
    dist: JointDist,
    delta: float,
    epsilon: float,
    seed: int = 0,
    cap: int = SAMPLE_CAP,
    strict: bool = True,
) -> DecompositionReport:
    """m equally weighted near-product terms with average error < 3 eps + 4 delta / eps."""
    _check_epsilon(epsilon)
    _check_delta(delta)
    base = theorem_a(dist, delta, strict=strict)
    threshold = 4 * delta / epsilon
    good_labels = {y for y, e in zip(base.labels, base.component_errors) if e < threshold}
    sample = sample_mixture(base.mixture, epsilon, good_labels.__contains__, seed, cap=cap, clip=True)
    mu = dist.flat
    gamma = sample.gamma.flat
    diag, pairs = overlap_coupling(mu, gamma)
    space = dist.space
    shape = space.shape
    if pairs:
        px = np.array([p[0] for p in pairs])
        pz = np.array([p[1] for p in pairs])
        pm = np.array([p[2] for p in pairs])
        X = np.stack(np.unravel_index(px, shape), axis=1)
        Z = np.stack(np.unravel_index(pz, shape), axis=1)
        pair_cost = np.array([cost_matrix(space, X[t:t + 1], Z[t:t + 1])[0, 0] for t in range(len(pairs))])
        coupling_cost = float(pm @ pair_cost)
    else:
        px = pz = np.zeros(0, dtype=int)
        pm = np.zeros(0)
        coupling_cost = 0.0
    coupling_err = max(
        float(np.max(np.abs(diag + np.bincount(px, weights=pm, minlength=len(mu)) - mu))),
        float(np.max(np.abs(diag + np.bincount(pz, weights=pm, minlength=len(mu)) - gamma))),
    )
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_gamma = np.where(gamma > 0, 1.0 / gamma, 0.0)

    labels, weights, comps, prods, errs, base_errs = [], [], [], [], [], []
    m = sample.m
    for j in np.flatnonzero(sample.counts):
        rho = base.components[j].flat * inv_gamma
        first = diag * rho + np.bincount(px, weights=pm * rho[pz], minlength=len(mu))
        comp = JointDist(space, first.reshape(shape))
        labels.append(base.labels[j])
        weights.append(sample.counts[j] / m)
        comps.append(comp)
        prods.append(base.products[j])
        errs.append(transport_value(comp, base.products[j]))
        base_errs.append(base.component_errors[j])
    weights = np.asarray(weights, dtype=float)
    recon = _reconstitution_error(weights, comps, dist)
    if recon > TOL:
        raise IdentityViolation(f"resampled mixture does not reconstitute the measure ({recon:.2e})")
    # every component is a probability measure up to rounding
    comps = [JointDist(space, c.pmf / c.pmf.sum()) for c in comps]
    transport_err = float(weights @ np.asarray(errs))
    sampled_base_err = float(weights @ np.asarray(base_errs))
    bound = 3 * epsilon + 4 * delta / epsilon
    report = DecompositionReport(
        mode="theorem_a2",
        S=base.S,
        weights=weights,
        components=comps,
        products=prods,
        labels=labels,
        mix_mi=mixture_mutual_info(Mixture(weights, tuple(comps), tuple(labels))),
        mi_bound=base.dtc,
        transport_err=transport_err,
        err_bound=bound,
        m=m,
        m_bound=sample.m_formula,
        dtc=base.dtc,
        delta=delta,
        epsilon=epsilon,
        hypothesis_holds=base.hypothesis_holds,
        certificate=base.certificate,
        component_errors=errs,
        diagnostics={
            "m_formula_log10": sample.m_formula_log10,
            "m_capped": sample.capped,
            "sample_cap": cap,
            "sampling_attempts": sample.attempts,
            "sample_tv": sample.tv,
            "coupling_cost": coupling_cost,
            "coupling_marginal_error": coupling_err,
            "sampled_base_error": sampled_base_err,
            "good_set_mass": float(sum(w for y, w in zip(base.labels, base.weights) if y in good_labels)),
            "base_mix_mi": base.mix_mi,
            "base_transport_err": base.transport_err,
            "reconstitution_error": recon,
        },
    )
    report.guarantees["sample_tv_lt_3eps"] = _lt(sample.tv, 3 * epsilon)
    report.guarantees["coupling_le_tv"] = _le(coupling_cost, sample.tv)
    report.guarantees["triangle"] = _le(transport_err, coupling_cost + sampled_base_err)
    report.guarantees["m_within_formula_and_cap"] = _le(m, min(sample.m_formula, cap), tol=0.0)
    if base.hypothesis_holds:
        report.guarantees["transport_lt_bound"] = _lt(transport_err, bound)
    else:
        report.notes.append("DTC exceeds delta^3 n; the 3 eps + 4 delta/eps bound is not asserted")
    if sample.capped:
        report.notes.append(
            f"sampling formula asks for about 10^{sample.m_formula_log10:.2f} draws; capped at {cap}"
        )
    _enforce(report, strict)
    return report
