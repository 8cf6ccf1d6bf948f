"""Normalized Hamming-average metric, exact transport distance and the concentration bounds.

Transport problems are solved between support atoms with a network simplex
(POT's ``emd``) and every returned plan is certified by LP duality: the dual
potentials must be feasible and close the gap to the primal cost.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityExceeded, NotProduct, SolverError, SpaceMismatch
from .info import binary_entropy, kl_divergence, tc
from .space import (
    JointDist,
    ProductSpace,
    _check_subset,
    is_product,
    marginal,
    product_of_marginals,
)

PAIR_CAP = 10**6
CERT_TOL = 1e-10
MARGINAL_TOL = 1e-9


@lru_cache(maxsize=1)
def _emd():
    # POT probes every installed array backend on import; only numpy is needed here.
    for backend in ("TENSORFLOW", "PYTORCH", "JAX", "CUPY"):
        os.environ.setdefault(f"POT_BACKEND_DISABLE_{backend}", "1")
    from ot.lp import emd

    return emd


def hamming_avg(space: ProductSpace, x: Sequence, y: Sequence) -> float:
    xi, yi = space.point_index(x), space.point_index(y)
    return sum(m[a, b] for m, a, b in zip(space.metrics, xi, yi)) / space.n


def atoms(dist: JointDist) -> tuple[np.ndarray, np.ndarray]:
    """Flat indices and index tuples (rows) of the support of ``dist``."""
    flat = dist.support()
    return flat, np.stack(np.unravel_index(flat, dist.space.shape), axis=1)


def cost_matrix(space: ProductSpace, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """d_n between every row of X and every row of Y (index tuples)."""
    C = np.zeros((len(X), len(Y)))
    for i, m in enumerate(space.metrics):
        C += m[X[:, i][:, None], Y[:, i][None, :]]
    return C / space.n


@dataclass(frozen=True)
class CouplingPlan:
    """An optimal coupling stored on the two support-atom sets."""

    space: ProductSpace
    rows: np.ndarray  # flat indices of the first measure's atoms
    cols: np.ndarray  # flat indices of the second measure's atoms
    plan: np.ndarray  # len(rows) x len(cols)
    cost: float
    dual_gap: float

    def dense(self) -> np.ndarray:
        N = self.space.cells
        out = np.zeros((N, N))
        out[np.ix_(self.rows, self.cols)] = self.plan
        return out

    def check(self, mu: JointDist, nu: JointDist, tol: float = MARGINAL_TOL) -> None:
        r = self.plan.sum(axis=1)
        c = self.plan.sum(axis=0)
        if np.max(np.abs(r - mu.flat[self.rows])) > tol or np.max(np.abs(c - nu.flat[self.cols])) > tol:
            raise SolverError("coupling marginals do not match")
        if np.any(self.plan < -tol):
            raise SolverError("coupling has negative mass")
        X = np.stack(np.unravel_index(self.rows, self.space.shape), axis=1)
        Y = np.stack(np.unravel_index(self.cols, self.space.shape), axis=1)
        cost = float(np.sum(self.plan * cost_matrix(self.space, X, Y)))
        if abs(cost - self.cost) > CERT_TOL:
            raise SolverError("coupling cost does not match the reported value")


def solve_transport(a: np.ndarray, b: np.ndarray, C: np.ndarray) -> tuple[float, np.ndarray, float]:
    """Exact balanced transport between weight vectors ``a`` and ``b``.

    Returns (value, plan, certified_gap). Raises SolverError when the duality
    certificate exceeds ``CERT_TOL``.
    """
    a = np.ascontiguousarray(a, dtype=float)
    b = np.ascontiguousarray(b, dtype=float)
    a = a / a.sum()
    b = b / b.sum()
    if len(a) == 1 or len(b) == 1:
        plan = np.outer(a, b)
        return float(np.sum(plan * C)), plan, 0.0
    C = np.ascontiguousarray(C, dtype=float)
    plan, log = _emd()(a, b, C, numItermax=10**8, log=True)
    if log.get("result_code", 1) != 1:
        raise SolverError(f"network simplex did not reach optimality: {log.get('warning')}")
    u, v = np.asarray(log["u"]), np.asarray(log["v"])
    primal = float(np.sum(plan * C))
    dual = float(a @ u + b @ v)
    infeasibility = float(np.max(u[:, None] + v[None, :] - C))
    # shifting u down by the worst violation makes the duals feasible at that price
    gap = abs(primal - dual) + max(infeasibility, 0.0)
    if gap > CERT_TOL:
        raise SolverError(f"transport certificate gap {gap:.3e} exceeds {CERT_TOL:g}")
    return primal, plan, gap


def transport_distance(mu: JointDist, nu: JointDist, sub: Iterable[int] | None = None) -> tuple[float, CouplingPlan]:
    """Exact d-bar between ``mu`` and ``nu``.

    With ``sub``, both measures are projected to those coordinates and the
    Hamming average runs over them only.
    """
    if mu.space != nu.space:
        raise SpaceMismatch("transport between distributions on different spaces")
    if sub is not None:
        S = _check_subset(mu.n, sub)
        mu, nu = marginal(mu, S), marginal(nu, S)
    space = mu.space
    rows, X = atoms(mu)
    cols, Y = atoms(nu)
    if len(rows) * len(cols) > PAIR_CAP:
        raise CapacityExceeded(f"{len(rows)} x {len(cols)} atom pairs exceed {PAIR_CAP}")
    C = cost_matrix(space, X, Y)
    value, plan, gap = solve_transport(mu.flat[rows], nu.flat[cols], C)
    value = min(max(value, 0.0), 1.0)
    return value, CouplingPlan(space, rows, cols, plan, value, gap)


def transport_value(mu: JointDist, nu: JointDist, sub=None) -> float:
    return transport_distance(mu, nu, sub)[0]


def total_variation(mu: JointDist, nu: JointDist) -> float:
    if mu.space.shape != nu.space.shape:
        raise SpaceMismatch("total variation between distributions on different spaces")
    return min(0.5 * float(np.sum(np.abs(mu.flat - nu.flat))), 1.0)


@dataclass(frozen=True)
class MartonReport:
    lhs: float
    rhs: float
    divergence: float
    satisfied: bool


def marton_check(mu: JointDist, nu: JointDist | None = None, tol: float = 1e-9) -> MartonReport:
    """Compare d-bar(mu, nu) with sqrt(D(mu||nu) / 2n) for a product measure nu.

    ``nu`` defaults to the product of mu's marginals, where D(mu||nu) = TC(mu).
    """
    if nu is None:
        nu = product_of_marginals(mu)
    elif not is_product(nu):
        raise NotProduct("Marton's inequality needs a product reference measure")
    lhs = transport_value(mu, nu)
    div = kl_divergence(mu, nu)
    rhs = math.sqrt(div / (2 * mu.n)) if math.isfinite(div) else math.inf
    return MartonReport(lhs, rhs, div, lhs <= rhs + tol)


@dataclass(frozen=True)
class FanoReport:
    delta: float
    bound: float
    tc_gap: float
    satisfied: bool


def fano_bound(n: int, k: int, delta: float) -> float:
    """2 (h(delta) + delta log(k-1)) n."""
    spread = delta * math.log(k - 1) if k > 2 else 0.0
    return 2.0 * (binary_entropy(delta) + spread) * n


def fano_tc_bound(mu: JointDist, nu: JointDist, tol: float = 1e-9) -> FanoReport:
    """Check |TC(mu) - TC(nu)| against the alphabet-size bound at delta = d-bar(mu, nu).

    The bound counts coordinate mismatches, so delta is measured with the
    discrete metric whatever metrics the space carries.
    """
    if mu.space != nu.space:
        raise SpaceMismatch("Fano comparison between distributions on different spaces")
    if not mu.space.is_discrete:
        disc = mu.space.with_discrete_metrics()
        mu, nu = JointDist(disc, mu.pmf), JointDist(disc, nu.pmf)
    delta = transport_value(mu, nu)
    k = max(mu.space.shape)
    bound = fano_bound(mu.n, k, delta) if k >= 2 else 0.0
    gap = abs(tc(mu) - tc(nu))
    return FanoReport(delta, bound, gap, gap <= bound + tol)
