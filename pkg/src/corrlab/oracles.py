"""Exhaustive reference computations used to cross-examine the fast paths.

Nothing here is meant to be efficient: each routine enumerates the whole
search space it is responsible for.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .errors import CapacityExceeded

MAX_ORACLE_ATOMS = 6


def transport_by_tree_enumeration(a, b, C, tol: float = 1e-12) -> float:
    """Minimum transport cost over every basic feasible solution.

    Basic solutions of the transportation polytope are supported on spanning
    trees of the bipartite graph rows x cols. Root the tree at row 0; each
    subtree hanging below a node sends its net imbalance across the edge to
    its parent, so a tree is feasible iff every such imbalance has the right
    sign. The recursion below enumerates all rooted spanning trees by
    splitting off the subtree that contains the lowest-numbered remaining node.
    """
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    na, nb = len(a), len(b)
    if max(na, nb) > MAX_ORACLE_ATOMS:
        raise CapacityExceeded(f"oracle limited to {MAX_ORACLE_ATOMS} atoms per side")
    scale = sum(b) / sum(a)
    a = [x * scale for x in a]
    nodes = na + nb
    supply = a + [-x for x in b]
    side = [1] * na + [-1] * nb
    imbalance = [0.0] * (1 << nodes)
    for m in range(1, 1 << nodes):
        low = (m & -m).bit_length() - 1
        imbalance[m] = imbalance[m & (m - 1)] + supply[low]
    cost = [[0.0] * nodes for _ in range(nodes)]
    for i in range(na):
        for j in range(nb):
            cost[i][na + j] = cost[na + j][i] = float(C[i][j])
    inf = float("inf")

    @lru_cache(maxsize=None)
    def best(v: int, U: int) -> float:
        rest = U & ~(1 << v)
        if not rest:
            return 0.0
        low = rest & -rest
        others = rest ^ low
        out = inf
        sub = others
        while True:
            W = sub | low
            tail = best(v, U ^ W)
            if tail < inf:
                m = W
                while m:
                    wb = m & -m
                    m ^= wb
                    w = wb.bit_length() - 1
                    if side[w] == side[v]:
                        continue
                    flow = side[w] * imbalance[W]
                    if flow < -tol:
                        continue
                    inner = best(w, W)
                    if inner < inf:
                        out = min(out, inner + cost[v][w] * max(flow, 0.0) + tail)
            if sub == 0:
                break
            sub = (sub - 1) & others
        return out

    return best(0, (1 << nodes) - 1)


def brute_entropy(weights) -> float:
    p = [w for w in np.asarray(weights, dtype=float).reshape(-1) if w > 0]
    return -sum(w * np.log(w) for w in p)


def brute_marginal(pmf: np.ndarray, keep) -> dict:
    """Marginal as a dict {value tuple: mass} by iterating over every cell."""
    out: dict = {}
    for idx in itertools.product(*(range(k) for k in pmf.shape)):
        key = tuple(idx[i] for i in keep)
        out[key] = out.get(key, 0.0) + float(pmf[idx])
    return out


def brute_subset_entropy(pmf: np.ndarray, keep) -> float:
    return brute_entropy(list(brute_marginal(pmf, keep).values()))
