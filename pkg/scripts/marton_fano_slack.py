"""How tight are the Marton and Fano bounds on random small measures?

Prints quantiles of lhs/rhs for Marton (against the product of marginals)
and of |TC gap| / bound for the Fano-type estimate.

    python3 scripts/marton_fano_slack.py --count 300 --seed 1
"""

import argparse
from dataclasses import dataclass

import numpy as np

from corrlab.space import product_of_marginals
from corrlab.suites import random_dists
from corrlab.transport import fano_tc_bound, marton_check


@dataclass
class SlackConfig:
    count: int = 300
    seed: int = 1
    max_n: int = 5
    max_k: int = 4
    max_cells: int = 256


def run(cfg: SlackConfig):
    marton, fano = [], []
    for d in random_dists(cfg.count, cfg.seed, cfg.max_n, cfg.max_k, cfg.max_cells):
        m = marton_check(d)
        if m.rhs > 1e-12:
            marton.append(m.lhs / m.rhs)
        f = fano_tc_bound(d, product_of_marginals(d))
        if f.bound > 1e-12:
            fano.append(f.tc_gap / f.bound)
    return np.array(marton), np.array(fano)


def main(argv=None):
    ap = argparse.ArgumentParser(description="Marton / Fano slack quantiles")
    ap.add_argument("--count", type=int, default=SlackConfig.count)
    ap.add_argument("--seed", type=int, default=SlackConfig.seed)
    args = ap.parse_args(argv)
    marton, fano = run(SlackConfig(count=args.count, seed=args.seed))
    qs = [0.0, 0.5, 0.9, 0.99, 1.0]
    print("quantile   marton lhs/rhs   fano gap/bound")
    for q in qs:
        print(f"{q:8.2f}   {np.quantile(marton, q):14.4f}   {np.quantile(fano, q):14.4f}")


if __name__ == "__main__":
    main()
