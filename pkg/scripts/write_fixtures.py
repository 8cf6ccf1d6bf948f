"""Write the named example measures as DistFiles into a directory.

    python3 scripts/write_fixtures.py fixtures/
"""

import sys
from pathlib import Path

from corrlab.corpus import dirac_spike_mixture, opposed_products, zero_sum_uniform
from corrlab.info import info_report
from corrlab.io import save
from corrlab.space import mix

FIXTURES = {
    "zero_sum_3_2": lambda: zero_sum_uniform(3, 2),
    "zero_sum_3_3": lambda: zero_sum_uniform(3, 3),
    "zero_sum_9_2": lambda: zero_sum_uniform(9, 2),
    "dirac_spike_2_3_0.5": lambda: dirac_spike_mixture(2, 3, 0.5),
    "dirac_spike_3_4_0.2": lambda: dirac_spike_mixture(3, 4, 0.2),
    "opposed_products_8": lambda: mix(opposed_products(8)),
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    out = Path(argv[0] if argv else "fixtures")
    out.mkdir(parents=True, exist_ok=True)
    for name, build in FIXTURES.items():
        d = build()
        save(d, out / f"{name}.json")
        rep = info_report(d)
        print(f"{name:24} TC = {rep.tc:.6f}  DTC = {rep.dtc:.6f}")


if __name__ == "__main__":
    main()
