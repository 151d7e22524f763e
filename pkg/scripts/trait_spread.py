"""Colony trait dispersion per exchange, from one or more report.json files.

    python scripts/trait_spread.py runs/desk/seed*/report.json

For every exchange index prints the componentwise standard deviation of the
colonies' (normalized) swarm positions after the update.
"""

import json
import sys
from collections import defaultdict

import numpy as np


def spread(report: dict) -> dict[int, np.ndarray]:
    by_idx = defaultdict(list)
    for h in report["swarm"]["history"]:
        by_idx[h["exchange_idx"]].append(h["position"])
    return {k: np.std(v, axis=0) for k, v in sorted(by_idx.items())}


def main(paths):
    for path in paths:
        with open(path) as fh:
            rep = json.load(fh)
        print(path)
        print(f"  {'exchange':>8}  {'std ants':>9}  {'std evap':>9}  {'std mort':>9}")
        for k, s in spread(rep).items():
            print(f"  {k:>8}  {s[0]:>9.4f}  {s[1]:>9.4f}  {s[2]:>9.4f}")


if __name__ == "__main__":
    main(sys.argv[1:])
