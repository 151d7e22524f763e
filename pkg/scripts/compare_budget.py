"""Equal-budget comparison: N colonies with exchanges vs one colony without.

    python scripts/compare_budget.py --seeds 0 1 2 3 4

Both arms evaluate colonies x generations candidates; the single colony gets
all generations itself. Prints per-seed and median best validation MSE.
"""

import argparse
import statistics

from antnas.config import ExperimentConfig
from antnas.orchestrator import run_experiment


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--colonies", type=int, default=4)
    ap.add_argument("--generations", type=int, default=100)
    args = ap.parse_args()

    multi, single = [], []
    for seed in args.seeds:
        m = run_experiment(ExperimentConfig.desk(
            seed=seed, n_colonies=args.colonies, generations_per_colony=args.generations))
        s = run_experiment(ExperimentConfig.desk(
            seed=seed, n_colonies=1, generations_per_colony=args.colonies * args.generations,
            exchanges_enabled=False))
        multi.append(m.overall["best_fitness"])
        single.append(s.overall["best_fitness"])
        print(f"seed {seed}: {args.colonies} colonies + PSO {multi[-1]:.6f} | 1 colony {single[-1]:.6f}")
    print(f"median: multi {statistics.median(multi):.6f} vs single {statistics.median(single):.6f}")


if __name__ == "__main__":
    main()
