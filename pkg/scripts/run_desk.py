"""Desk-scale runs (4 colonies x 100 generations x 2 workers) over several seeds.

    python scripts/run_desk.py --seeds 0 1 2 3 4 --out runs/desk

Each seed writes a full output directory; a summary against the persistence
baseline is printed at the end.
"""

import argparse
import statistics
from pathlib import Path

from antnas.config import ExperimentConfig
from antnas.orchestrator import run_experiment, write_outputs


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--colonies", type=int, default=4)
    ap.add_argument("--generations", type=int, default=100)
    ap.add_argument("--no-exchange", action="store_true")
    ap.add_argument("--out", default="runs/desk")
    args = ap.parse_args()

    best = []
    for seed in args.seeds:
        cfg = ExperimentConfig.desk(
            seed=seed,
            n_colonies=args.colonies,
            generations_per_colony=args.generations,
            exchanges_enabled=not args.no_exchange,
        )
        report = run_experiment(cfg)
        write_outputs(report, Path(args.out) / f"seed{seed}")
        base = report.baseline["persistence_validation_mse"]
        b = report.overall["best_fitness"]
        best.append(b)
        print(
            f"seed {seed}: best val MSE {b:.6f} (persistence {base:.6f}, "
            f"{'beats' if b < base else 'misses'}), test MSE {report.overall['test_mse']:.6f}, "
            f"{report.evaluations} evals, {report.wall_time_s:.0f} s"
        )
    print(f"median best val MSE over {len(best)} seeds: {statistics.median(best):.6f}")


if __name__ == "__main__":
    main()
