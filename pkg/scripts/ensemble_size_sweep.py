#!/usr/bin/env python3
"""Effect of ensemble size on Darcy EKI convergence with and without acceleration.

With N = 10 both arms explore only a 9-dimensional subspace of the KL
coefficient space (the initial-span regularization at work); with N = 200 the
span covers the full space and the cost drops much further. Acceleration
helps in both regimes.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from kalman_inversion.harness import CellSpec, run_experiment
from kalman_inversion.problems import problem_builder
from kalman_inversion.reporting import (
    plot_convergence,
    read_records_csv,
    write_records_csv,
    write_summary_csv,
)
from kalman_inversion.schedules import NoAcceleration, RecursiveNesterov


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[10, 200])
    parser.add_argument("--trials", type=int, default=3)
    parser.add_argument("--iterations", type=int, default=15)
    parser.add_argument("--grid-n", type=int, default=32)
    parser.add_argument("--kl-dim", type=int, default=20)
    parser.add_argument("--seed", type=int, default=1000)
    parser.add_argument("--out", default="results/ensemble_size_sweep")
    args = parser.parse_args()

    cells = [
        CellSpec("eki", schedule, ensemble_size=size, iterations=args.iterations)
        for size in args.sizes
        for schedule in (NoAcceleration(), RecursiveNesterov())
    ]
    builder = problem_builder("darcy", {"grid_n": args.grid_n, "kl_dim": args.kl_dim})
    results = run_experiment(builder, cells, args.trials, args.seed)

    os.makedirs(args.out, exist_ok=True)
    records_path = os.path.join(args.out, "records.csv")
    write_records_csv(results, records_path)
    write_summary_csv(results, os.path.join(args.out, "summary.csv"))
    plot_convergence(read_records_csv(records_path), os.path.join(args.out, "convergence.svg"))

    for result in results:
        summary = result.summary
        final = "diverged" if summary is None else f"{summary.mean_log_cost[-1]:.3f}"
        print(f"{result.cell.cell_id}: final log-cost {final}")
    print(f"outputs in {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
