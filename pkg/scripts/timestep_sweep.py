#!/usr/bin/env python3
"""Effect of the EKI timestep on convergence with and without acceleration.

Sweeps dt over a few values on the exponential-sine problem; acceleration
tends to compensate for a poorly chosen timestep.
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
    parser.add_argument("--dt", type=float, nargs="+", default=[1.0, 0.5, 0.1])
    parser.add_argument("--trials", type=int, default=20)
    parser.add_argument("--iterations", type=int, default=40)
    parser.add_argument("--ensemble-size", type=int, default=10)
    parser.add_argument("--seed", type=int, default=1000)
    parser.add_argument("--out", default="results/timestep_sweep")
    args = parser.parse_args()

    cells = [
        CellSpec("eki", schedule, ensemble_size=args.ensemble_size, iterations=args.iterations, dt=dt)
        for dt in args.dt
        for schedule in (NoAcceleration(), RecursiveNesterov())
    ]
    results = run_experiment(problem_builder("exp_sin", {}), cells, args.trials, args.seed)

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
