"""Command-line front end.

    kinv run    [--config FILE] [--trials N] [--seed S] [--out DIR] [--no-header-comment]
    kinv sweep  --axis {ensemble_size,dt,schedule} [same flags as run]
    kinv plot   RECORDS_CSV [--out FILE.svg]

`run` executes the full grid (algorithms x schedules x dt values) defined by
the config, writing records.csv and summary.csv into the output directory
and printing one digest line per grid cell. `sweep` is the same machinery
with an explicit sweep axis; the swept value is already a column of the CSV
schema. `plot` renders a records CSV to an SVG with one mean-log-cost line
and stderr ribbon per cell.

Exit codes: 0 success, 1 at least one grid cell had every trial diverge,
2 configuration or input error (nothing written).

The KI_THREADS environment variable caps the number of trial workers
(0 or unset = automatic); results do not depend on the worker count.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, RunConfig, parse_config
from .harness import CellSpec, run_experiment
from .problems import problem_builder
from .reporting import (
    MalformedCsv,
    plot_convergence,
    read_records_csv,
    write_records_csv,
    write_summary_csv,
)
from .schedules import parse_schedule

SWEEP_AXES = ("ensemble_size", "dt", "schedule")


def _worker_count() -> int:
    raw = os.environ.get("KI_THREADS", "0")
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"KI_THREADS must be an integer, got {raw!r}") from None
    auto = min(os.cpu_count() or 1, 8)
    return min(auto, cap) if cap > 0 else auto


def _build_cells(config: RunConfig, axis: str | None) -> list[CellSpec]:
    dts = config.dt
    sizes = (config.ensemble_size,)
    if axis == "ensemble_size":
        if config.ensemble_sizes is None:
            raise ConfigError("sweep axis ensemble_size requires 'ensemble_sizes' in the config")
        sizes = config.ensemble_sizes
        dts = config.dt[:1]
    elif axis == "schedule":
        dts = config.dt[:1]

    cells = []
    for algorithm in config.algorithms:
        for label in config.schedules:
            for size in sizes:
                for dt in dts:
                    cells.append(
                        CellSpec(
                            algorithm=algorithm,
                            schedule=parse_schedule(label),
                            ensemble_size=size,
                            iterations=config.iterations,
                            dt=dt,
                            uki_alpha=config.uki_alpha,
                        )
                    )
    return cells


def _execute(config: RunConfig, axis: str | None) -> int:
    cells = _build_cells(config, axis)
    builder = problem_builder(config.problem, config.overrides)
    results = run_experiment(
        builder, cells, config.n_trials, config.base_seed, n_workers=_worker_count()
    )

    os.makedirs(config.out, exist_ok=True)
    records_path = os.path.join(config.out, "records.csv")
    summary_path = os.path.join(config.out, "summary.csv")
    write_records_csv(results, records_path, header_comment=config.header_comment)
    write_summary_csv(results, summary_path, header_comment=config.header_comment)

    any_all_diverged = False
    for result in results:
        if result.summary is None:
            any_all_diverged = True
            print(f"{result.cell.cell_id}: all {len(result.records)} trials diverged")
            continue
        summary = result.summary
        print(
            f"{result.cell.cell_id}: final log-cost {summary.mean_log_cost[-1]:.4f}"
            f" +- {summary.stderr_log_cost[-1]:.4f}"
            f" ({summary.n_completed}/{summary.n_trials} completed)"
        )
    print(f"wrote {records_path} and {summary_path}")
    return 1 if any_all_diverged else 0


def _flag_overrides(args: argparse.Namespace) -> dict:
    return {
        "trials": args.trials,
        "seed": args.seed,
        "out": args.out,
        "header_comment": False if args.no_header_comment else None,
    }


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file (defaults apply when omitted)")
    parser.add_argument("--trials", type=int, help="override n_trials")
    parser.add_argument("--seed", type=int, help="override base_seed")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument(
        "--no-header-comment",
        action="store_true",
        help="omit the timestamped comment line (byte-reproducible CSVs)",
    )


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="kinv", description="Ensemble Kalman inversion experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run the configured experiment grid")
    _add_run_flags(run_parser)

    sweep_parser = sub.add_parser("sweep", help="run a one-axis sweep")
    _add_run_flags(sweep_parser)
    sweep_parser.add_argument("--axis", choices=SWEEP_AXES, required=True)

    plot_parser = sub.add_parser("plot", help="plot a records CSV to SVG")
    plot_parser.add_argument("records", help="records CSV produced by run/sweep")
    plot_parser.add_argument("--out", help="output SVG path (default: alongside the CSV)")

    args = parser.parse_args(argv)

    if args.command == "plot":
        out = args.out or os.path.splitext(args.records)[0] + ".svg"
        try:
            stats = read_records_csv(args.records)
        except (OSError, MalformedCsv) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        plot_convergence(stats, out)
        print(f"wrote {out}")
        return 0

    try:
        config = parse_config(args.config, _flag_overrides(args))
        axis = args.axis if args.command == "sweep" else None
        if axis is not None:
            # The swept values must be listed in the config.
            config.sweep_values(axis)
        return _execute(config, axis)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
