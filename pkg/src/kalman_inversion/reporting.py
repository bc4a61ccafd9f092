"""CSV records/summaries and SVG convergence plots.

Schemas (one row per trial-iteration / per cell-iteration):

    records: cell_id,algorithm,schedule,ensemble_size,dt,trial,seed,iteration,log_cost,status
    summary: cell_id,algorithm,schedule,ensemble_size,dt,iteration,mean_log_cost,stderr_log_cost,n_completed,n_diverged

Floats are written with repr (shortest round-trip), so identical configs
produce byte-identical files; the only non-deterministic line is an optional
timestamped comment, suppressible with header_comment=False. Plotting is
CSV-driven so expensive runs can be re-plotted without recomputation.
"""

from __future__ import annotations

import csv
import datetime
from dataclasses import dataclass

import numpy as np

from .harness import CellResult
from .schedules import schedule_label

RECORDS_HEADER = [
    "cell_id",
    "algorithm",
    "schedule",
    "ensemble_size",
    "dt",
    "trial",
    "seed",
    "iteration",
    "log_cost",
    "status",
]

SUMMARY_HEADER = [
    "cell_id",
    "algorithm",
    "schedule",
    "ensemble_size",
    "dt",
    "iteration",
    "mean_log_cost",
    "stderr_log_cost",
    "n_completed",
    "n_diverged",
]


class MalformedCsv(Exception):
    """Records CSV does not conform to the expected schema."""


def _timestamp_comment() -> str:
    now = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"# generated {now}"


def write_records_csv(results: list[CellResult], path: str, header_comment: bool = True) -> None:
    with open(path, "w", newline="") as handle:
        if header_comment:
            handle.write(_timestamp_comment() + "\n")
        writer = csv.writer(handle)
        writer.writerow(RECORDS_HEADER)
        for result in results:
            cell = result.cell
            for trial, record in enumerate(result.records):
                for iteration, value in enumerate(record.log_cost):
                    writer.writerow(
                        [
                            cell.cell_id,
                            cell.algorithm,
                            schedule_label(cell.schedule),
                            record.n_particles,
                            repr(cell.dt),
                            trial,
                            record.config.seed,
                            iteration,
                            repr(float(value)),
                            record.status,
                        ]
                    )


def write_summary_csv(results: list[CellResult], path: str, header_comment: bool = True) -> None:
    with open(path, "w", newline="") as handle:
        if header_comment:
            handle.write(_timestamp_comment() + "\n")
        writer = csv.writer(handle)
        writer.writerow(SUMMARY_HEADER)
        for result in results:
            cell = result.cell
            if result.summary is None:
                continue
            summary = result.summary
            n_particles = result.records[0].n_particles
            n_diverged = summary.n_trials - summary.n_completed
            for iteration in range(len(summary.mean_log_cost)):
                writer.writerow(
                    [
                        cell.cell_id,
                        cell.algorithm,
                        schedule_label(cell.schedule),
                        n_particles,
                        repr(cell.dt),
                        iteration,
                        repr(float(summary.mean_log_cost[iteration])),
                        repr(float(summary.stderr_log_cost[iteration])),
                        summary.n_completed,
                        n_diverged,
                    ]
                )


@dataclass
class SeriesStats:
    """Per-cell convergence statistics recovered from a records CSV."""

    cell_id: str
    iterations: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    n_completed: int


def read_records_csv(path: str) -> list[SeriesStats]:
    """Aggregate a records CSV back into per-cell mean/stderr series.

    Diverged trials are excluded, matching the summary convention.
    """
    per_cell: dict[str, dict[int, dict[int, float]]] = {}
    order: list[str] = []
    with open(path, newline="") as handle:
        lines = (line for line in handle if not line.startswith("#"))
        reader = csv.reader(lines)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedCsv("CSV has no header row") from None
        if header != RECORDS_HEADER:
            raise MalformedCsv(f"unexpected header {header!r}")
        for row in reader:
            if len(row) != len(RECORDS_HEADER):
                raise MalformedCsv(f"row has {len(row)} fields, expected {len(RECORDS_HEADER)}")
            cell_id, status = row[0], row[9]
            try:
                trial = int(row[5])
                iteration = int(row[7])
                log_cost = float(row[8])
            except ValueError as exc:
                raise MalformedCsv(f"bad numeric field in row {row!r}") from exc
            if status != "completed":
                continue
            if cell_id not in per_cell:
                per_cell[cell_id] = {}
                order.append(cell_id)
            per_cell[cell_id].setdefault(trial, {})[iteration] = log_cost
    if not order:
        raise MalformedCsv("CSV holds no completed trial rows")

    stats = []
    for cell_id in order:
        trials = per_cell[cell_id]
        lengths = {len(series) for series in trials.values()}
        if len(lengths) != 1:
            raise MalformedCsv(f"cell {cell_id} has inconsistent series lengths")
        series = np.vstack(
            [[trials[t][i] for i in sorted(trials[t])] for t in sorted(trials)]
        )
        n = series.shape[0]
        mean = series.mean(axis=0)
        stderr = series.std(axis=0, ddof=1) / np.sqrt(n) if n > 1 else np.zeros(series.shape[1])
        stats.append(SeriesStats(cell_id, np.arange(series.shape[1]), mean, stderr, n))
    return stats


def plot_convergence(stats: list[SeriesStats], out_path: str) -> None:
    """Mean log-cost vs iteration per cell, with a +-1 stderr ribbon, as SVG."""
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    for s in stats:
        (line,) = ax.plot(s.iterations, s.mean, label=f"{s.cell_id} ({s.n_completed} trials)")
        ax.fill_between(
            s.iterations, s.mean - s.stderr, s.mean + s.stderr, alpha=0.25, color=line.get_color()
        )
    ax.set_xlabel("iteration")
    ax.set_ylabel("mean log cost")
    ax.legend(fontsize="small")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_path, format="svg")
    plt.close(fig)
