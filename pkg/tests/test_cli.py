import csv
import os
import xml.etree.ElementTree as ElementTree

import pytest

from kalman_inversion.cli import main

LINEAR_INI = """
[experiment]
problem = linear
algorithms = eki
schedules = none, recursive
n_trials = 3
iterations = 5
ensemble_size = 5
base_seed = 9
[problem]
dim_in = 2
dim_out = 2
"""


@pytest.fixture
def linear_config(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(LINEAR_INI)
    return str(path)


def read_rows(path):
    with open(path) as handle:
        return list(csv.DictReader(line for line in handle if not line.startswith("#")))


def test_run_writes_csvs_and_digest(linear_config, tmp_path, capsys):
    out = str(tmp_path / "results")
    code = main(["run", "--config", linear_config, "--out", out])
    assert code == 0
    records = read_rows(os.path.join(out, "records.csv"))
    summary = read_rows(os.path.join(out, "summary.csv"))
    # 2 cells x 3 trials x 6 iterations
    assert len(records) == 2 * 3 * 6
    assert len(summary) == 2 * 6
    assert {r["cell_id"] for r in records} == {"eki-none-N5-dt1", "eki-recursive-N5-dt1"}
    digest = capsys.readouterr().out
    assert digest.count("final log-cost") == 2


def test_run_paired_seeds_across_schedules(linear_config, tmp_path):
    out = str(tmp_path / "results")
    assert main(["run", "--config", linear_config, "--out", out]) == 0
    records = read_rows(os.path.join(out, "records.csv"))
    by_cell = {}
    for row in records:
        if row["iteration"] == "0":
            by_cell.setdefault(row["cell_id"], []).append((row["trial"], row["seed"], row["log_cost"]))
    cells = list(by_cell.values())
    assert cells[0] == cells[1]  # identical seeds and initial costs


def test_invalid_algorithm_exits_2_without_files(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[experiment]\nalgorithms = sgd\n")
    out = str(tmp_path / "results")
    code = main(["run", "--config", str(path), "--out", out])
    assert code == 2
    assert not os.path.exists(out)
    assert "sgd" in capsys.readouterr().err


def test_unknown_key_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.ini"
    path.write_text("[experiment]\nensemble_sise = 4\n")
    assert main(["run", "--config", str(path)]) == 2
    assert "ensemble_sise" in capsys.readouterr().err


def test_dt_sweep_grid_rows(tmp_path):
    path = tmp_path / "sweep.ini"
    path.write_text(
        "[experiment]\nproblem = linear\nalgorithms = eki\nschedules = none, recursive\n"
        "n_trials = 2\niterations = 3\nensemble_size = 4\ndt = 1.0, 0.5, 0.1\n"
    )
    out = str(tmp_path / "results")
    assert main(["sweep", "--config", str(path), "--axis", "dt", "--out", out]) == 0
    summary = read_rows(os.path.join(out, "summary.csv"))
    # 3 dt values x 2 schedules, 4 iterations each
    assert len(summary) == 3 * 2 * 4
    assert {row["dt"] for row in summary} == {"1.0", "0.5", "0.1"}


def test_ensemble_size_sweep(tmp_path):
    path = tmp_path / "sweep.ini"
    path.write_text(
        "[experiment]\nproblem = linear\nalgorithms = eki\nschedules = none, recursive\n"
        "n_trials = 2\niterations = 3\nensemble_sizes = 10, 200\n"
    )
    out = str(tmp_path / "results")
    assert main(["sweep", "--config", str(path), "--axis", "ensemble_size", "--out", out]) == 0
    summary = read_rows(os.path.join(out, "summary.csv"))
    assert {row["ensemble_size"] for row in summary} == {"10", "200"}


def test_ensemble_sweep_requires_sizes(tmp_path, capsys):
    path = tmp_path / "sweep.ini"
    path.write_text("[experiment]\nproblem = linear\n")
    assert main(["sweep", "--config", str(path), "--axis", "ensemble_size"]) == 2
    assert "ensemble_sizes" in capsys.readouterr().err


def test_schedule_sweep_mirrors_coefficient_comparison(tmp_path):
    path = tmp_path / "sweep.ini"
    path.write_text(
        "[experiment]\nproblem = linear\nalgorithms = eki\n"
        "schedules = none, original, recursive, constant:0.9\n"
        "n_trials = 2\niterations = 3\nensemble_size = 4\n"
    )
    out = str(tmp_path / "results")
    assert main(["sweep", "--config", str(path), "--axis", "schedule", "--out", out]) == 0
    summary = read_rows(os.path.join(out, "summary.csv"))
    assert {row["schedule"] for row in summary} == {"none", "original", "recursive", "constant:0.9"}


def test_plot_roundtrip(linear_config, tmp_path):
    out = str(tmp_path / "results")
    assert main(["run", "--config", linear_config, "--out", out]) == 0
    svg = str(tmp_path / "plot.svg")
    assert main(["plot", os.path.join(out, "records.csv"), "--out", svg]) == 0
    root = ElementTree.parse(svg).getroot()
    assert root.tag.endswith("svg")


def test_plot_missing_file_exits_2(tmp_path, capsys):
    assert main(["plot", str(tmp_path / "nope.csv")]) == 2
    assert "error" in capsys.readouterr().err


def test_plot_empty_csv_exits_2(tmp_path, capsys):
    path = tmp_path / "empty.csv"
    path.write_text("")
    assert main(["plot", str(path)]) == 2
    capsys.readouterr()


def test_plot_malformed_csv_exits_2(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n1,2,3\n")
    assert main(["plot", str(path)]) == 2


def test_records_csv_byte_deterministic(linear_config, tmp_path):
    out_a = str(tmp_path / "a")
    out_b = str(tmp_path / "b")
    assert main(["run", "--config", linear_config, "--out", out_a, "--no-header-comment"]) == 0
    assert main(["run", "--config", linear_config, "--out", out_b, "--no-header-comment"]) == 0
    with open(os.path.join(out_a, "records.csv"), "rb") as fa:
        bytes_a = fa.read()
    with open(os.path.join(out_b, "records.csv"), "rb") as fb:
        bytes_b = fb.read()
    assert bytes_a == bytes_b


def test_header_comment_present_by_default(linear_config, tmp_path):
    out = str(tmp_path / "results")
    assert main(["run", "--config", linear_config, "--out", out]) == 0
    with open(os.path.join(out, "records.csv")) as handle:
        assert handle.readline().startswith("# generated ")


def test_all_diverged_cell_exits_1(tmp_path, capsys, monkeypatch):
    import numpy as np

    from kalman_inversion import problems
    from kalman_inversion.harness import InverseProblem
    from kalman_inversion.models import ForwardModel
    from kalman_inversion.sampling import GaussianMV

    class BlowUp(ForwardModel):
        input_dim = 2
        output_dim = 2

        def evaluate(self, u):
            return np.full(2, 2e12)  # beyond the driver's divergence guard

    def builder(overrides, rng):
        return InverseProblem(
            model=BlowUp(),
            gamma=np.eye(2),
            truth=np.zeros(2),
            data=None,
            initial_dist=GaussianMV(np.zeros(2), np.eye(2)),
        )

    monkeypatch.setitem(problems.BUILDERS, "linear", builder)
    path = tmp_path / "run.ini"
    path.write_text("[experiment]\nproblem = linear\nn_trials = 2\niterations = 3\nschedules = none\n")
    out = str(tmp_path / "results")
    code = main(["run", "--config", str(path), "--out", out])
    assert code == 1
    assert "all 2 trials diverged" in capsys.readouterr().out
    assert os.path.exists(os.path.join(out, "records.csv"))


def test_ki_threads_does_not_change_results(linear_config, tmp_path, monkeypatch):
    out_serial = str(tmp_path / "serial")
    out_parallel = str(tmp_path / "parallel")
    monkeypatch.setenv("KI_THREADS", "1")
    assert main(["run", "--config", linear_config, "--out", out_serial, "--no-header-comment"]) == 0
    monkeypatch.setenv("KI_THREADS", "3")
    assert main(["run", "--config", linear_config, "--out", out_parallel, "--no-header-comment"]) == 0
    with open(os.path.join(out_serial, "records.csv"), "rb") as fa:
        with open(os.path.join(out_parallel, "records.csv"), "rb") as fb:
            assert fa.read() == fb.read()


def test_unwritable_output_exits_2(linear_config, tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("a file, not a directory")
    out = str(blocker / "results")
    assert main(["run", "--config", linear_config, "--out", out]) == 2
    assert "error" in capsys.readouterr().err


def test_darcy_smoke_run(tmp_path):
    path = tmp_path / "darcy.ini"
    path.write_text(
        "[experiment]\nproblem = darcy\nalgorithms = eki\nschedules = recursive\n"
        "n_trials = 3\niterations = 4\nensemble_size = 30\n"
        "[problem]\ngrid_n = 32\nkl_dim = 20\n"
    )
    out = str(tmp_path / "results")
    assert main(["run", "--config", str(path), "--out", out]) == 0
    assert os.path.exists(os.path.join(out, "records.csv"))
    summary = read_rows(os.path.join(out, "summary.csv"))
    assert len(summary) == 5  # one cell, iterations 0..4
