import numpy as np
import pytest

from kalman_inversion.harness import (
    LOG_COST_FLOOR,
    CellSpec,
    ConvergenceRecord,
    InverseProblem,
    TrialConfig,
    generate_data,
    log_misfit_cost,
    misfit_cost,
    run_experiment,
    run_trial,
    summarize_series,
)
from kalman_inversion.models import LinearModel
from kalman_inversion.problems import problem_builder
from kalman_inversion.sampling import STREAM_DATA, STREAM_PROBLEM, GaussianMV, make_rng
from kalman_inversion.schedules import NoAcceleration, OriginalNesterov, RecursiveNesterov

from conftest import random_spd


def linear_problem(seed=0, d=2, k=2, sigma=0.5, data=True):
    rng = np.random.default_rng(seed)
    model = LinearModel(rng.standard_normal((k, d)))
    problem = InverseProblem(
        model=model,
        gamma=sigma**2 * np.eye(k),
        truth=np.ones(d),
        data=None,
        initial_dist=GaussianMV(np.zeros(d), np.eye(d)),
    )
    if data:
        y = generate_data(model, problem.truth, problem.gamma, make_rng(seed, STREAM_DATA))
        problem = InverseProblem(
            model=model,
            gamma=problem.gamma,
            truth=problem.truth,
            data=y,
            initial_dist=problem.initial_dist,
        )
    return problem


# ---------------------------------------------------------------- data generation


def test_generate_data_noiseless_limit():
    problem = linear_problem(data=False)
    y = generate_data(problem.model, problem.truth, 1e-30 * np.eye(2), make_rng(1, STREAM_DATA))
    assert np.allclose(y, problem.model.evaluate(problem.truth), atol=1e-10)


def test_generate_data_reproducible():
    problem = linear_problem(data=False)
    a = generate_data(problem.model, problem.truth, problem.gamma, make_rng(9, STREAM_DATA))
    b = generate_data(problem.model, problem.truth, problem.gamma, make_rng(9, STREAM_DATA))
    assert np.array_equal(a, b)


def test_generate_data_noise_variance_monte_carlo():
    model = LinearModel(np.eye(1))
    truth = np.zeros(1)
    gamma = np.eye(1)
    rng = make_rng(5, STREAM_DATA)
    draws = np.array([generate_data(model, truth, gamma, rng)[0] for _ in range(10**5)])
    assert abs(draws.var() - 1.0) <= 0.05


# ---------------------------------------------------------------- cost


def test_misfit_cost_zero_at_match():
    assert misfit_cost(np.ones(3), np.ones(3), np.eye(3)) == 0.0


def test_misfit_cost_scalar():
    assert misfit_cost(np.array([2.0]), np.array([0.0]), np.array([[1.0]])) == pytest.approx(2.0)


def test_misfit_cost_matches_dense_inverse():
    gamma = random_spd(5, seed=11)
    rng = np.random.default_rng(2)
    y = rng.standard_normal(5)
    g = rng.standard_normal(5)
    expected = 0.5 * (y - g) @ np.linalg.inv(gamma) @ (y - g)
    assert misfit_cost(y, g, gamma) == pytest.approx(expected, abs=1e-10)


def test_log_cost_floor():
    assert log_misfit_cost(np.ones(2), np.ones(2), np.eye(2)) == LOG_COST_FLOOR


def test_misfit_cost_nonnegative():
    rng = np.random.default_rng(13)
    for seed in range(20):
        gamma = random_spd(4, seed=seed)
        assert misfit_cost(rng.standard_normal(4), rng.standard_normal(4), gamma) >= 0.0


# ---------------------------------------------------------------- run_trial


def test_run_trial_zero_iterations_single_entry():
    problem = linear_problem()
    record = run_trial(problem, TrialConfig(seed=3, iterations=0, ensemble_size=4))
    assert record.log_cost.shape == (1,)
    assert record.completed


def test_run_trial_deterministic():
    problem = linear_problem()
    config = TrialConfig(seed=3, algorithm="eki", schedule=RecursiveNesterov(), iterations=6, ensemble_size=4)
    a = run_trial(problem, config)
    b = run_trial(problem, config)
    assert np.array_equal(a.log_cost, b.log_cost)
    assert np.array_equal(a.terminal_mean, b.terminal_mean)


def test_run_trial_accelerated_matches_plain_through_iteration_one():
    problem = linear_problem()
    base = dict(seed=3, algorithm="eki", iterations=5, ensemble_size=4)
    plain = run_trial(problem, TrialConfig(schedule=NoAcceleration(), **base))
    accel = run_trial(problem, TrialConfig(schedule=OriginalNesterov(), **base))
    assert plain.log_cost[0] == accel.log_cost[0]
    assert plain.log_cost[1] == accel.log_cost[1]


def test_run_trial_requires_data():
    problem = linear_problem(data=False)
    with pytest.raises(ValueError):
        run_trial(problem, TrialConfig(seed=1))


def test_run_trial_uki_ignores_ensemble_size():
    problem = linear_problem()
    record = run_trial(problem, TrialConfig(seed=3, algorithm="uki", iterations=3, ensemble_size=50))
    assert record.n_particles == 2 * 2 + 1


def test_run_trial_records_divergence_status():
    problem = linear_problem()
    bad = InverseProblem(
        model=problem.model,
        gamma=1e-18 * np.eye(2),
        truth=problem.truth,
        data=np.full(2, 1e14),
        initial_dist=problem.initial_dist,
    )
    record = run_trial(bad, TrialConfig(seed=3, iterations=4, ensemble_size=4))
    assert not record.completed
    assert record.status.startswith("diverged@")
    assert np.all(np.isnan(record.terminal_mean))


def test_run_trial_issues_exactly_n_times_j_plus_1_model_calls():
    from conftest import CountingModel

    problem = linear_problem()
    counting = CountingModel(problem.model)
    counted_problem = InverseProblem(
        model=counting,
        gamma=problem.gamma,
        truth=problem.truth,
        data=problem.data,
        initial_dist=problem.initial_dist,
    )
    run_trial(counted_problem, TrialConfig(seed=3, schedule=RecursiveNesterov(), iterations=7, ensemble_size=4))
    assert counting.calls == 4 * (7 + 1)


def test_trial_config_validation():
    with pytest.raises(ValueError):
        TrialConfig(seed=1, algorithm="enkf")
    with pytest.raises(ValueError):
        TrialConfig(seed=1, algorithm="eki", ensemble_size=1)
    with pytest.raises(ValueError):
        TrialConfig(seed=1, uki_alpha=0.0)


# ---------------------------------------------------------------- summaries


def synthetic_record(values, diverged_at=None):
    return ConvergenceRecord(
        config=TrialConfig(seed=0, ensemble_size=4),
        log_cost=np.asarray(values, dtype=float),
        terminal_mean=np.zeros(2),
        diverged_at=diverged_at,
        n_particles=4,
    )


def test_summary_identical_records_zero_stderr():
    records = [synthetic_record([1.0, 2.0])] * 3
    summary = summarize_series(records)
    assert np.array_equal(summary.mean_log_cost, [1.0, 2.0])
    assert np.array_equal(summary.stderr_log_cost, [0.0, 0.0])


def test_summary_hand_arithmetic():
    summary = summarize_series([synthetic_record([0.0]), synthetic_record([2.0])])
    assert summary.mean_log_cost[0] == pytest.approx(1.0)
    # std with N-1 denominator is sqrt(2); stderr divides by sqrt(2)
    assert summary.stderr_log_cost[0] == pytest.approx(1.0)


def test_summary_excludes_diverged_but_counts_them():
    records = [synthetic_record([0.0, 1.0]), synthetic_record([100.0], diverged_at=1), synthetic_record([2.0, 3.0])]
    summary = summarize_series(records)
    assert summary.n_trials == 3
    assert summary.n_completed == 2
    assert np.array_equal(summary.mean_log_cost, [1.0, 2.0])


def test_summary_monte_carlo_stderr_scale():
    rng = np.random.default_rng(77)
    records = [synthetic_record(rng.standard_normal(4)) for _ in range(1000)]
    summary = summarize_series(records)
    expected = 1.0 / np.sqrt(1000)
    assert np.all(np.abs(summary.stderr_log_cost - expected) <= 0.1 * expected)


def test_summary_requires_completed_records():
    with pytest.raises(ValueError):
        summarize_series([synthetic_record([1.0], diverged_at=0)])


# ---------------------------------------------------------------- run_experiment


def tiny_builder(rng):
    model = LinearModel(rng.standard_normal((2, 2)))
    return InverseProblem(
        model=model,
        gamma=0.25 * np.eye(2),
        truth=np.ones(2),
        data=None,
        initial_dist=GaussianMV(np.zeros(2), np.eye(2)),
    )


def test_experiment_single_trial_summary_is_that_trial():
    cells = [CellSpec("eki", NoAcceleration(), ensemble_size=4, iterations=3)]
    (result,) = run_experiment(tiny_builder, cells, n_trials=1, base_seed=5)
    assert result.summary.n_trials == 1
    assert np.array_equal(result.summary.mean_log_cost, result.records[0].log_cost)
    assert np.array_equal(result.summary.stderr_log_cost, np.zeros(4))


def test_experiment_pairs_randomness_across_schedules():
    cells = [
        CellSpec("eki", NoAcceleration(), ensemble_size=4, iterations=3),
        CellSpec("eki", RecursiveNesterov(), ensemble_size=4, iterations=3),
    ]
    plain, accel = run_experiment(tiny_builder, cells, n_trials=4, base_seed=11)
    for a, b in zip(plain.records, accel.records):
        assert a.config.seed == b.config.seed
        assert a.log_cost[0] == b.log_cost[0]


def test_experiment_pairs_data_across_algorithms():
    cells = [
        CellSpec("eki", NoAcceleration(), ensemble_size=4, iterations=2),
        CellSpec("uki", NoAcceleration(), ensemble_size=4, iterations=2),
    ]
    eki, uki = run_experiment(tiny_builder, cells, n_trials=3, base_seed=11)
    assert [r.config.seed for r in eki.records] == [r.config.seed for r in uki.records]


def test_experiment_independent_of_worker_count():
    cells = [CellSpec("eki", RecursiveNesterov(), ensemble_size=4, iterations=4)]
    (serial,) = run_experiment(tiny_builder, cells, n_trials=6, base_seed=2, n_workers=1)
    (parallel,) = run_experiment(tiny_builder, cells, n_trials=6, base_seed=2, n_workers=3)
    for a, b in zip(serial.records, parallel.records):
        assert np.array_equal(a.log_cost, b.log_cost)


def test_experiment_trial_seeds_are_base_plus_index():
    cells = [CellSpec("eki", NoAcceleration(), ensemble_size=4, iterations=1)]
    (result,) = run_experiment(tiny_builder, cells, n_trials=3, base_seed=40)
    assert [r.config.seed for r in result.records] == [40, 41, 42]


def test_problem_builder_truth_is_experiment_level():
    builder = problem_builder("lorenz96", {"dim": 5, "spinup_time": 5.0})
    p1 = builder(make_rng(7, STREAM_PROBLEM))
    p2 = builder(make_rng(7, STREAM_PROBLEM))
    assert np.array_equal(p1.truth, p2.truth)


def test_problem_builder_rejects_unknown_override():
    with pytest.raises(ValueError):
        problem_builder("exp_sin", {"grid_n": 3})(make_rng(0, STREAM_PROBLEM))
