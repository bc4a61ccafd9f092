import math

import numpy as np
import pytest

from kalman_inversion.schedules import (
    ConstantMomentum,
    NoAcceleration,
    OriginalNesterov,
    RecursiveNesterov,
    momentum_coefficient,
    parse_schedule,
    schedule_label,
)


def emit(schedule, count):
    out = []
    for j in range(1, count + 1):
        lam, schedule = momentum_coefficient(schedule, j)
        out.append(lam)
    return out, schedule


def recursion_oracle(count):
    # independent re-iteration of the theta recursion
    theta = 1.0
    lams = []
    for _ in range(count):
        theta_next = 0.5 * (math.sqrt(theta**4 + 4 * theta**2) - theta**2)
        lams.append(theta_next * (1.0 / theta - 1.0))
        theta = theta_next
    return lams


def test_original_exact_values():
    lams, _ = emit(OriginalNesterov(), 3)
    assert lams == [0.0, 1.0 / 4.0, 2.0 / 5.0]


def test_recursive_first_coefficient_is_exactly_zero():
    lams, _ = emit(RecursiveNesterov(), 1)
    assert lams[0] == 0.0


def test_recursive_matches_independent_recursion():
    lams, _ = emit(RecursiveNesterov(), 50)
    oracle = recursion_oracle(50)
    assert np.allclose(lams, oracle, atol=1e-14)
    assert abs(lams[1] - 0.2818) <= 1e-3
    assert lams[1] == pytest.approx(0.28175352512532076, abs=1e-12)


def test_recursive_theta_state_satisfies_recursion():
    schedule = RecursiveNesterov()
    assert schedule.theta_curr == 1.0
    for j in range(1, 20):
        _, schedule = momentum_coefficient(schedule, j)
        tp = schedule.theta_prev
        expected = 0.5 * (math.sqrt(tp**4 + 4 * tp**2) - tp**2)
        assert schedule.theta_curr == pytest.approx(expected, rel=1e-15)
        assert 0.0 < schedule.theta_curr <= 1.0


@pytest.mark.parametrize("make", [OriginalNesterov, RecursiveNesterov])
def test_asymptotics_at_j_1000(make):
    lams, _ = emit(make(), 1000)
    j = 1000
    assert 1.0 - 3.5 / j <= lams[-1] <= 1.0 - 2.5 / j


@pytest.mark.parametrize("make", [OriginalNesterov, RecursiveNesterov])
def test_monotone_nondecreasing_and_bounded_to_1e6(make):
    schedule = make()
    prev = -1.0
    for j in range(1, 10**6 + 1):
        lam, schedule = momentum_coefficient(schedule, j)
        assert 0.0 <= lam < 1.0
        assert lam >= prev
        prev = lam


def test_constant_returns_c():
    lams, _ = emit(ConstantMomentum(0.9), 5)
    assert lams == [0.9] * 5


def test_constant_range_validation():
    with pytest.raises(ValueError):
        ConstantMomentum(1.0)
    with pytest.raises(ValueError):
        ConstantMomentum(-0.1)


def test_no_acceleration_is_zero():
    lams, _ = emit(NoAcceleration(), 4)
    assert lams == [0.0] * 4


def test_iteration_index_must_be_positive():
    with pytest.raises(ValueError):
        momentum_coefficient(OriginalNesterov(), 0)


@pytest.mark.parametrize(
    "label, kind",
    [
        ("none", NoAcceleration),
        ("original", OriginalNesterov),
        ("recursive", RecursiveNesterov),
        ("constant:0.9", ConstantMomentum),
    ],
)
def test_parse_and_label_roundtrip(label, kind):
    schedule = parse_schedule(label)
    assert isinstance(schedule, kind)
    assert schedule_label(schedule) == label


def test_parse_rejects_unknown():
    with pytest.raises(ValueError):
        parse_schedule("quadratic")
    with pytest.raises(ValueError):
        parse_schedule("constant:x")
