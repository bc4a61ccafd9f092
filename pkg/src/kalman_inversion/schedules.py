"""Momentum-coefficient schedules for the accelerated updates.

Each schedule is an immutable value; advancing it returns the coefficient for
iteration j together with the schedule state to use at j + 1. All schedules
emit 0 at j = 1, so the first accelerated update always coincides with the
plain one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class NoAcceleration:
    """Plain, unaccelerated iteration: coefficient identically zero."""


@dataclass(frozen=True)
class OriginalNesterov:
    """Closed-form coefficient (j - 1) / (j + 2)."""


@dataclass(frozen=True)
class RecursiveNesterov:
    """Coefficient theta_j (1/theta_{j-1} - 1) from the recursion

        theta_0 = 1,   theta_{j+1} = (sqrt(theta_j^4 + 4 theta_j^2) - theta_j^2) / 2.

    State holds (theta_{j-1}, theta_j) after emitting the coefficient for
    iteration j; the initial state is (nan, theta_0).
    """

    theta_prev: float = math.nan
    theta_curr: float = 1.0


@dataclass(frozen=True)
class ConstantMomentum:
    """Fixed tuning coefficient c in [0, 1)."""

    c: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.c < 1.0:
            raise ValueError(f"constant momentum coefficient must be in [0, 1), got {self.c}")


MomentumSchedule = NoAcceleration | OriginalNesterov | RecursiveNesterov | ConstantMomentum


def momentum_coefficient(schedule: MomentumSchedule, j: int) -> tuple[float, MomentumSchedule]:
    """Coefficient for iteration j >= 1, plus the advanced schedule state."""
    if j < 1:
        raise ValueError(f"iteration index must be >= 1, got {j}")
    if isinstance(schedule, NoAcceleration):
        return 0.0, schedule
    if isinstance(schedule, OriginalNesterov):
        return (j - 1) / (j + 2), schedule
    if isinstance(schedule, ConstantMomentum):
        return schedule.c, schedule
    if isinstance(schedule, RecursiveNesterov):
        theta = schedule.theta_curr
        theta_next = 0.5 * (math.sqrt(theta**4 + 4.0 * theta**2) - theta**2)
        lam = theta_next * (1.0 / theta - 1.0)
        return lam, RecursiveNesterov(theta_prev=theta, theta_curr=theta_next)
    raise TypeError(f"unknown schedule: {schedule!r}")


def parse_schedule(label: str) -> MomentumSchedule:
    """Schedule from its config label: none | original | recursive | constant:<c>."""
    text = label.strip().lower()
    if text == "none":
        return NoAcceleration()
    if text == "original":
        return OriginalNesterov()
    if text == "recursive":
        return RecursiveNesterov()
    if text.startswith("constant:"):
        try:
            c = float(text.split(":", 1)[1])
        except ValueError as exc:
            raise ValueError(f"bad constant momentum value in {label!r}") from exc
        return ConstantMomentum(c)
    raise ValueError(f"unknown schedule {label!r} (expected none, original, recursive, constant:<c>)")


def schedule_label(schedule: MomentumSchedule) -> str:
    if isinstance(schedule, NoAcceleration):
        return "none"
    if isinstance(schedule, OriginalNesterov):
        return "original"
    if isinstance(schedule, RecursiveNesterov):
        return "recursive"
    if isinstance(schedule, ConstantMomentum):
        return f"constant:{schedule.c:g}"
    raise TypeError(f"unknown schedule: {schedule!r}")
