"""Shared exception types."""

from __future__ import annotations


class DivergedError(Exception):
    """A trajectory or particle system blew up (non-finite or > norm guard).

    `iteration` is the driver iteration at which the blow-up was detected
    (None when raised outside a driver loop); `history` carries the
    per-iteration records completed before the abort.
    """

    def __init__(self, message: str, iteration: int | None = None, history: list | None = None):
        super().__init__(message)
        self.iteration = iteration
        self.history = history if history is not None else []
