import numpy as np
import pytest


class CountingModel:
    """Forward-model wrapper that counts evaluate calls."""

    def __init__(self, inner):
        self.inner = inner
        self.calls = 0

    @property
    def input_dim(self):
        return self.inner.input_dim

    @property
    def output_dim(self):
        return self.inner.output_dim

    def evaluate(self, u):
        self.calls += 1
        return self.inner.evaluate(u)


def random_spd(size: int, seed: int, jitter: float = 0.1) -> np.ndarray:
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((size, size))
    return b @ b.T + jitter * np.eye(size)


def poisson_center_oracle() -> float:
    """Fourier series for -lap p = 1 on the unit square at (1/2, 1/2)."""
    total = 0.0
    for m in range(1, 400, 2):
        for n in range(1, 400, 2):
            total += (
                16.0
                / (np.pi**4 * m * n * (m * m + n * n))
                * np.sin(m * np.pi / 2)
                * np.sin(n * np.pi / 2)
            )
    return total


@pytest.fixture
def counting_model_cls():
    return CountingModel
