"""Reference models used by the tests, scripts and shipped JSON files."""
from __future__ import annotations

from .arrival import DBmapModel, from_bernoulli, from_matrices, from_modulated_binomial
from .service import Geometric, ShiftedPoisson


def binomial_two_state(initial=(1.0, 0.0)) -> DBmapModel:
    """Two background states; leaving state 1 brings Binomial(10, 0.3) customers, state 2 Binomial(20, 0.6)."""
    return from_modulated_binomial([[0.6, 0.4], [0.1, 0.9]], [10, 20], [0.3, 0.6], initial)


def binomial_two_state_service() -> ShiftedPoisson:
    return ShiftedPoisson(2.0)


def five_batch_two_state(initial=(1.0, 0.0)) -> DBmapModel:
    """Two states, batch sizes 0..4 with explicitly listed matrices."""
    return from_matrices(
        [
            [[0.1, 0.2], [0.05, 0.2]],
            [[0.1, 0.1], [0.1, 0.1]],
            [[0.1, 0.15], [0.1, 0.1]],
            [[0.05, 0.1], [0.1, 0.05]],
            [[0.05, 0.05], [0.1, 0.1]],
        ],
        initial,
    )


def five_batch_two_state_service() -> ShiftedPoisson:
    # Poisson service with mean 4 on {1, 2, ...}: 1 + Poisson(3)
    return ShiftedPoisson(3.0)


def bernoulli_geometric(p: float = 0.5, alpha: float = 0.5):
    return from_bernoulli(p), Geometric(alpha)
