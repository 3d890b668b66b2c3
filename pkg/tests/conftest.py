import sys
from pathlib import Path

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile("default")

from transq import catalog  # noqa: E402
from transq.service import Deterministic, ExplicitPmf, Geometric, ShiftedPoisson  # noqa: E402

MODELS_DIR = Path(__file__).parent.parent / "models"


@pytest.fixture
def fig_model():
    return catalog.five_batch_two_state(), catalog.five_batch_two_state_service()


@pytest.fixture
def binom_model():
    return catalog.binomial_two_state(), catalog.binomial_two_state_service()


@pytest.fixture
def models_dir():
    return MODELS_DIR


def random_law(rng):
    kind = rng.integers(4)
    if kind == 0:
        return Geometric(float(rng.uniform(0.05, 0.95)))
    if kind == 1:
        return ShiftedPoisson(float(rng.uniform(0.2, 4.0)))
    if kind == 2:
        return Deterministic(int(rng.integers(1, 6)))
    q = rng.dirichlet(np.ones(int(rng.integers(1, 8))))
    q[-1] = 1.0 - q[:-1].sum()
    return ExplicitPmf(tuple(q))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
