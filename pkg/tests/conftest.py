import numpy as np
import pytest

from clvboost import SimulationConfig, make_folds, simulate


@pytest.fixture(scope="session")
def toy():
    """Reference realization of the grouped toy design (seed 0)."""
    return simulate(SimulationConfig(seed=0))


@pytest.fixture(scope="session")
def toy_data(toy):
    return toy.dataset()


@pytest.fixture(scope="session")
def toy_folds(toy_data):
    return make_folds(toy_data.n, 5, seed=0)


def random_dataset(rng, n=30, p=6, groups=2, noise=0.5):
    """Small correlated block with a linear response."""
    from clvboost import Dataset

    Z = rng.standard_normal((n, groups))
    X = Z[:, rng.integers(0, groups, p)] * rng.choice([-1.0, 1.0], p) + noise * rng.standard_normal((n, p))
    y = X @ rng.standard_normal(p) + rng.standard_normal(n)
    return Dataset(X, tuple(f"v{j}" for j in range(p)), tuple(str(i) for i in range(n)), y)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
