import numpy as np
import pytest

from pmf.core import Population, SearchSpace


class Flat:
    """Constant objective on the standard box."""

    def __init__(self, dim=10, value=1.0):
        self.dim = dim
        self.space = SearchSpace.box(dim)
        self.value = value

    def evaluate_batch(self, X):
        return np.full(np.atleast_2d(X).shape[0], self.value)

    def descriptor(self):
        return {"kind": "flat", "dim": self.dim, "seed": 0, "bias": self.value}


class Sphere:
    def __init__(self, dim=2, low=-100.0, high=100.0):
        self.dim = dim
        self.space = SearchSpace.box(dim, low, high)

    def evaluate_batch(self, X):
        return np.sum(np.atleast_2d(X) ** 2, axis=1)

    def descriptor(self):
        return {"kind": "sphere_plain", "dim": self.dim, "seed": 0, "bias": 0.0}


def evaluated(problem, n, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.uniform(problem.space.lower, problem.space.upper, (n, problem.dim))
    return Population.from_arrays(X, problem.evaluate_batch(X))


@pytest.fixture
def flat():
    return Flat()


@pytest.fixture
def sphere2():
    return Sphere(2)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
