"""Algorithm state, epoch statistics and the per-epoch evaluation quota."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..core import (
    DimensionMismatch,
    EvaluationBudget,
    Individual,
    Population,
    SearchSpace,
    UnevaluatedMember,
    evaluate_positions,
)


class AlgorithmId(str, Enum):
    GA = "GA"
    PSO = "PSO"
    DE = "DE"
    ACO = "ACO"
    SA = "SA"
    TS = "TS"
    CMAES = "CMAES"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: "str | AlgorithmId") -> "AlgorithmId":
        if isinstance(name, cls):
            return name
        key = str(name).strip().upper().replace("-", "")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(
                f"unknown algorithm {name!r}; expected one of {', '.join(a.value for a in cls)}"
            ) from None


ALL_ALGORITHMS = tuple(AlgorithmId)


@dataclass
class AlgorithmState:
    id: AlgorithmId
    population: Population
    space: SearchSpace
    params: dict[str, Any]
    aux: dict[str, Any] = field(default_factory=dict)
    best: Individual | None = None

    @property
    def dim(self) -> int:
        return self.space.dim

    def copy(self) -> "AlgorithmState":
        return AlgorithmState(
            self.id,
            self.population.copy(),
            self.space,
            dict(self.params),
            copy.deepcopy(self.aux),
            None if self.best is None else self.best.copy(),
        )


@dataclass
class EpochStats:
    evals_used: int
    best_fitness: float
    mean_fitness: float
    best_individual: Individual


class EpochEvaluator:
    """Evaluation front-end for one epoch.

    Caps the epoch at ``quota`` evaluations, charges the shared budget in
    member order, and remembers the best point seen (for elitism).
    """

    def __init__(self, problem, budget: EvaluationBudget, quota: int, best: Individual | None):
        self.problem = problem
        self.budget = budget
        self.quota = quota
        self.used = 0
        if best is None:
            self.best_x, self.best_f = None, np.inf
        else:
            self.best_x, self.best_f = best.position.copy(), best.fitness

    @property
    def left(self) -> int:
        return self.quota - self.used

    def __call__(self, X: np.ndarray) -> np.ndarray:
        if X.shape[0] > self.left:
            raise ValueError("epoch quota exceeded")  # algorithm bug, not a budget condition
        f = evaluate_positions(X, self.problem, self.budget)
        self.used += X.shape[0]
        i = int(np.argmin(f))
        if f[i] < self.best_f:
            self.best_f = float(f[i])
            self.best_x = X[i].copy()
        return f


def check_population(pop: Population, space: SearchSpace) -> tuple[np.ndarray, np.ndarray]:
    if len(pop) == 0:
        raise ValueError("population is empty")
    if pop.dim != space.dim:
        raise DimensionMismatch(f"population dim {pop.dim} != search space dim {space.dim}")
    f = pop.fitness
    if np.isnan(f).any():
        raise UnevaluatedMember("algorithms are initialized from evaluated populations")
    return pop.positions, f
