"""Shared domain types: search space, individuals, populations, budget, RNG."""

from __future__ import annotations

import threading
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Protocol, Sequence

import numpy as np


class PMFError(Exception):
    """Base class for framework errors."""


class BudgetExhausted(PMFError):
    pass


class DimensionMismatch(PMFError, ValueError):
    pass


class UnevaluatedMember(PMFError, ValueError):
    pass


class ConfigInvalid(PMFError, ValueError):
    pass


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SearchSpace:
    """Axis-aligned box ``[lower, upper]``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _frozen(np.atleast_1d(self.lower))
        upper = _frozen(np.atleast_1d(self.upper))
        if lower.ndim != 1 or lower.shape != upper.shape or lower.size < 1:
            raise ConfigInvalid("lower and upper must be equal-length non-empty vectors")
        if not np.all(lower < upper):
            raise ConfigInvalid("lower[i] < upper[i] must hold for every coordinate")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, dim: int, low: float = -100.0, high: float = 100.0) -> "SearchSpace":
        if dim < 1:
            raise ConfigInvalid(f"dim must be >= 1, got {dim}")
        return cls(np.full(dim, low), np.full(dim, high))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.width))

    def clip(self, X: np.ndarray) -> np.ndarray:
        return np.clip(X, self.lower, self.upper)

    def __eq__(self, other):
        return (
            isinstance(other, SearchSpace)
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )

    def __hash__(self):
        return hash((self.lower.tobytes(), self.upper.tobytes()))


class Individual:
    """A candidate solution with a cached objective value.

    Assigning a new position drops the cached fitness, so any re-scoring
    has to go through :func:`evaluate` and is charged to a budget.
    """

    __slots__ = ("_position", "fitness")

    def __init__(self, position, fitness: Optional[float] = None):
        self._position = _frozen(position)
        self.fitness = None if fitness is None else float(fitness)

    @property
    def position(self) -> np.ndarray:
        return self._position

    @position.setter
    def position(self, value) -> None:
        self._position = _frozen(value)
        self.fitness = None

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    def copy(self) -> "Individual":
        ind = Individual.__new__(Individual)
        ind._position = self._position  # read-only array, safe to share
        ind.fitness = self.fitness
        return ind

    def __repr__(self):
        return f"Individual(position={self._position.tolist()!r}, fitness={self.fitness!r})"


@dataclass(eq=False)
class Population:
    members: list[Individual]
    generation: int = 0

    def __post_init__(self):
        self.members = list(self.members)
        if self.members:
            d = self.members[0].position.size
            if any(m.position.size != d for m in self.members):
                raise DimensionMismatch("population members must share one dimension")

    @classmethod
    def from_arrays(cls, positions, fitness=None, generation: int = 0) -> "Population":
        X = np.atleast_2d(np.asarray(positions, dtype=float))
        if fitness is None:
            return cls([Individual(x) for x in X], generation)
        f = np.asarray(fitness, dtype=float)
        return cls(
            [Individual(x, None if np.isnan(v) else v) for x, v in zip(X, f)],
            generation,
        )

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Individual]:
        return iter(self.members)

    def __getitem__(self, i):
        return self.members[i]

    @property
    def dim(self) -> int:
        if not self.members:
            raise ValueError("empty population has no dimension")
        return self.members[0].position.size

    @property
    def positions(self) -> np.ndarray:
        """Stacked member positions, shape ``(n, dim)`` (a fresh array)."""
        if not self.members:
            return np.empty((0, 0))
        return np.vstack([m.position for m in self.members])

    @property
    def fitness(self) -> np.ndarray:
        """Member fitness values with NaN where not yet evaluated."""
        return np.array(
            [np.nan if m.fitness is None else m.fitness for m in self.members], dtype=float
        )

    @property
    def evaluated(self) -> bool:
        return all(m.fitness is not None for m in self.members)

    def copy(self) -> "Population":
        return Population([m.copy() for m in self.members], self.generation)


@dataclass
class EvaluationBudget:
    max_evals: int
    used: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if self.max_evals < 1:
            raise ConfigInvalid(f"max_evals must be positive, got {self.max_evals}")

    @property
    def remaining(self) -> int:
        return self.max_evals - self.used

    @property
    def fraction_used(self) -> float:
        return self.used / self.max_evals

    def charge(self, n: int = 1) -> None:
        with self._lock:
            if self.used + n > self.max_evals:
                raise BudgetExhausted(
                    f"need {n} evaluation(s), {self.max_evals - self.used} remaining"
                )
            self.used += n


def _tag_key(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFF
    return zlib.crc32(str(tag).encode("utf-8"))


class RandomStream:
    """Seeded, splittable random stream.

    ``spawn(tag)`` derives an independent child stream from the seed and a
    fixed tag path, so draws in one component never shift another's.
    Unknown attributes are forwarded to the underlying numpy ``Generator``.
    """

    def __init__(self, seed: int, _key: tuple[int, ...] = ()):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._key = tuple(_key)
        self.generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self._key))
        )

    def spawn(self, *tags) -> "RandomStream":
        return RandomStream(self.seed, self._key + tuple(_tag_key(t) for t in tags))

    def __getattr__(self, name):
        return getattr(self.generator, name)

    def __repr__(self):
        return f"RandomStream(seed={self.seed}, key={self._key})"


class Problem(Protocol):
    dim: int
    space: SearchSpace

    def evaluate_batch(self, X: np.ndarray) -> np.ndarray: ...


def _check_dim(size: int, problem) -> None:
    if size != problem.dim:
        raise DimensionMismatch(f"position has {size} coordinates, problem expects {problem.dim}")


def evaluate(ind: Individual, objective: Problem, budget: EvaluationBudget) -> float:
    """Score one individual, cache the value on it and charge one evaluation."""
    _check_dim(ind.position.size, objective)
    if budget.remaining < 1:
        raise BudgetExhausted("evaluation budget exhausted")
    value = float(objective.evaluate_batch(ind.position[None, :])[0])
    budget.charge(1)
    ind.fitness = value
    return value


def evaluate_positions(X: np.ndarray, objective: Problem, budget: EvaluationBudget) -> np.ndarray:
    """Score the rows of ``X`` in order, charging one evaluation per row."""
    X = np.atleast_2d(X)
    _check_dim(X.shape[1], objective)
    if X.shape[0] > budget.remaining:
        raise BudgetExhausted(
            f"batch of {X.shape[0]} exceeds the {budget.remaining} remaining evaluations"
        )
    values = np.asarray(objective.evaluate_batch(np.ascontiguousarray(X, dtype=float)))
    budget.charge(X.shape[0])
    return values


def clamp(ind: Individual, space: SearchSpace) -> Individual:
    """Project ``ind`` onto the box. In-bounds individuals keep their fitness."""
    x = ind.position
    y = np.clip(x, space.lower, space.upper)
    if np.array_equal(x, y):
        return ind.copy()
    return Individual(y)


def random_population(space: SearchSpace, n: int, rng: RandomStream) -> Population:
    if n < 1:
        raise ConfigInvalid(f"population size must be >= 1, got {n}")
    X = rng.uniform(space.lower, space.upper, size=(n, space.dim))
    return Population.from_arrays(X, generation=0)


def best_index(fitness: Sequence[float]) -> int:
    f = np.asarray(fitness, dtype=float)
    if np.isnan(f).any():
        raise UnevaluatedMember("every member needs a fitness value")
    return int(np.argmin(f))  # argmin returns the first occurrence on ties


def best_of(pop: Population | Iterable[Individual]) -> Individual:
    """Member with the lowest fitness; ties go to the lowest index."""
    members = list(pop)
    if not members:
        raise ValueError("best_of of an empty population")
    if any(m.fitness is None for m in members):
        raise UnevaluatedMember("best_of needs every member evaluated")
    return members[best_index([m.fitness for m in members])]
