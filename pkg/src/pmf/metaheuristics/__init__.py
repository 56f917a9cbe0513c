"""Seven metaheuristics behind one resumable, epoch-stepping interface.

Every algorithm module provides ``defaults(dim, n)``, ``derive(X, f, space,
params)`` (rebuild auxiliary memory from a population) and ``step(...)``
(run until the epoch quota is spent). This package wraps them with budget
accounting and 1-elitism.
"""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np

from ..core import (
    BudgetExhausted,
    DimensionMismatch,
    EvaluationBudget,
    Individual,
    Population,
    RandomStream,
    SearchSpace,
)
from . import aco, cmaes, de, ga, pso, sa, ts
from .base import (
    ALL_ALGORITHMS,
    AlgorithmId,
    AlgorithmState,
    EpochEvaluator,
    EpochStats,
    check_population,
)

ALGORITHMS = {
    AlgorithmId.GA: ga,
    AlgorithmId.PSO: pso,
    AlgorithmId.DE: de,
    AlgorithmId.ACO: aco,
    AlgorithmId.SA: sa,
    AlgorithmId.TS: ts,
    AlgorithmId.CMAES: cmaes,
}

DEFAULT_POPULATION_SIZE = 30

_CMAES_SIZE_KEYS = ("lambda", "mu", "weights", "mueff", "cc", "cs", "c1", "cmu", "damps")


def default_params(
    id: AlgorithmId | str, dim: int, population_size: int = DEFAULT_POPULATION_SIZE
) -> dict[str, Any]:
    """Default parameter set; a pure function of its arguments."""
    return ALGORITHMS[AlgorithmId.parse(id)].defaults(dim, population_size)


def _resolve_params(id, dim, n, overrides):
    params = default_params(id, dim, n)
    if overrides:
        unknown = set(overrides) - set(params)
        if unknown:
            raise KeyError(f"unknown {id} parameter(s): {', '.join(sorted(unknown))}")
        params.update(overrides)
        if id is AlgorithmId.CMAES and {"lambda", "mu"} & set(overrides):
            raise KeyError("CMAES lambda/mu follow the shared population size")
    return params


def init(
    id: AlgorithmId | str,
    pop: Population,
    space: SearchSpace,
    rng: RandomStream | None = None,
    params: Mapping[str, Any] | None = None,
) -> AlgorithmState:
    """Build an algorithm state around an evaluated, in-bounds population.

    ``rng`` is accepted for interface symmetry; initialization itself is
    deterministic.
    """
    id = AlgorithmId.parse(id)
    X, f = check_population(pop, space)
    params = _resolve_params(id, space.dim, len(pop), params)
    aux = ALGORITHMS[id].derive(X.copy(), f.copy(), space, params)
    best = pop[int(np.argmin(f))].copy()
    return AlgorithmState(id, pop.copy(), space, params, aux, best)


def inject_population(state: AlgorithmState, pop: Population) -> AlgorithmState:
    """Replace the population and re-derive auxiliary memory as ``init`` does."""
    if len(pop) and pop.dim != state.dim:
        raise DimensionMismatch(f"population dim {pop.dim} != state dim {state.dim}")
    X, f = check_population(pop, state.space)
    params = dict(state.params)
    if state.id is AlgorithmId.CMAES and params["lambda"] != len(pop):
        resized = default_params(state.id, state.dim, len(pop))
        params.update({k: resized[k] for k in _CMAES_SIZE_KEYS})
    aux = ALGORITHMS[state.id].derive(X.copy(), f.copy(), state.space, params)
    best = pop[int(np.argmin(f))].copy()
    return AlgorithmState(state.id, pop.copy(), state.space, params, aux, best)


def step_epoch(
    state: AlgorithmState,
    problem,
    budget: EvaluationBudget,
    epoch_evals: int,
    rng: RandomStream,
) -> tuple[AlgorithmState, EpochStats]:
    """Run one epoch: ``min(epoch_evals, budget.remaining)`` evaluations.

    The input state is not modified. The best point held before or found
    during the epoch always survives into the returned population.
    """
    if budget.remaining < 1:
        raise BudgetExhausted("no evaluations left for another epoch")
    if epoch_evals < 1:
        raise ValueError("epoch_evals must be positive")
    work = state.copy()
    module = ALGORITHMS[work.id]
    X, f = work.population.positions, work.population.fitness
    ev = EpochEvaluator(problem, budget, min(epoch_evals, budget.remaining), work.best)
    X, f = module.step(X, f, work.aux, work.params, work.space, ev, rng)
    if f.min() > ev.best_f:
        i = int(np.argmax(f))
        X[i], f[i] = ev.best_x, ev.best_f
        hook = getattr(module, "on_elite", None)
        if hook is not None:
            hook(work.aux, i, ev.best_x.copy(), ev.best_f)
    work.population = Population.from_arrays(X, f, generation=work.population.generation + 1)
    ib = int(np.argmin(f))
    work.best = work.population[ib].copy()
    stats = EpochStats(
        evals_used=ev.used,
        best_fitness=float(f[ib]),
        mean_fitness=float(np.mean(f)),
        best_individual=work.best.copy(),
    )
    return work, stats


__all__ = [
    "ALGORITHMS",
    "ALL_ALGORITHMS",
    "AlgorithmId",
    "AlgorithmState",
    "DEFAULT_POPULATION_SIZE",
    "EpochStats",
    "default_params",
    "init",
    "inject_population",
    "step_epoch",
]
