"""Population transfer on an algorithm switch.

The pipeline is ``preserve_elites -> adapt_population -> diversity_restart
-> reevaluate``; the orchestrator then injects the result into the new
algorithm. Every step works on copies.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import (
    BudgetExhausted,
    DimensionMismatch,
    EvaluationBudget,
    Individual,
    Population,
    RandomStream,
    SearchSpace,
    UnevaluatedMember,
    best_index,
    evaluate_positions,
)
from .feedback import diversity


@dataclass(frozen=True)
class HandoverConfig:
    elite_fraction: float = 0.10
    restart_diversity_threshold: float = 0.01
    reevaluate_on_switch: bool = True
    hybrid_merge_enabled: bool = False
    donor_fraction: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.elite_fraction <= 1.0:
            raise ValueError("elite_fraction must lie in [0, 1]")
        if not 0.0 <= self.donor_fraction <= 1.0:
            raise ValueError("donor_fraction must lie in [0, 1]")


def elite_count(n: int, fraction: float) -> int:
    if fraction <= 0.0 or n == 0:
        return 0
    return min(n, max(1, math.floor(fraction * n + 1e-9)))


def _ranking(pop: Population) -> np.ndarray:
    f = pop.fitness
    if np.isnan(f).any():
        raise UnevaluatedMember("ranking needs every member evaluated")
    return np.argsort(f, kind="stable")


def preserve_elites(pop: Population, fraction: float) -> Population:
    """Copies of the best ``elite_count`` members, best first."""
    order = _ranking(pop)
    k = elite_count(len(pop), fraction)
    return Population([pop[int(i)].copy() for i in order[:k]], pop.generation)


def adapt_population(
    elites: Population,
    donor: Population,
    space: SearchSpace,
    n: int,
    rng: RandomStream,
    donor_fraction: float = 0.5,
) -> Population:
    """Elites, then the next-best donors up to ``donor_fraction * n`` members,
    then uniform random newcomers (unevaluated) up to ``n``.

    Positions are raw real vectors for every algorithm, so no encoding
    change is needed here; algorithm-specific memory is rebuilt on injection.
    """
    for p in (elites, donor):
        if len(p) and p.dim != space.dim:
            raise DimensionMismatch(f"population dim {p.dim} != space dim {space.dim}")
    members = [m.copy() for m in elites.members[:n]]
    taken = Counter(m.position.tobytes() for m in members)
    target = max(len(members), min(n, math.floor(donor_fraction * n)))
    for i in _ranking(donor):
        if len(members) >= target:
            break
        m = donor[int(i)]
        key = m.position.tobytes()
        if taken[key]:
            taken[key] -= 1  # the donor-side original of an elite
            continue
        members.append(m.copy())
    fresh = n - len(members)
    if fresh > 0:
        X = rng.uniform(space.lower, space.upper, size=(fresh, space.dim))
        members.extend(Individual(x) for x in X)
    return Population(members, donor.generation)


def diversity_restart(
    pop: Population, space: SearchSpace, threshold: float, rng: RandomStream
) -> Population:
    """Keep the best member and resample the rest when diversity < threshold.

    Unevaluated members (fresh newcomers from adaptation) cannot be the
    best; with no evaluated member at all the first one is kept.
    """
    if diversity(pop, space) >= threshold:
        return pop.copy()
    f = pop.fitness
    scored = ~np.isnan(f)
    i = int(np.flatnonzero(scored)[best_index(f[scored])]) if scored.any() else 0
    keep = pop[i].copy()
    X = rng.uniform(space.lower, space.upper, size=(len(pop) - 1, space.dim))
    return Population([keep] + [Individual(x) for x in X], pop.generation)


def reevaluate(
    pop: Population, problem, budget: EvaluationBudget, all_members: bool = True
) -> Population:
    """Fresh fitness for every member (or only for unevaluated ones).

    Evaluation is charged in member order. If the budget runs short the
    affordable prefix is scored and :class:`BudgetExhausted` is raised, with
    the charge already committed.
    """
    out = pop.copy()
    todo = [i for i, m in enumerate(out) if all_members or m.fitness is None]
    if not todo:
        return out
    affordable = todo[: budget.remaining]
    if affordable:
        X = np.vstack([out[i].position for i in affordable])
        f = evaluate_positions(X, problem, budget)
        for i, v in zip(affordable, f):
            out[i].fitness = float(v)
    if len(affordable) < len(todo):
        raise BudgetExhausted(f"{len(todo) - len(affordable)} member(s) left unevaluated")
    return out


def hybrid_merge(a: Population, b: Population, n: int) -> Population:
    """The ``n`` best of the union; ties keep ``a`` before ``b``, then index."""
    if len(a) and len(b) and a.dim != b.dim:
        raise DimensionMismatch("hybrid_merge needs populations of one dimension")
    union = list(a.members) + list(b.members)
    if any(m.fitness is None for m in union):
        raise UnevaluatedMember("hybrid_merge needs evaluated populations")
    order = sorted(range(len(union)), key=lambda i: union[i].fitness)  # stable
    return Population([union[i].copy() for i in order[:n]], max(a.generation, b.generation))
