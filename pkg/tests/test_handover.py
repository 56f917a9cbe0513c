import numpy as np
import pytest

from pmf.benchmarks import make_problem
from pmf.core import (
    BudgetExhausted,
    DimensionMismatch,
    EvaluationBudget,
    Individual,
    Population,
    RandomStream,
    SearchSpace,
    UnevaluatedMember,
)
from pmf.feedback import diversity
from pmf.handover import (
    HandoverConfig,
    adapt_population,
    diversity_restart,
    elite_count,
    hybrid_merge,
    preserve_elites,
    reevaluate,
)

from conftest import evaluated


def sort_oracle(pop):
    return sorted(range(len(pop)), key=lambda i: (pop[i].fitness, i))


@pytest.mark.parametrize("n,frac,k", [(30, 0.10, 3), (7, 0.10, 1), (30, 0.0, 0), (10, 1.0, 10), (100, 0.25, 25)])
def test_elite_count(n, frac, k):
    assert elite_count(n, frac) == k


def test_preserve_elites_matches_sort_oracle():
    p = make_problem("rastrigin", 5, 0)
    for seed in range(10):
        pop = evaluated(p, 7, seed)
        el = preserve_elites(pop, 0.10)
        assert len(el) == 1 and el[0].fitness == pop[sort_oracle(pop)[0]].fitness
        pop30 = evaluated(p, 30, seed)
        el = preserve_elites(pop30, 0.10)
        assert [m.fitness for m in el] == [pop30[i].fitness for i in sort_oracle(pop30)[:3]]
    assert len(preserve_elites(evaluated(p, 5), 0.0)) == 0


def test_preserve_elites_copies():
    p = make_problem("sphere", 2, 0)
    pop = evaluated(p, 10)
    el = preserve_elites(pop, 0.1)
    el[0].fitness = -1.0
    assert min(pop.fitness) >= 0


def test_adapt_composition():
    p = make_problem("sphere", 4, 0)
    s = p.space
    donor = evaluated(p, 30, 1)
    el = preserve_elites(donor, 0.10)
    out = adapt_population(el, donor, s, 30, RandomStream(0))
    assert len(out) == 30
    assert sum(m.fitness is not None for m in out) == 15  # 3 elites + 12 next-best
    kept = [m.fitness for m in out if m.fitness is not None]
    assert kept == [donor[i].fitness for i in sort_oracle(donor)[:15]]
    assert min(kept) == min(donor.fitness)


def test_adapt_saturates_at_elites():
    p = make_problem("sphere", 2, 0)
    donor = evaluated(p, 4)
    el = preserve_elites(donor, 1.0)
    out = adapt_population(el, donor, p.space, 4, RandomStream(0))
    assert [m.fitness for m in out] == [m.fitness for m in el]


def test_adapt_dimension_check():
    p = make_problem("sphere", 2, 0)
    with pytest.raises(DimensionMismatch):
        adapt_population(Population([]), evaluated(p, 4), SearchSpace.box(3), 4, RandomStream(0))


def test_diversity_restart_branches():
    s = SearchSpace.box(10)
    rng = np.random.default_rng(0)
    X = rng.uniform(-100, 100, (30, 10))
    pop = Population.from_arrays(X, np.arange(30.0))
    same = diversity_restart(pop, s, 0.01, RandomStream(0))
    assert np.array_equal(same.positions, pop.positions)
    flat = Population.from_arrays(np.tile(X[3], (30, 1)), [5.0] * 3 + [1.0] + [5.0] * 26)
    out = diversity_restart(flat, s, 0.01, RandomStream(0))
    assert out[0].fitness == 1.0 and all(m.fitness is None for m in out.members[1:])
    failures = 0
    for seed in range(100):
        out = diversity_restart(flat, s, 0.01, RandomStream(seed))
        failures += diversity(out, s) < 0.01
    assert failures == 0


def test_reevaluate_accounting():
    p = make_problem("griewank", 5, 0)
    pop = evaluated(p, 30)
    b = EvaluationBudget(100)
    out = reevaluate(pop, p, b, all_members=True)
    assert b.used == 30
    np.testing.assert_allclose(out.fitness, pop.fitness, rtol=1e-12)
    half = Population([m.copy() if i % 2 else Individual(m.position) for i, m in enumerate(pop)])
    b = EvaluationBudget(100)
    out = reevaluate(half, p, b, all_members=False)
    assert b.used == 15 and out.evaluated


def test_reevaluate_partial_prefix_on_short_budget():
    p = make_problem("sphere", 2, 0)
    pop = evaluated(p, 10)
    b = EvaluationBudget(4)
    with pytest.raises(BudgetExhausted):
        reevaluate(pop, p, b)
    assert b.used == 4


def test_hybrid_merge():
    a = Population.from_arrays([[0.0], [1.0]], [1.0, 3.0])
    b = Population.from_arrays([[2.0], [3.0]], [2.0, 4.0])
    assert hybrid_merge(a, b, 2).fitness.tolist() == [1.0, 2.0]
    assert hybrid_merge(a, Population([]), 1).fitness.tolist() == [1.0]
    p = make_problem("ackley", 6, 0)
    for seed in range(5):
        x, y = evaluated(p, 30, seed), evaluated(p, 30, seed + 100)
        union = list(x) + list(y)
        oracle = sorted(range(60), key=lambda i: (union[i].fitness, i))[:30]
        assert hybrid_merge(x, y, 30).fitness.tolist() == [union[i].fitness for i in oracle]
    with pytest.raises(UnevaluatedMember):
        hybrid_merge(a, Population.from_arrays([[1.0]]), 1)


def run_pipeline(seed):
    """One randomized handover; returns (outgoing best, incoming best)."""
    r = np.random.default_rng(seed)
    dim = int(r.integers(1, 12))
    n = int(r.integers(2, 50))
    kind = ["sphere", "rastrigin", "rosenbrock", "ackley", "griewank", "zakharov"][seed % 6]
    p = make_problem(kind, dim, seed)
    cfg = HandoverConfig(
        elite_fraction=float(r.choice([0.0, 0.05, 0.1, 0.3, 1.0])),
        restart_diversity_threshold=float(r.choice([0.0, 0.01, 0.5, 1.0])),
        reevaluate_on_switch=bool(r.integers(2)),
        donor_fraction=float(r.uniform(0, 1)),
    )
    pop = evaluated(p, n, seed)
    if r.random() < 0.3:  # collapsed population
        X = np.tile(pop.positions[0], (n, 1))
        pop = Population.from_arrays(X, p.evaluate_batch(X))
    rng = RandomStream(seed)
    el = preserve_elites(pop, cfg.elite_fraction)
    out = adapt_population(el, pop, p.space, n, rng, cfg.donor_fraction)
    out = diversity_restart(out, p.space, cfg.restart_diversity_threshold, rng)
    out = reevaluate(out, p, EvaluationBudget(10 * n), all_members=cfg.reevaluate_on_switch)
    return float(np.min(pop.fitness)), float(np.min(out.fitness)), len(out) == n


def test_randomized_pipelines_never_lose_the_best():
    for seed in range(1000):
        before, after, size_ok = run_pipeline(seed)
        assert after <= before and size_ok, seed
