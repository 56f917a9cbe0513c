"""The control loop: run an epoch, report, ask the selector, hand over on a switch."""

from __future__ import annotations

import json
import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import handover as ho
from . import metaheuristics as mh
from .benchmarks import Problem, problem_from_descriptor
from .core import (
    BudgetExhausted,
    ConfigInvalid,
    EvaluationBudget,
    Individual,
    Population,
    RandomStream,
    best_of,
    evaluate_positions,
    random_population,
)
from .feedback import EPSILON_IMPROVEMENT, FeedbackReport, HistoryLog, SwitchEvent, compute_report, record
from .metaheuristics import AlgorithmId
from .selector import (
    Decision,
    ExternalSelectorConfig,
    SelectorPolicy,
    decide_external,
    decide_rule_based,
)

log = logging.getLogger(__name__)

PMF = "PMF"
STRATEGIES = (PMF,) + tuple(a.value for a in mh.ALL_ALGORITHMS)

Selector = Callable[[FeedbackReport, HistoryLog], Decision]


@dataclass(frozen=True)
class RunConfig:
    problem: dict = field(default_factory=lambda: {"kind": "f1_like", "dim": 10, "seed": 0})
    population_size: int = 30
    max_evals: int = 10_000
    epoch_evals: int = 300
    initial_algorithm: AlgorithmId = AlgorithmId.DE
    selector: str = "rule"  # "rule" or "external"
    policy: SelectorPolicy = field(default_factory=SelectorPolicy)
    external: Optional[ExternalSelectorConfig] = None
    handover: ho.HandoverConfig = field(default_factory=ho.HandoverConfig)
    algorithm_params: dict = field(default_factory=dict)
    stagnation_epsilon: float = EPSILON_IMPROVEMENT
    seed: int = 0
    output_dir: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "initial_algorithm", AlgorithmId.parse(self.initial_algorithm))
        self.validate()

    @property
    def dim(self) -> int:
        return int(self.problem["dim"])

    def validate(self) -> None:
        if self.population_size < 4:
            raise ConfigInvalid("population_size must be >= 4 (DE needs 4 distinct members)")
        if self.max_evals < 1 or self.epoch_evals < 1:
            raise ConfigInvalid("max_evals and epoch_evals must be positive")
        if self.epoch_evals > self.max_evals:
            raise ConfigInvalid("epoch_evals must not exceed max_evals")
        if self.population_size >= self.max_evals:
            raise ConfigInvalid("max_evals must exceed the initial population evaluation")
        if self.selector not in ("rule", "external"):
            raise ConfigInvalid(f"selector must be 'rule' or 'external', got {self.selector!r}")
        if self.selector == "external" and self.external is None:
            raise ConfigInvalid("external selector requires an endpoint configuration")
        for key in self.algorithm_params:
            try:
                AlgorithmId.parse(key)
            except ValueError as exc:
                raise ConfigInvalid(str(exc)) from None

    def params_for(self, algo: AlgorithmId) -> dict:
        for key, value in self.algorithm_params.items():
            if AlgorithmId.parse(key) is algo:
                return dict(value)
        return {}

    def to_dict(self) -> dict:
        return {
            "problem": dict(self.problem),
            "population_size": self.population_size,
            "max_evals": self.max_evals,
            "epoch_evals": self.epoch_evals,
            "initial_algorithm": self.initial_algorithm.value,
            "selector": self.selector,
            "policy": {
                "stagnation_threshold": self.policy.stagnation_threshold,
                "diversity_low": self.policy.diversity_low,
                "diversity_high": self.policy.diversity_high,
                "phase_split": self.policy.phase_split,
                "exploratory_set": [a.value for a in self.policy.exploratory_set],
                "exploitative_set": [a.value for a in self.policy.exploitative_set],
            },
            "handover": {
                "elite_fraction": self.handover.elite_fraction,
                "restart_diversity_threshold": self.handover.restart_diversity_threshold,
                "reevaluate_on_switch": self.handover.reevaluate_on_switch,
                "hybrid_merge_enabled": self.handover.hybrid_merge_enabled,
                "donor_fraction": self.handover.donor_fraction,
            },
            "algorithm_params": {k: dict(v) for k, v in sorted(self.algorithm_params.items())},
            "stagnation_epsilon": self.stagnation_epsilon,
            "seed": self.seed,
        }


@dataclass
class RunResult:
    strategy: str
    best: Individual
    history: HistoryLog
    switches: list[SwitchEvent]
    total_evals: int
    trajectory: list[float]
    algorithms: list[AlgorithmId]
    epoch_evals_used: list[int]
    evals_after_epoch: list[int]
    initial_evals: int
    reevaluation_evals: int
    config: RunConfig
    problem: dict
    stop_reason: str = "budget spent"

    @property
    def epochs(self) -> int:
        return len(self.trajectory)

    def to_dict(self) -> dict:
        """Machine-independent summary (no wall-clock values)."""
        return {
            "strategy": self.strategy,
            "problem": self.problem,
            "config": self.config.to_dict(),
            "best_fitness": self.best.fitness,
            "best_position": self.best.position.tolist(),
            "total_evals": self.total_evals,
            "initial_evals": self.initial_evals,
            "reevaluation_evals": self.reevaluation_evals,
            "epoch_evals_used": list(self.epoch_evals_used),
            "evals_after_epoch": list(self.evals_after_epoch),
            "trajectory": list(self.trajectory),
            "algorithms": [a.value for a in self.algorithms],
            "switches": [s.to_dict() for s in self.switches],
            "switch_count": len(self.switches),
            "stop_reason": self.stop_reason,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def always_continue(report: FeedbackReport, history: HistoryLog) -> Decision:
    return Decision.keep("fixed algorithm")


def make_selector(config: RunConfig, trace_path=None) -> Selector:
    if config.selector == "external":
        cfg = config.external

        def external(report, history):
            return decide_external(
                cfg, report, history, mh.ALL_ALGORITHMS, config.policy, trace_path=trace_path
            )

        return external
    policy = config.policy
    return lambda report, history: decide_rule_based(report, history, policy)


def _handover(config, space, problem, budget, outgoing, target, previous_pops, rng):
    """Run the transfer pipeline; returns (population, evaluations charged)."""
    hc = config.handover
    n = config.population_size
    before = budget.used
    elites = ho.preserve_elites(outgoing, hc.elite_fraction)
    pop = ho.adapt_population(elites, outgoing, space, n, rng, hc.donor_fraction)
    pop = ho.diversity_restart(pop, space, hc.restart_diversity_threshold, rng)
    pop = ho.reevaluate(pop, problem, budget, all_members=hc.reevaluate_on_switch)
    charged = budget.used - before
    if hc.hybrid_merge_enabled and target in previous_pops:
        pop = ho.hybrid_merge(pop, previous_pops[target], n)
    return pop, charged


def _run(config: RunConfig, problem: Problem, selector: Selector, strategy: str) -> RunResult:
    space = problem.space
    if problem.dim != config.dim:
        raise ConfigInvalid(f"config dim {config.dim} != problem dim {problem.dim}")
    rng = RandomStream(config.seed)
    budget = EvaluationBudget(config.max_evals)
    streams: dict[AlgorithmId, RandomStream] = {}

    def stream(a: AlgorithmId) -> RandomStream:
        if a not in streams:
            streams[a] = rng.spawn("algorithm", a.value)
        return streams[a]

    handover_rng = rng.spawn("handover")
    pop = random_population(space, config.population_size, rng.spawn("init"))
    pop = Population.from_arrays(pop.positions, evaluate_positions(pop.positions, problem, budget))
    initial_evals = budget.used
    global_best = best_of(pop).copy()

    current = config.initial_algorithm
    state = mh.init(current, pop, space, params=config.params_for(current))
    history = HistoryLog()
    trajectory: list[float] = []
    algorithms: list[AlgorithmId] = []
    epoch_used: list[int] = []
    evals_after: list[int] = []
    reeval = 0
    last_pops: dict[AlgorithmId, Population] = {}
    stop_reason = "budget spent"

    while budget.remaining > 0:
        before = global_best.fitness
        t0 = time.perf_counter()
        state, stats = mh.step_epoch(state, problem, budget, config.epoch_evals, stream(current))
        wall = time.perf_counter() - t0
        if stats.best_fitness < global_best.fitness:
            global_best = stats.best_individual.copy()
        report = compute_report(
            history.reports, before, stats, state.population, space, budget, wall, current,
            epsilon=config.stagnation_epsilon,
        )
        record(history, report)
        trajectory.append(global_best.fitness)
        algorithms.append(current)
        epoch_used.append(stats.evals_used)
        evals_after.append(budget.used)
        last_pops[current] = state.population

        if budget.remaining < config.epoch_evals:
            continue  # at most one (partial) epoch left: no decision point
        decision = selector(report, history)
        if not decision.is_switch or decision.target == current:
            continue
        target = decision.target
        try:
            new_pop, charged = _handover(
                config, space, problem, budget, state.population, target, last_pops, handover_rng
            )
        except BudgetExhausted:
            reeval = budget.used - initial_evals - sum(epoch_used)
            stop_reason = "budget exhausted during handover"
            break
        reeval += charged
        incoming_best = best_of(new_pop)
        if incoming_best.fitness < global_best.fitness:
            global_best = incoming_best.copy()
        state = mh.init(target, new_pop, space, params=config.params_for(target))
        event = SwitchEvent(len(trajectory), current, target, decision.reason, global_best.fitness)
        history.switches.append(event)
        log.debug("epoch %d: %s -> %s (%s)", event.epoch, current, target, decision.reason)
        current = target

    return RunResult(
        strategy=strategy,
        best=global_best,
        history=history,
        switches=list(history.switches),
        total_evals=budget.used,
        trajectory=trajectory,
        algorithms=algorithms,
        epoch_evals_used=epoch_used,
        evals_after_epoch=evals_after,
        initial_evals=initial_evals,
        reevaluation_evals=reeval,
        config=config,
        problem=problem.descriptor(),
        stop_reason=stop_reason,
    )


def _finish(result: RunResult, output_dir) -> RunResult:
    if output_dir is not None:
        from .reporting import write_run

        write_run(result, output_dir)
    return result


def run_pmf(
    config: RunConfig, problem: Problem | None = None, selector: Selector | None = None
) -> RunResult:
    """Adaptive run. ``selector`` overrides the one configured (tests, stubs)."""
    problem = problem or problem_from_descriptor(config.problem)
    trace = None
    if config.output_dir is not None:
        Path(config.output_dir).mkdir(parents=True, exist_ok=True)
        trace = Path(config.output_dir) / "selector_trace.jsonl"
    result = _run(config, problem, selector or make_selector(config, trace), PMF)
    return _finish(result, config.output_dir)


def run_baseline(id: AlgorithmId | str, config: RunConfig, problem: Problem | None = None) -> RunResult:
    """Same loop with the selector replaced by always-continue."""
    id = AlgorithmId.parse(id)
    problem = problem or problem_from_descriptor(config.problem)
    config = replace(config, initial_algorithm=id)
    result = _run(config, problem, always_continue, id.value)
    return _finish(result, config.output_dir)


def run_strategy(strategy: str, config: RunConfig, problem: Problem | None = None) -> RunResult:
    if strategy.upper() == PMF:
        return run_pmf(config, problem)
    return run_baseline(strategy, config, problem)


# -- experiments --------------------------------------------------------------


@dataclass
class Cell:
    strategy: str
    function: str
    seed: int
    final_best: float = float("nan")
    switch_count: int = 0
    trajectory: list[float] = field(default_factory=list)
    total_evals: int = 0
    error: str | None = None
    result: Any = None  # RunResult when kept in memory

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "result"}
        return d


@dataclass
class GroupSummary:
    strategy: str
    function: str
    median: float
    q1: float
    q3: float
    iqr: float
    mean_switches: float
    n: int


@dataclass
class ExperimentSummary:
    strategies: list[str]
    functions: list[str]
    seeds: list[int]
    cells: list[Cell]
    groups: list[GroupSummary]

    @property
    def failures(self) -> list[Cell]:
        return [c for c in self.cells if c.error is not None]

    def group(self, strategy: str, function: str) -> GroupSummary:
        for g in self.groups:
            if g.strategy == strategy and g.function == function:
                return g
        raise KeyError((strategy, function))

    def to_dict(self) -> dict:
        return {
            "strategies": self.strategies,
            "functions": self.functions,
            "seeds": self.seeds,
            "groups": [g.__dict__ for g in self.groups],
            "cells": [c.to_dict() for c in self.cells],
        }


def cell_config(template: RunConfig, function: str, seed: int, output_dir=None) -> RunConfig:
    problem = dict(template.problem)
    problem["kind"] = function
    problem.pop("bias", None)
    return replace(template, problem=problem, seed=seed, output_dir=output_dir)


def _run_cell(args) -> Cell:
    strategy, function, seed, template, out_root, keep = args
    out = None
    if out_root is not None:
        out = str(Path(out_root) / "runs" / strategy / function / f"seed_{seed}")
    cell = Cell(strategy, function, seed)
    try:
        result = run_strategy(strategy, cell_config(template, function, seed, out))
    except Exception as exc:  # one failing cell must not sink the matrix
        cell.error = f"{type(exc).__name__}: {exc}"
        log.error("cell %s/%s/%s failed:\n%s", strategy, function, seed, traceback.format_exc())
        return cell
    cell.final_best = result.best.fitness
    cell.switch_count = len(result.switches)
    cell.trajectory = list(result.trajectory)
    cell.total_evals = result.total_evals
    if keep:
        cell.result = result
    return cell


def summarize(cells: Sequence[Cell], strategies, functions) -> list[GroupSummary]:
    groups = []
    for s in strategies:
        for fn in functions:
            ok = [c for c in cells if c.strategy == s and c.function == fn and c.error is None]
            if not ok:
                continue
            vals = np.array([c.final_best for c in ok])
            q1, med, q3 = np.percentile(vals, [25, 50, 75])
            groups.append(
                GroupSummary(
                    s, fn, float(med), float(q1), float(q3), float(q3 - q1),
                    float(np.mean([c.switch_count for c in ok])), len(ok),
                )
            )
    return groups


def run_experiment(
    strategies: Sequence[str],
    functions: Sequence[str],
    seeds: Sequence[int],
    template: RunConfig,
    workers: int = 1,
    output_dir=None,
    keep_results: bool = False,
) -> ExperimentSummary:
    """Every (strategy, function, seed) cell, in that nesting order.

    Each run's random stream depends only on its seed, so results do not
    depend on ``workers`` or on execution order.
    """
    if not strategies or not functions or not seeds:
        raise ConfigInvalid("strategies, functions and seeds must be non-empty")
    strategies = [PMF if s.upper() == PMF else AlgorithmId.parse(s).value for s in strategies]
    jobs = [
        (s, fn, int(seed), template, output_dir, keep_results)
        for s in strategies
        for fn in functions
        for seed in seeds
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_run_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        cells = [_run_cell(j) for j in jobs]
    return ExperimentSummary(
        list(strategies), list(functions), [int(s) for s in seeds], cells,
        summarize(cells, strategies, functions),
    )
