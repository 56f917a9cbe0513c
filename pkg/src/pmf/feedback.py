"""Per-epoch feedback reports and the run history log."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from . import kernels
from .core import EvaluationBudget, Population, SearchSpace
from .metaheuristics import AlgorithmId, EpochStats

EPSILON_IMPROVEMENT = 1e-8
CONVERGENCE_WINDOW = 5


class NonMonotonicEpoch(ValueError):
    pass


@dataclass(frozen=True)
class FeedbackReport:
    epoch: int
    algorithm: AlgorithmId
    best_fitness: float
    mean_fitness: float
    improvement_rate: float
    convergence_rate: float
    stagnation_count: int
    diversity: float
    evals_used_total: int
    budget_fraction: float
    epoch_wall_time: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["algorithm"] = self.algorithm.value
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "FeedbackReport":
        names = {f.name for f in fields(cls)}
        kw = {k: v for k, v in d.items() if k in names}
        kw["algorithm"] = AlgorithmId.parse(kw["algorithm"])
        return cls(**kw)


@dataclass(frozen=True)
class SwitchEvent:
    """Algorithm change; ``epoch`` is the first epoch run by ``to``."""

    epoch: int
    from_: AlgorithmId
    to: AlgorithmId
    reason: str
    best_fitness_at_switch: float

    def __post_init__(self):
        if self.from_ == self.to:
            raise ValueError("a switch must change the algorithm")

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "from": self.from_.value,
            "to": self.to.value,
            "reason": self.reason,
            "best_fitness_at_switch": self.best_fitness_at_switch,
        }


@dataclass
class HistoryLog:
    reports: list[FeedbackReport] = field(default_factory=list)
    switches: list[SwitchEvent] = field(default_factory=list)
    cumulative_improvement: dict[AlgorithmId, float] = field(default_factory=dict)

    @property
    def last(self) -> FeedbackReport | None:
        return self.reports[-1] if self.reports else None


def diversity(pop: Population | np.ndarray, space: SearchSpace) -> float:
    """Mean pairwise member distance over the box diagonal, in [0, 1]."""
    X = pop.positions if isinstance(pop, Population) else np.asarray(pop, dtype=float)
    if X.shape[0] < 2:
        return 0.0
    value = kernels.mean_pairwise_distance(np.ascontiguousarray(X)) / space.diagonal
    return float(min(max(value, 0.0), 1.0))


def improvement_rate(before: float, after: float) -> float:
    return max(0.0, (before - after) / max(abs(before), 1e-12))


def compute_report(
    previous: Sequence[FeedbackReport],
    best_so_far_before: float,
    stats: EpochStats,
    pop: Population,
    space: SearchSpace,
    budget: EvaluationBudget,
    wall: float,
    algorithm: AlgorithmId,
    epsilon: float = EPSILON_IMPROVEMENT,
) -> FeedbackReport:
    """Feedback for the epoch just finished.

    ``previous`` holds the earlier reports of the run, oldest first; only
    the last one (stagnation) and the trailing window (convergence) matter.
    With no previous report the stagnation counter starts from 0, so a
    first epoch without improvement reports 1.
    """
    after = min(best_so_far_before, stats.best_fitness)
    rate = improvement_rate(best_so_far_before, after)
    prev_count = previous[-1].stagnation_count if previous else 0
    stagnation = prev_count + 1 if rate <= epsilon else 0
    window = [r.improvement_rate for r in previous[-(CONVERGENCE_WINDOW - 1):]] + [rate]
    return FeedbackReport(
        epoch=previous[-1].epoch + 1 if previous else 0,
        algorithm=AlgorithmId.parse(algorithm),
        best_fitness=after,
        mean_fitness=stats.mean_fitness,
        improvement_rate=rate,
        convergence_rate=float(np.mean(window)),
        stagnation_count=stagnation,
        diversity=diversity(pop, space),
        evals_used_total=budget.used,
        budget_fraction=budget.used / budget.max_evals,
        epoch_wall_time=float(wall),
    )


def record(log: HistoryLog, report: FeedbackReport) -> HistoryLog:
    """Append ``report`` in place (and return the log)."""
    expected = log.reports[-1].epoch + 1 if log.reports else 0
    if report.epoch != expected:
        raise NonMonotonicEpoch(f"expected epoch {expected}, got {report.epoch}")
    log.reports.append(report)
    cum = log.cumulative_improvement
    cum[report.algorithm] = cum.get(report.algorithm, 0.0) + report.improvement_rate
    return log


def write_jsonl(reports: Sequence[FeedbackReport], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in reports:
            fh.write(r.to_json() + "\n")


def read_jsonl(path) -> list[FeedbackReport]:
    with open(path, encoding="utf-8") as fh:
        return [FeedbackReport.from_dict(json.loads(line)) for line in fh if line.strip()]
