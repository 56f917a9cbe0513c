"""Adaptive metaheuristic switching: seven population-based optimizers run in
epochs under a controller that can hand the population from one to another."""

from .benchmarks import FUNCTIONS, BaseFunction, Problem, f1_2022_like, make_problem, problem_from_name
from .core import (
    BudgetExhausted,
    ConfigInvalid,
    DimensionMismatch,
    EvaluationBudget,
    Individual,
    PMFError,
    Population,
    RandomStream,
    SearchSpace,
    UnevaluatedMember,
    best_of,
)
from .feedback import FeedbackReport, HistoryLog, SwitchEvent
from .handover import HandoverConfig
from .kernels import BACKEND
from .metaheuristics import ALL_ALGORITHMS, AlgorithmId
from .orchestrator import RunConfig, RunResult, run_baseline, run_experiment, run_pmf
from .selector import Decision, ExternalSelectorConfig, SelectorPolicy

__version__ = "0.1.0"

__all__ = [
    "ALL_ALGORITHMS", "AlgorithmId", "BACKEND", "BaseFunction", "BudgetExhausted", "ConfigInvalid",
    "Decision", "DimensionMismatch", "EvaluationBudget", "ExternalSelectorConfig", "FUNCTIONS",
    "FeedbackReport", "HandoverConfig", "HistoryLog", "Individual", "PMFError", "Population",
    "Problem", "RandomStream", "RunConfig", "RunResult", "SearchSpace", "SelectorPolicy",
    "SwitchEvent", "UnevaluatedMember", "best_of", "f1_2022_like", "make_problem",
    "problem_from_name", "run_baseline", "run_experiment", "run_pmf",
]
