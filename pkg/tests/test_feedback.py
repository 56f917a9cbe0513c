import itertools
import json
import math

import numpy as np
import pytest

from pmf.core import EvaluationBudget, Individual, Population, SearchSpace
from pmf.feedback import (
    FeedbackReport,
    HistoryLog,
    NonMonotonicEpoch,
    SwitchEvent,
    compute_report,
    diversity,
    improvement_rate,
    read_jsonl,
    record,
    write_jsonl,
)
from pmf.metaheuristics import AlgorithmId, EpochStats


def report(epoch, rate=0.0, stag=0, algo=AlgorithmId.DE, div=0.3, frac=0.2):
    return FeedbackReport(epoch, algo, 1.0, 2.0, rate, rate, stag, div, 100, frac, 0.01)


def stats(best):
    return EpochStats(10, best, best + 1.0, Individual([0.0, 0.0], best))


def test_diversity_extremes():
    s = SearchSpace.box(3)
    assert diversity(np.ones((5, 3)), s) == 0.0
    assert diversity(np.array([[-100.0] * 3, [100.0] * 3]), s) == pytest.approx(1.0)
    assert diversity(np.zeros((1, 3)), s) == 0.0


def test_diversity_all_pairs_oracle():
    s = SearchSpace.box(2, -10, 10)
    P = [(1.0, 2.0), (-3.0, 0.5), (4.0, -4.0), (0.0, 0.0), (9.0, 7.5)]
    dists = [math.dist(a, b) for a, b in itertools.combinations(P, 2)]
    oracle = sum(dists) / len(dists) / math.hypot(20, 20)
    assert abs(diversity(np.array(P), s) - oracle) <= 1e-12
    assert abs(diversity(Population.from_arrays(P), s) - oracle) <= 1e-12


def test_improvement_rate():
    assert improvement_rate(100.0, 90.0) == pytest.approx(0.1)
    assert improvement_rate(5.0, 6.0) == 0.0
    assert improvement_rate(0.0, 0.0) == 0.0


def test_stagnation_counts_up_from_zero():
    s = SearchSpace.box(2)
    pop = Population.from_arrays(np.zeros((3, 2)), [1.0, 1.0, 1.0])
    log = HistoryLog()
    counts = []
    for _ in range(3):
        r = compute_report(log.reports, 1.0, stats(1.0), pop, s, EvaluationBudget(100), 0.0, "DE")
        record(log, r)
        counts.append(r.stagnation_count)
    assert counts == [1, 2, 3]
    r = compute_report(log.reports, 1.0, stats(0.5), pop, s, EvaluationBudget(100), 0.0, "DE")
    assert r.stagnation_count == 0 and r.improvement_rate == pytest.approx(0.5)


def test_stagnation_zero_one_two_after_an_improving_epoch():
    s = SearchSpace.box(2)
    pop = Population.from_arrays(np.zeros((3, 2)), [1.0] * 3)
    log = HistoryLog()
    best = 2.0
    counts = []
    for b in (1.0, 1.0, 1.0):
        r = compute_report(log.reports, best, stats(b), pop, s, EvaluationBudget(10), 0.0, "DE")
        record(log, r)
        best = r.best_fitness
        counts.append(r.stagnation_count)
    assert counts == [0, 1, 2]


def test_convergence_rate_mean_over_available_window():
    s = SearchSpace.box(2)
    pop = Population.from_arrays(np.zeros((3, 2)), [1.0] * 3)
    prev = [report(0, 0.1), report(1, 0.0)]
    r = compute_report(prev, 1.0, stats(0.8), pop, s, EvaluationBudget(10), 0.0, "DE")
    assert r.improvement_rate == pytest.approx(0.2)
    assert abs(r.convergence_rate - 0.1) <= 1e-12


def test_record_epoch_order_and_cumulative():
    log = HistoryLog()
    record(log, report(0, 0.1))
    record(log, report(1, 0.2))
    assert len(log.reports) == 2
    assert abs(log.cumulative_improvement[AlgorithmId.DE] - 0.3) <= 1e-12
    with pytest.raises(NonMonotonicEpoch):
        record(log, report(3))


def test_jsonl_round_trip(tmp_path):
    reports = [report(i, 0.1 * i, i, AlgorithmId.SA) for i in range(4)]
    write_jsonl(reports, tmp_path / "f.jsonl")
    assert read_jsonl(tmp_path / "f.jsonl") == reports
    for line in (tmp_path / "f.jsonl").read_text().splitlines():
        assert json.loads(line)["algorithm"] == "SA"


def test_switch_event_must_change_algorithm():
    with pytest.raises(ValueError):
        SwitchEvent(3, AlgorithmId.DE, AlgorithmId.DE, "x", 1.0)
    assert SwitchEvent(3, AlgorithmId.DE, AlgorithmId.PSO, "x", 1.0).to_dict()["from"] == "DE"
