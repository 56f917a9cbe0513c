import json
from dataclasses import replace

import pytest

from pmf.core import ConfigInvalid
from pmf.handover import HandoverConfig
from pmf.metaheuristics import AlgorithmId
from pmf.orchestrator import (
    STRATEGIES,
    Cell,
    RunConfig,
    always_continue,
    run_baseline,
    run_experiment,
    run_pmf,
    summarize,
)
from pmf.selector import ExternalSelectorConfig, SelectorPolicy

from conftest import Flat
from mock_endpoint import MockEndpoint


def cfg(**kw):
    base = dict(problem={"kind": "rastrigin", "dim": 10, "seed": 0}, max_evals=3000, seed=1)
    base.update(kw)
    return RunConfig(**base)


def budget_identity(r):
    assert r.total_evals == r.initial_evals + sum(r.epoch_evals_used) + r.reevaluation_evals
    assert r.config.max_evals - r.config.epoch_evals <= r.total_evals <= r.config.max_evals


def test_flat_objective_first_switch_at_epoch_three():
    r = run_pmf(cfg(policy=SelectorPolicy(stagnation_threshold=3)), problem=Flat(10))
    assert r.switches and r.switches[0].epoch == 3
    assert r.switches[0].reason.startswith("R1")
    assert [rep.stagnation_count for rep in r.history.reports[:3]] == [1, 2, 3]


def test_always_continue_equals_baseline():
    c = cfg()
    a = run_pmf(c, selector=always_continue)
    b = run_baseline("DE", c)
    assert a.switches == [] and a.trajectory == b.trajectory


def test_single_epoch_run():
    r = run_pmf(cfg(max_evals=300, epoch_evals=300))
    assert r.epochs == 1 and r.switches == [] and r.total_evals == 300


@pytest.mark.parametrize("kind", ["sphere", "rastrigin", "f1_like"])
@pytest.mark.parametrize("seed", range(3))
def test_trajectory_monotone_and_budget_exact(kind, seed):
    r = run_pmf(cfg(problem={"kind": kind, "dim": 10, "seed": 0}, seed=seed, max_evals=4000))
    assert all(b <= a for a, b in zip(r.trajectory, r.trajectory[1:]))
    assert r.best.fitness == r.trajectory[-1]
    budget_identity(r)


def test_budget_identity_with_switches_and_odd_sizes():
    r = run_pmf(cfg(max_evals=2777, epoch_evals=123), problem=Flat(10))
    assert r.switches
    assert r.reevaluation_evals == 30 * len(r.switches)
    budget_identity(r)


def test_baselines_never_switch():
    for algo in AlgorithmId:
        r = run_baseline(algo, cfg(max_evals=1200))
        assert r.switches == [] and set(r.algorithms) == {algo}
        budget_identity(r)


def test_seed_controls_the_run():
    a = run_baseline("GA", cfg(seed=1))
    b = run_baseline("GA", cfg(seed=2))
    assert a.trajectory != b.trajectory
    assert run_baseline("DE", cfg()).to_json() == run_baseline("DE", cfg()).to_json()


def test_hybrid_merge_run():
    c = cfg(handover=HandoverConfig(hybrid_merge_enabled=True), max_evals=6000)
    r = run_pmf(c, problem=Flat(10))
    assert len(r.switches) >= 2
    budget_identity(r)


def test_config_validation():
    with pytest.raises(ConfigInvalid):
        cfg(population_size=3)
    with pytest.raises(ConfigInvalid):
        cfg(epoch_evals=5000)
    with pytest.raises(ConfigInvalid):
        cfg(selector="external")
    with pytest.raises(ConfigInvalid):
        cfg(algorithm_params={"HS": {}})
    with pytest.raises(ConfigInvalid):
        run_pmf(cfg(), problem=Flat(3))


def test_outputs_written(tmp_path):
    r = run_pmf(cfg(output_dir=str(tmp_path)))
    for name in ("trajectory.csv", "feedback.jsonl", "switches.csv", "result.json"):
        assert (tmp_path / name).exists()
    d = json.loads((tmp_path / "result.json").read_text())
    assert d["trajectory"] == r.trajectory and d["total_evals"] == r.total_evals


def test_external_selector_run_traces_every_call(tmp_path):
    with MockEndpoint("valid") as ep:
        c = cfg(selector="external", external=ExternalSelectorConfig(ep.url, timeout=2.0),
                output_dir=str(tmp_path), max_evals=1500)
        r = run_pmf(c)
        n_requests = len(ep.requests)
    lines = (tmp_path / "selector_trace.jsonl").read_text().splitlines()
    assert len(lines) == n_requests == sum(1 for e in r.evals_after_epoch if 1500 - e >= 300)
    assert r.switches and r.switches[0].to is AlgorithmId.SA


def test_experiment_cross_product_and_median():
    t = cfg(max_evals=600)
    s = run_experiment(STRATEGIES, ["sphere"], range(20), t)
    assert len(s.cells) == 160 and not s.failures
    for g in s.groups:
        vals = sorted(c.final_best for c in s.cells if c.strategy == g.strategy)
        assert g.median == pytest.approx((vals[9] + vals[10]) / 2, rel=0, abs=0)


def test_experiment_parallel_matches_serial():
    t = cfg(max_evals=900)
    a = run_experiment(["PMF", "GA"], ["ackley", "sphere"], [0, 1, 2], t, workers=1)
    b = run_experiment(["PMF", "GA"], ["ackley", "sphere"], [0, 1, 2], t, workers=3)
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_experiment_records_failing_cells():
    t = cfg(max_evals=600, algorithm_params={"DE": {"F": 0.5}})
    bad = replace(t, problem={"kind": "rastrigin", "dim": 10, "seed": 0})
    s = run_experiment(["DE"], ["sphere", "no_such_function"], [0], bad)
    assert len(s.failures) == 1 and "no_such_function" in s.failures[0].error


def test_summary_median_of_five():
    cells = [Cell("GA", "sphere", i, float(v)) for i, v in enumerate([4, 1, 5, 3, 2])]
    (g,) = summarize(cells, ["GA"], ["sphere"])
    assert (g.median, g.q1, g.q3, g.n) == (3.0, 2.0, 4.0, 5)
