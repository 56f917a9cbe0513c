"""TOML/JSON configuration: ``[problem] [run] [selector] [handover] [experiment]``
plus optional ``[algorithms.<ID>]`` parameter overrides."""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .benchmarks import FUNCTIONS
from .core import ConfigInvalid
from .handover import HandoverConfig
from .metaheuristics import AlgorithmId, default_params
from .orchestrator import PMF, STRATEGIES, RunConfig
from .selector import API_KEY_ENV, URL_ENV, ExternalSelectorConfig, SelectorPolicy

OUTPUT_ENV = "PMF_OUTPUT_DIR"

SECTIONS = {"problem", "run", "selector", "handover", "experiment", "algorithms"}
PROBLEM_KEYS = {"function", "kind", "dim", "seed", "bias"}
RUN_KEYS = {
    "population_size", "max_evals", "epoch_evals", "initial_algorithm", "seed",
    "output_dir", "stagnation_epsilon",
}
POLICY_KEYS = {f.name for f in fields(SelectorPolicy)}
EXTERNAL_KEYS = {"endpoint_url", "model_name", "timeout", "max_retries"}
SELECTOR_KEYS = {"kind"} | POLICY_KEYS | EXTERNAL_KEYS
HANDOVER_KEYS = {f.name for f in fields(HandoverConfig)}
EXPERIMENT_KEYS = {"functions", "seeds", "strategies", "plot", "workers", "output_dir"}


@dataclass
class ExperimentConfig:
    run: RunConfig
    functions: list[str] = field(default_factory=lambda: ["sphere", "rastrigin", "rosenbrock", "ackley", "f1_like"])
    seeds: list[int] = field(default_factory=lambda: list(range(20)))
    strategies: list[str] = field(default_factory=lambda: list(STRATEGIES))
    output_dir: str = "runs"
    plot: bool = True
    workers: int = 1

    def __post_init__(self):
        for fn in self.functions:
            if fn not in FUNCTIONS:
                raise ConfigInvalid(f"experiment.functions: unknown function {fn!r}")
        norm = []
        for s in self.strategies:
            if s.upper() == PMF:
                norm.append(PMF)
                continue
            try:
                norm.append(AlgorithmId.parse(s).value)
            except ValueError as exc:
                raise ConfigInvalid(f"experiment.strategies: {exc}") from None
        self.strategies = norm
        if not self.functions or not self.seeds or not self.strategies:
            raise ConfigInvalid("experiment lists must be non-empty")
        if self.workers < 1:
            raise ConfigInvalid("experiment.workers must be >= 1")


def load_file(path) -> dict[str, Any]:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc.strerror}") from None
    try:
        if p.suffix.lower() == ".json":
            return json.loads(text)
        return tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigInvalid(f"cannot parse config {path}: {exc}") from None


def _check_keys(section: str, data: dict, allowed: set[str]) -> None:
    if not isinstance(data, dict):
        raise ConfigInvalid(f"[{section}] must be a table")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigInvalid(f"unknown key(s) in [{section}]: {', '.join(unknown)}")


def parse_seeds(value) -> list[int]:
    """``[0, 1, 2]``, ``"0-19"`` or ``"1,5,9"``."""
    if isinstance(value, int):
        return [value]
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    out: list[int] = []
    for part in str(value).split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part[1:]:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    if not out:
        raise ConfigInvalid(f"no seeds in {value!r}")
    return out


def _as_list(value) -> list[str]:
    if isinstance(value, str):
        return [v.strip() for v in value.split(",") if v.strip()]
    return list(value)


def build(raw: dict[str, Any] | None = None, env: dict[str, str] | None = None) -> ExperimentConfig:
    """Validated experiment (and run) configuration from a raw mapping."""
    raw = dict(raw or {})
    env = os.environ if env is None else env
    _check_keys("root", raw, SECTIONS)
    problem = dict(raw.get("problem", {}))
    run = dict(raw.get("run", {}))
    sel = dict(raw.get("selector", {}))
    hand = dict(raw.get("handover", {}))
    exp = dict(raw.get("experiment", {}))
    algos = dict(raw.get("algorithms", {}))
    _check_keys("problem", problem, PROBLEM_KEYS)
    _check_keys("run", run, RUN_KEYS)
    _check_keys("selector", sel, SELECTOR_KEYS)
    _check_keys("handover", hand, HANDOVER_KEYS)
    _check_keys("experiment", exp, EXPERIMENT_KEYS)

    kind = problem.get("function", problem.get("kind", "f1_like"))
    if kind not in FUNCTIONS:
        raise ConfigInvalid(f"problem.function: unknown function {kind!r}")
    pdesc = {"kind": kind, "dim": int(problem.get("dim", 10)), "seed": int(problem.get("seed", 0))}
    if "bias" in problem:
        pdesc["bias"] = float(problem["bias"])

    params: dict[str, dict] = {}
    for name, overrides in algos.items():
        try:
            algo = AlgorithmId.parse(name)
        except ValueError as exc:
            raise ConfigInvalid(f"[algorithms]: {exc}") from None
        _check_keys(f"algorithms.{name}", overrides, set(default_params(algo, pdesc["dim"])))
        params[algo.value] = dict(overrides)

    try:
        policy = SelectorPolicy(**{k: sel[k] for k in POLICY_KEYS if k in sel})
        handover = HandoverConfig(**hand)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"[selector]/[handover]: {exc}") from None

    kind_sel = sel.get("kind", "rule")
    external = None
    url = sel.get("endpoint_url") or env.get(URL_ENV)
    if kind_sel == "external" or url:
        if kind_sel == "external" and not url:
            raise ConfigInvalid(f"selector.endpoint_url (or {URL_ENV}) is required for kind = 'external'")
        try:
            external = ExternalSelectorConfig(
                endpoint_url=url or "",
                model_name=sel.get("model_name", "default"),
                api_key=env.get(API_KEY_ENV),
                timeout=float(sel.get("timeout", 20.0)),
                max_retries=int(sel.get("max_retries", 1)),
            )
        except ValueError as exc:
            raise ConfigInvalid(f"[selector]: {exc}") from None

    out_dir = run.get("output_dir") or exp.get("output_dir") or env.get(OUTPUT_ENV)
    try:
        run_cfg = RunConfig(
            problem=pdesc,
            population_size=int(run.get("population_size", 30)),
            max_evals=int(run.get("max_evals", 10_000)),
            epoch_evals=int(run.get("epoch_evals", 300)),
            initial_algorithm=run.get("initial_algorithm", "DE"),
            selector=kind_sel,
            policy=policy,
            external=external,
            handover=handover,
            algorithm_params=params,
            stagnation_epsilon=float(run.get("stagnation_epsilon", 1e-8)),
            seed=int(run.get("seed", 0)),
            output_dir=out_dir,
        )
    except ValueError as exc:
        raise ConfigInvalid(f"[run]: {exc}") from None

    return ExperimentConfig(
        run=run_cfg,
        functions=_as_list(exp.get("functions", ExperimentConfig.__dataclass_fields__["functions"].default_factory())),
        seeds=parse_seeds(exp.get("seeds", list(range(20)))),
        strategies=_as_list(exp.get("strategies", list(STRATEGIES))),
        output_dir=out_dir or "runs",
        plot=bool(exp.get("plot", True)),
        workers=int(exp.get("workers", 1)),
    )


def merge(raw: dict[str, Any], overrides: dict[str, dict[str, Any]]) -> dict[str, Any]:
    """Overlay ``{section: {key: value}}`` onto a raw config (flags win)."""
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in raw.items()}
    for section, values in overrides.items():
        for key, value in values.items():
            if value is not None:
                out.setdefault(section, {})[key] = value
    return out
