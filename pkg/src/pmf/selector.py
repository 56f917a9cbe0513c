"""Selection agent: continue with the current algorithm or switch.

Two deciders share one :class:`Decision` type. :func:`decide_rule_based`
is a pure function of the feedback log. :func:`decide_external` asks an
OpenAI-compatible chat-completions endpoint and falls back to the rules on
any failure.
"""

from __future__ import annotations

import json
import logging
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import httpx

from .feedback import FeedbackReport, HistoryLog
from .metaheuristics import ALL_ALGORITHMS, AlgorithmId

log = logging.getLogger(__name__)

API_KEY_ENV = "PMF_SELECTOR_API_KEY"
URL_ENV = "PMF_SELECTOR_URL"


class ParseFailure(ValueError):
    pass


class UnknownAlgorithm(ValueError):
    pass


class Action(str, Enum):
    CONTINUE = "continue"
    SWITCH = "switch"


@dataclass(frozen=True)
class Decision:
    action: Action
    target: Optional[AlgorithmId] = None
    reason: str = ""

    def __post_init__(self):
        if (self.action is Action.SWITCH) != (self.target is not None):
            raise ValueError("a target is required for, and only for, a switch")

    @classmethod
    def keep(cls, reason: str = "") -> "Decision":
        return cls(Action.CONTINUE, None, reason)

    @classmethod
    def switch(cls, target: AlgorithmId, reason: str = "") -> "Decision":
        return cls(Action.SWITCH, AlgorithmId.parse(target), reason)

    @property
    def is_switch(self) -> bool:
        return self.action is Action.SWITCH


@dataclass(frozen=True)
class SelectorPolicy:
    stagnation_threshold: int = 3
    diversity_low: float = 0.05
    diversity_high: float = 0.6
    phase_split: float = 0.5
    exploratory_set: tuple[AlgorithmId, ...] = (AlgorithmId.DE, AlgorithmId.PSO, AlgorithmId.GA)
    exploitative_set: tuple[AlgorithmId, ...] = (
        AlgorithmId.CMAES,
        AlgorithmId.SA,
        AlgorithmId.ACO,
        AlgorithmId.TS,
    )

    def __post_init__(self):
        object.__setattr__(self, "exploratory_set", tuple(map(AlgorithmId.parse, self.exploratory_set)))
        object.__setattr__(self, "exploitative_set", tuple(map(AlgorithmId.parse, self.exploitative_set)))
        a, b = set(self.exploratory_set), set(self.exploitative_set)
        if a & b or a | b != set(ALL_ALGORITHMS) or len(a) + len(b) != len(ALL_ALGORITHMS):
            raise ValueError("exploratory and exploitative sets must partition the seven algorithms")
        if self.stagnation_threshold < 1:
            raise ValueError("stagnation_threshold must be positive")
        if not 0.0 < self.phase_split < 1.0:
            raise ValueError("phase_split must lie in (0, 1)")

    def early(self, report: FeedbackReport) -> bool:
        return report.budget_fraction < self.phase_split


def _round_robin(order: Sequence[AlgorithmId], current: AlgorithmId) -> AlgorithmId:
    if current in order:
        i = order.index(current)
        return order[(i + 1) % len(order)]
    return order[0]


def _stagnation_target(report, history: HistoryLog, policy: SelectorPolicy) -> AlgorithmId:
    current = report.algorithm
    early = policy.early(report)
    tried = {r.algorithm for r in history.reports if policy.early(r) == early}
    tried.add(current)
    candidates = [
        a for a in ALL_ALGORITHMS if a in history.cumulative_improvement and a not in tried
    ]
    if candidates:
        # max() keeps the first of equal values, i.e. canonical order on ties
        return max(candidates, key=lambda a: history.cumulative_improvement[a])
    phase_list = policy.exploratory_set if early else policy.exploitative_set
    return _round_robin(phase_list, current)


def decide_rule_based(
    report: FeedbackReport, history: HistoryLog, policy: SelectorPolicy = SelectorPolicy()
) -> Decision:
    current = report.algorithm
    if report.stagnation_count >= policy.stagnation_threshold:
        target = _stagnation_target(report, history, policy)
        if target != current:
            return Decision.switch(target, f"R1: stagnation for {report.stagnation_count} epochs")
    if (
        policy.early(report)
        and report.diversity < policy.diversity_low
        and current not in policy.exploratory_set
    ):
        target = next(a for a in policy.exploratory_set if a != current)
        return Decision.switch(target, f"R2: diversity {report.diversity:.3g} low in early phase")
    if (
        not policy.early(report)
        and report.diversity > policy.diversity_high
        and current not in policy.exploitative_set
    ):
        target = next(a for a in policy.exploitative_set if a != current)
        return Decision.switch(target, f"R3: diversity {report.diversity:.3g} high in late phase")
    return Decision.keep("R4: no rule fired")


PROMPT_WINDOW = 5

_PREAMBLE = (
    "You are the algorithm selection agent of an adaptive optimizer that minimizes a "
    "black-box objective. After every epoch you receive performance feedback and decide "
    "whether the optimizer keeps its current metaheuristic or switches to another one."
)


def build_prompt(
    report: FeedbackReport, history: HistoryLog, available: Sequence[AlgorithmId] = ALL_ALGORITHMS
) -> str:
    recent = list(history.reports[-PROMPT_WINDOW:])
    if not recent or recent[-1] != report:
        recent = (recent + [report])[-PROMPT_WINDOW:]
    cumulative = {a.value: v for a, v in sorted(history.cumulative_improvement.items())}
    lines = [
        _PREAMBLE,
        "",
        f"Current algorithm: {report.algorithm.value}",
        f"Recent feedback reports (oldest first, {len(recent)} line(s)):",
        *(r.to_json() for r in recent),
        "",
        "Cumulative improvement rate per algorithm: " + json.dumps(cumulative, sort_keys=True),
        "Available algorithms: " + ", ".join(AlgorithmId.parse(a).value for a in available),
        "",
        'Respond with only a JSON object: {"action": "continue"} or '
        '{"action": "switch", "algorithm": "<ID>", "reason": "<text>"}',
    ]
    return "\n".join(lines)


def _json_objects(text: str):
    """Yield every decodable JSON object embedded in ``text``, left to right."""
    decoder = json.JSONDecoder()
    for m in re.finditer(r"\{", text):
        try:
            obj, _ = decoder.raw_decode(text, m.start())
        except json.JSONDecodeError:
            continue
        if isinstance(obj, dict):
            yield obj


def parse_decision(text: str, current: AlgorithmId) -> Decision:
    current = AlgorithmId.parse(current)
    obj = next((o for o in _json_objects(text or "") if "action" in o), None)
    if obj is None:
        raise ParseFailure("no JSON object with an 'action' key in the response")
    action = str(obj["action"]).strip().lower()
    reason = str(obj.get("reason") or "")
    if action == Action.CONTINUE.value:
        return Decision.keep(reason)
    if action != Action.SWITCH.value:
        raise ParseFailure(f"unsupported action {obj['action']!r}")
    if "algorithm" not in obj:
        raise ParseFailure("a switch needs an 'algorithm' field")
    try:
        target = AlgorithmId.parse(obj["algorithm"])
    except ValueError as exc:
        raise UnknownAlgorithm(str(exc)) from None
    if target == current:
        return Decision.keep("no-op switch")
    return Decision.switch(target, reason)


@dataclass(frozen=True)
class ExternalSelectorConfig:
    endpoint_url: str
    model_name: str = "default"
    api_key: str | None = field(default=None, repr=False)
    timeout: float = 20.0
    max_retries: int = 1

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    @classmethod
    def from_env(cls, **overrides) -> "ExternalSelectorConfig":
        kw = {"endpoint_url": os.environ.get(URL_ENV, ""), "api_key": os.environ.get(API_KEY_ENV)}
        kw.update({k: v for k, v in overrides.items() if v is not None})
        if not kw["endpoint_url"]:
            raise ValueError(f"no selector endpoint; set {URL_ENV} or selector.endpoint_url")
        return cls(**kw)


def _trace(path, entry: dict) -> None:
    if path is None:
        return
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(entry) + "\n")


def decide_external(
    cfg: ExternalSelectorConfig,
    report: FeedbackReport,
    history: HistoryLog,
    available: Sequence[AlgorithmId] = ALL_ALGORITHMS,
    fallback_policy: SelectorPolicy = SelectorPolicy(),
    trace_path: str | Path | None = None,
    client: httpx.Client | None = None,
) -> Decision:
    """Decision from the endpoint, or the rule-based one if anything fails.

    Every HTTP attempt is appended to ``trace_path`` with the verbatim
    prompt and response body (or the error).
    """
    prompt = build_prompt(report, history, available)
    body = {
        "model": cfg.model_name,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": 0,
    }
    headers = {"Content-Type": "application/json"}
    if cfg.api_key:
        headers["Authorization"] = f"Bearer {cfg.api_key}"
    owns_client = client is None
    client = client or httpx.Client(timeout=cfg.timeout)
    failure = "no attempt made"
    try:
        for attempt in range(cfg.max_retries + 1):
            entry = {"epoch": report.epoch, "attempt": attempt, "prompt": prompt}
            try:
                resp = client.post(cfg.endpoint_url, json=body, headers=headers, timeout=cfg.timeout)
            except httpx.HTTPError as exc:
                failure = f"{type(exc).__name__}: {exc}"
                _trace(trace_path, entry | {"response": None, "error": failure})
                continue
            entry |= {"status": resp.status_code, "response": resp.text}
            if not resp.is_success:
                failure = f"HTTP {resp.status_code}"
                _trace(trace_path, entry | {"error": failure})
                continue
            try:
                content = resp.json()["choices"][0]["message"]["content"]
                decision = parse_decision(content, report.algorithm)
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                failure = f"{type(exc).__name__}: {exc}"
                _trace(trace_path, entry | {"error": failure})
                continue
            if decision.is_switch and decision.target not in available:
                failure = f"target {decision.target.value} not available"
                _trace(trace_path, entry | {"error": failure})
                continue
            _trace(trace_path, entry | {"decision": decision.action.value,
                                        "target": decision.target and decision.target.value})
            return decision
    finally:
        if owns_client:
            client.close()
    log.warning("external selector failed (%s); using rule-based fallback", failure)
    fallback = decide_rule_based(report, history, fallback_policy)
    return Decision(fallback.action, fallback.target, f"fallback: {failure}; {fallback.reason}")
