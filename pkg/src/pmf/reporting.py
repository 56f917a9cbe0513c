"""Run artifacts (CSV, JSONL, JSON) and SVG convergence plots."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .feedback import write_jsonl

TRAJECTORY_HEADER = ["epoch", "algorithm", "best_so_far", "evals_used"]
SWITCH_TABLE_HEADER = ["run", "epoch", "algorithm", "switched"]


def fmt(x: float) -> str:
    """17 significant digits: parses back to the identical double."""
    return format(float(x), ".17g")


def write_trajectory_csv(result, path) -> None:
    """One row per epoch; ``evals_used`` is the cumulative budget spent after it."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_HEADER)
        for e, (best, algo, used) in enumerate(
            zip(result.trajectory, result.algorithms, result.evals_after_epoch)
        ):
            w.writerow([e, algo.value, fmt(best), used])


def read_trajectory_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [
        {
            "epoch": int(r["epoch"]),
            "algorithm": r["algorithm"],
            "best_so_far": float(r["best_so_far"]),
            "evals_used": int(r["evals_used"]),
        }
        for r in rows
    ]


def write_switches_csv(result, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", "from", "to", "reason", "best_fitness_at_switch"])
        for s in result.switches:
            w.writerow([s.epoch, s.from_.value, s.to.value, s.reason, fmt(s.best_fitness_at_switch)])


def write_run(result, out_dir) -> Path:
    """``trajectory.csv``, ``feedback.jsonl``, ``switches.csv`` and ``result.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(result, out / "trajectory.csv")
    write_jsonl(result.history.reports, out / "feedback.jsonl")
    write_switches_csv(result, out / "switches.csv")
    (out / "result.json").write_text(result.to_json(), encoding="utf-8")
    return out


def load_result(path) -> dict:
    """A stored ``result.json`` (a directory containing one is accepted)."""
    p = Path(path)
    if p.is_dir():
        p = p / "result.json"
    return json.loads(p.read_text(encoding="utf-8"))


def _run_rows(run_id: str, run) -> list[list]:
    if isinstance(run, Mapping):
        algos = list(run["algorithms"])
        switch_epochs = {s["epoch"] for s in run["switches"]}
    else:
        algos = [a.value for a in run.algorithms]
        switch_epochs = {s.epoch for s in run.switches}
    return [[run_id, e, a, int(e in switch_epochs)] for e, a in enumerate(algos)]


def switch_table(runs: Mapping[str, object]) -> list[list]:
    rows = []
    for run_id, run in runs.items():
        rows.extend(_run_rows(run_id, run))
    return rows


def write_switch_table(runs: Mapping[str, object], path) -> None:
    """Per-epoch algorithm matrix; ``switched`` marks the first epoch after a switch.

    ``runs`` maps a run id to a RunResult or a loaded ``result.json`` dict.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWITCH_TABLE_HEADER)
        w.writerows(switch_table(runs))


def median_curve(trajectories: Sequence[Sequence[float]]) -> list[float]:
    """Per-epoch median over runs; shorter runs hold their final value."""
    n = max(len(t) for t in trajectories)
    padded = np.array([list(t) + [t[-1]] * (n - len(t)) for t in trajectories], dtype=float)
    return np.median(padded, axis=0).tolist()


_PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22",
]


def _esc(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")


def convergence_svg(
    groups: Mapping[str, Sequence[Sequence[float]]],
    title: str = "Median best-so-far per epoch",
    width: int = 720,
    height: int = 440,
) -> str:
    """Self-contained SVG with one polyline per strategy (median over seeds)."""
    curves = {name: median_curve(trajs) for name, trajs in groups.items() if trajs}
    if not curves:
        raise ValueError("nothing to plot: no trajectories")
    values = np.concatenate([np.asarray(c) for c in curves.values()])
    log_scale = bool(np.all(values > 0))
    tr = np.log10 if log_scale else (lambda v: np.asarray(v, dtype=float))
    tv = tr(values)
    lo, hi = float(np.min(tv)), float(np.max(tv))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    n_epochs = max(len(c) for c in curves.values())
    left, right, top, bottom = 70, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def px(e):
        return left + (pw * e / max(n_epochs - 1, 1))

    def py(v):
        return top + ph * (1.0 - (v - lo) / (hi - lo))

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-size="15">{_esc(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle">epoch</text>',
        f'<text x="16" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {top + ph / 2:.1f})">'
        f'{"best fitness (log10)" if log_scale else "best fitness"}</text>',
    ]
    for i in range(5):
        v = lo + (hi - lo) * i / 4
        label = f"1e{v:.1f}" if log_scale else f"{v:.4g}"
        out.append(f'<text x="{left - 6}" y="{py(v) + 4:.1f}" text-anchor="end">{label}</text>')
    for e in sorted({0, n_epochs - 1, (n_epochs - 1) // 2}):
        out.append(f'<text x="{px(e):.1f}" y="{top + ph + 16}" text-anchor="middle">{e}</text>')
    for i, (name, curve) in enumerate(curves.items()):
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(f"{px(e):.2f},{py(v):.2f}" for e, v in enumerate(tr(np.asarray(curve))))
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{pts}">'
            f"<title>{_esc(name)}</title></polyline>"
        )
        ly = top + 14 + 18 * i
        out.append(
            f'<line x1="{left + pw + 12}" y1="{ly - 4}" x2="{left + pw + 36}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(f'<text x="{left + pw + 42}" y="{ly}">{_esc(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_convergence_svg(groups: Mapping[str, Sequence[Sequence[float]]], path, **kw) -> None:
    svg = convergence_svg(groups, **kw)  # raises before touching the file system
    Path(path).write_text(svg, encoding="utf-8")


def write_summary(summary, out_dir) -> None:
    """``summary.json`` and ``summary.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    write_group_csv(summary.groups, out / "summary.csv")


def write_group_csv(groups: Iterable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "function", "n", "median", "q1", "q3", "iqr", "mean_switches"])
        for g in groups:
            w.writerow([g.strategy, g.function, g.n, fmt(g.median), fmt(g.q1), fmt(g.q3),
                        fmt(g.iqr), fmt(g.mean_switches)])


def format_table(groups: Iterable) -> str:
    rows = [("strategy", "function", "median", "IQR", "switches")]
    for g in groups:
        rows.append((g.strategy, g.function, f"{g.median:.6g}", f"{g.iqr:.3g}",
                     f"{g.mean_switches:.1f}"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows)


def rank_of(value: float, others: Iterable[float]) -> int:
    """Competition rank (1 = best): ties share the better rank."""
    return 1 + sum(1 for o in others if o < value)
