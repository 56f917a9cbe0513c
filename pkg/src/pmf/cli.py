"""``pmf`` command line: run, baseline, bench, report."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import config as cfgmod
from .benchmarks import FUNCTIONS
from .core import ConfigInvalid, PMFError
from .metaheuristics import AlgorithmId
from .orchestrator import (
    PMF,
    STRATEGIES,
    Cell,
    ExperimentSummary,
    run_baseline,
    run_experiment,
    run_pmf,
    summarize,
)
from .reporting import (
    format_table,
    load_result,
    render_convergence_svg,
    write_summary,
    write_switch_table,
)

EXIT_OK, EXIT_CONFIG, EXIT_PARTIAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit 2, which means "partial failure" here
        raise UsageError(f"{self.prog}: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML or JSON config file")
    p.add_argument("--function", choices=sorted(FUNCTIONS), help="benchmark function")
    p.add_argument("--dim", type=int)
    p.add_argument("--problem-seed", type=int, help="seed of the shift/rotation")
    p.add_argument("--seed", type=int, help="run seed")
    p.add_argument("--max-evals", type=int)
    p.add_argument("--epoch-evals", type=int)
    p.add_argument("--population-size", type=int)
    p.add_argument("--output", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pmf", description="Adaptive metaheuristic switching runs and experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="single adaptive run")
    _common(run)
    run.add_argument("--initial-algorithm")
    run.add_argument("--selector", choices=["rule", "external"])
    run.add_argument("--endpoint", help="chat-completions URL for the external selector")
    run.add_argument("--model", help="model name sent to the external selector")

    base = sub.add_parser("baseline", help="single fixed-algorithm run")
    _common(base)
    base.add_argument("--algorithm", required=True, help="GA, PSO, DE, ACO, SA, TS or CMAES")

    bench = sub.add_parser("bench", help="strategy x function x seed matrix")
    _common(bench)
    bench.add_argument("--functions", help="comma-separated function names")
    bench.add_argument("--seeds", help='e.g. "0-19" or "1,4,9"')
    bench.add_argument("--strategies", help="comma-separated; PMF plus algorithm ids")
    bench.add_argument("--workers", type=int)
    bench.add_argument("--no-plot", action="store_true")

    rep = sub.add_parser("report", help="rebuild tables and plots from stored results")
    rep.add_argument("directory", nargs="?", help="bench output directory")
    rep.add_argument("--run", help="a single run directory (plots that run alone)")
    rep.add_argument("--config", help="TOML or JSON config (for the output directory)")
    return parser


def _overrides(args) -> dict:
    g = lambda name: getattr(args, name, None)  # noqa: E731
    out = {
        "problem": {"function": g("function"), "dim": g("dim"), "seed": g("problem_seed")},
        "run": {
            "seed": g("seed"),
            "max_evals": g("max_evals"),
            "epoch_evals": g("epoch_evals"),
            "population_size": g("population_size"),
            "initial_algorithm": g("initial_algorithm"),
            "output_dir": g("output"),
        },
        "selector": {"kind": g("selector"), "endpoint_url": g("endpoint"), "model_name": g("model")},
        "experiment": {
            "functions": g("functions"),
            "seeds": g("seeds"),
            "strategies": g("strategies"),
            "workers": g("workers"),
        },
    }
    if g("no_plot"):
        out["experiment"]["plot"] = False
    return out


def _load(args) -> cfgmod.ExperimentConfig:
    raw = cfgmod.load_file(args.config) if getattr(args, "config", None) else {}
    return cfgmod.build(cfgmod.merge(raw, _overrides(args)))


def _single_out(exp: cfgmod.ExperimentConfig, strategy: str) -> str:
    run = exp.run
    if run.output_dir:
        return run.output_dir
    return str(Path("runs") / strategy / run.problem["kind"] / f"seed_{run.seed}")


def _print_run(result, out: str) -> None:
    print(f"{result.strategy} on {result.problem['kind']} (dim {result.problem['dim']}, seed "
          f"{result.config.seed}): best {result.best.fitness:.10g} after {result.total_evals} evals, "
          f"{len(result.switches)} switch(es)")
    print(f"results in {out}")


def cmd_run(args) -> int:
    exp = _load(args)
    out = _single_out(exp, PMF)
    result = run_pmf(replace(exp.run, output_dir=out))
    _print_run(result, out)
    return EXIT_OK


def cmd_baseline(args) -> int:
    exp = _load(args)
    try:
        algo = AlgorithmId.parse(args.algorithm)
    except ValueError as exc:
        raise ConfigInvalid(f"--algorithm: {exc}") from None
    run = replace(exp.run, initial_algorithm=algo)
    out = run.output_dir or str(Path("runs") / algo.value / run.problem["kind"] / f"seed_{run.seed}")
    result = run_baseline(algo, replace(run, output_dir=out))
    _print_run(result, out)
    return EXIT_OK


def _stored_cells(root: Path) -> tuple[list[Cell], dict[str, dict]]:
    """Cells and raw results from ``root/runs/<strategy>/<function>/seed_<n>``."""
    found = []
    for path in (root / "runs").glob("*/*/seed_*/result.json"):
        strategy, function, seed_dir = path.parts[-4:-1]
        found.append((strategy, function, int(seed_dir.split("_", 1)[1]), path))
    order = {s: i for i, s in enumerate(STRATEGIES)}
    fn_order = {f: i for i, f in enumerate(FUNCTIONS)}
    found.sort(key=lambda t: (order.get(t[0], 99), fn_order.get(t[1], 99), t[2]))
    cells, raw = [], {}
    for strategy, function, seed, path in found:
        d = load_result(path)
        raw[f"{strategy}/{function}/seed_{seed}"] = d
        cells.append(Cell(strategy, function, seed, d["best_fitness"], d["switch_count"],
                          d["trajectory"], d["total_evals"]))
    return cells, raw


def regenerate(root, plot: bool = True, extra: Sequence[Cell] = ()) -> ExperimentSummary:
    """Summary, switch table and convergence plots from stored run directories."""
    root = Path(root)
    cells, raw = _stored_cells(root)
    cells = cells + list(extra)
    if not cells:
        raise ConfigInvalid(f"no stored results under {root / 'runs'}")
    strategies = [s for s in STRATEGIES if any(c.strategy == s for c in cells)]
    functions = [f for f in FUNCTIONS if any(c.function == f for c in cells)]
    seeds = sorted({c.seed for c in cells})
    summary = ExperimentSummary(strategies, functions, seeds, cells, summarize(cells, strategies, functions))
    write_summary(summary, root)
    write_switch_table(raw, root / "switch_table.csv")
    if plot:
        for fn in functions:
            groups = {
                s: [c.trajectory for c in cells if c.strategy == s and c.function == fn and c.error is None]
                for s in strategies
            }
            groups = {s: t for s, t in groups.items() if t}
            if groups:
                render_convergence_svg(groups, root / f"convergence_{fn}.svg",
                                       title=f"{fn}: median best-so-far per epoch")
    return summary


def cmd_bench(args) -> int:
    exp = _load(args)
    root = Path(exp.output_dir)
    summary = run_experiment(
        exp.strategies, exp.functions, exp.seeds, exp.run,
        workers=exp.workers, output_dir=str(root),
    )
    regenerate(root, plot=exp.plot, extra=summary.failures)
    print(format_table(summary.groups))
    print(f"{len(summary.cells) - len(summary.failures)} run(s) written under {root / 'runs'}")
    if summary.failures:
        for c in summary.failures:
            print(f"failed: {c.strategy}/{c.function}/seed_{c.seed}: {c.error}", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_report(args) -> int:
    if args.run:
        run_dir = Path(args.run)
        try:
            d = load_result(run_dir)
        except (OSError, ValueError) as exc:
            raise ConfigInvalid(f"--run: cannot load {run_dir}: {exc}") from None
        name = f"{d['strategy']} seed {d['config']['seed']}"
        render_convergence_svg({name: [d["trajectory"]]}, run_dir / "convergence.svg",
                               title=f"{d['problem']['kind']}: best-so-far per epoch")
        write_switch_table({name: d}, run_dir / "switch_table.csv")
        print(f"{name}: best {d['best_fitness']:.10g}, {d['switch_count']} switch(es)")
        return EXIT_OK
    root = args.directory
    if root is None:
        root = _load(args).output_dir
    summary = regenerate(root)
    print(format_table(summary.groups))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "baseline": cmd_baseline, "bench": cmd_bench, "report": cmd_report}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PMFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
