import json

import pytest

from pmf.cli import main
from pmf.config import build, load_file, merge, parse_seeds
from pmf.core import ConfigInvalid


@pytest.fixture(autouse=True)
def _cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("PMF_OUTPUT_DIR", raising=False)
    monkeypatch.delenv("PMF_SELECTOR_URL", raising=False)


def test_unknown_flag_names_the_flag(capsys):
    assert main(["run", "--funtcion", "sphere"]) == 1
    assert "--funtcion" in capsys.readouterr().err


def test_missing_subcommand_is_config_error(capsys):
    assert main([]) == 1


def test_run_twice_is_byte_identical(tmp_path):
    assert main(["run", "--seed", "7", "--max-evals", "2000", "--output", "a"]) == 0
    assert main(["run", "--seed", "7", "--max-evals", "2000", "--output", "b"]) == 0
    for name in ("result.json", "trajectory.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_run_default_output_and_env(tmp_path, monkeypatch):
    assert main(["run", "--max-evals", "1000", "--function", "sphere"]) == 0
    assert (tmp_path / "runs/PMF/sphere/seed_0/result.json").exists()
    monkeypatch.setenv("PMF_OUTPUT_DIR", str(tmp_path / "envout"))
    assert main(["baseline", "--algorithm", "ga", "--max-evals", "1000"]) == 0
    d = json.loads((tmp_path / "envout/result.json").read_text())
    assert d["strategy"] == "GA" and d["switch_count"] == 0


def test_config_file_and_flag_precedence(tmp_path):
    (tmp_path / "c.toml").write_text(
        '[problem]\nfunction = "griewank"\ndim = 5\n[run]\nmax_evals = 1500\nseed = 3\n'
        '[algorithms.DE]\nF = 0.6\n'
    )
    assert main(["run", "--config", "c.toml", "--seed", "4", "--output", "o"]) == 0
    d = json.loads((tmp_path / "o/result.json").read_text())
    assert d["config"]["seed"] == 4 and d["problem"]["kind"] == "griewank"
    assert d["config"]["max_evals"] == 1500 and d["config"]["algorithm_params"] == {"DE": {"F": 0.6}}


@pytest.mark.parametrize(
    "text,needle",
    [
        ("[run]\nbogus = 1\n", "bogus"),
        ('[problem]\nfunction = "nope"\n', "nope"),
        ("[selector]\nkind = \"external\"\n", "endpoint_url"),
        ("[algorithms.DE]\nG = 1\n", "G"),
        ("[handover]\nelite_fraction = 2.0\n", "elite_fraction"),
        ("[run\n", "parse"),
    ],
)
def test_config_errors_exit_one(tmp_path, capsys, text, needle):
    (tmp_path / "bad.toml").write_text(text)
    assert main(["run", "--config", "bad.toml"]) == 1
    assert needle in capsys.readouterr().err


def test_json_config(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"problem": {"function": "sphere", "dim": 3}}))
    exp = build(load_file(tmp_path / "c.json"), env={})
    assert exp.run.problem == {"kind": "sphere", "dim": 3, "seed": 0}


def test_seed_parsing():
    assert parse_seeds("0-3") == [0, 1, 2, 3]
    assert parse_seeds("1, 5,9") == [1, 5, 9]
    assert parse_seeds([2, 4]) == [2, 4]
    with pytest.raises(ConfigInvalid):
        parse_seeds("")


def test_merge_ignores_unset_flags():
    raw = {"run": {"seed": 3}}
    assert merge(raw, {"run": {"seed": None, "max_evals": 10}}) == {"run": {"seed": 3, "max_evals": 10}}


def test_bench_then_report(tmp_path):
    (tmp_path / "exp.toml").write_text(
        '[run]\nmax_evals = 900\n[experiment]\nfunctions = ["sphere", "ackley"]\nseeds = "0-1"\n'
        'output_dir = "out"\n'
    )
    assert main(["bench", "--config", "exp.toml"]) == 0
    out = tmp_path / "out"
    assert len(list(out.glob("runs/*/*/seed_*/result.json"))) == 8 * 2 * 2
    snapshot = {p.name: p.read_bytes() for p in out.iterdir() if p.is_file()}
    assert {"summary.json", "summary.csv", "switch_table.csv", "convergence_sphere.svg"} <= set(snapshot)
    assert main(["report", str(out)]) == 0
    assert {p.name: p.read_bytes() for p in out.iterdir() if p.is_file()} == snapshot
    run_dir = out / "runs/PMF/ackley/seed_1"
    assert main(["report", "--run", str(run_dir)]) == 0
    assert (run_dir / "convergence.svg").read_text().count("<polyline") == 1


def test_bench_parallel_identical_bytes(tmp_path):
    args = ["bench", "--max-evals", "600", "--functions", "rastrigin", "--seeds", "0-2",
            "--strategies", "PMF,GA,CMAES"]
    assert main(args + ["--output", "s"]) == 0
    assert main(args + ["--output", "p", "--workers", "3"]) == 0
    # feedback.jsonl carries per-epoch wall-clock time; everything else must match
    files = sorted(p.relative_to(tmp_path / "s") for p in (tmp_path / "s").rglob("*")
                   if p.is_file() and p.name != "feedback.jsonl")
    assert files
    for f in files:
        assert (tmp_path / "s" / f).read_bytes() == (tmp_path / "p" / f).read_bytes(), f


def test_bench_partial_failure_exit_two(tmp_path, monkeypatch, capsys):
    import pmf.orchestrator as orch

    real = orch.run_strategy

    def flaky(strategy, config, problem=None):
        if strategy == "SA" and config.seed == 1:
            raise RuntimeError("injected")
        return real(strategy, config, problem)

    monkeypatch.setattr(orch, "run_strategy", flaky)
    code = main(["bench", "--max-evals", "600", "--functions", "sphere", "--seeds", "0-1",
                 "--strategies", "SA,GA", "--output", "o"])
    assert code == 2 and "injected" in capsys.readouterr().err
    assert json.loads((tmp_path / "o/summary.json").read_text())["cells"]


def test_report_on_empty_directory_is_config_error(tmp_path):
    (tmp_path / "empty").mkdir()
    assert main(["report", "empty"]) == 1
