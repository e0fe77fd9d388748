# Tests for the command line: exit codes, config files and trace replay
# Each construction writes a trace that verify-log must accept

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from perm_homogeneity.main import main


@pytest.fixture
def runner():
    return CliRunner()


def _invoke(runner: CliRunner, *args: str):
    return runner.invoke(main, list(args), catch_exceptions=False)


def _verify(runner: CliRunner, trace: Path):
    result = _invoke(runner, "verify-log", str(trace))
    assert result.exit_code == 0, result.output
    assert "records verified" in result.output
    return result


def test_ordinal_add(runner):
    result = _invoke(runner, "ordinal", "add", "w^2+w", "w")
    assert result.exit_code == 0
    assert result.output.strip() == "w^2+w*2"


def test_ordinal_error_exits_with_usage_code(runner):
    result = _invoke(runner, "ordinal", "sub", "w", "5")
    assert result.exit_code == 2
    assert "Cannot subtract w from the smaller 5" in result.output


def test_missing_required_option(runner):
    result = _invoke(runner, "engine-run", "--target", "[0,w)%3=0")
    assert result.exit_code == 2


def test_ordinal_trace_replays(runner, tmp_path):
    trace = tmp_path / "ordinal.jsonl"
    result = _invoke(runner, "ordinal", "cmp", "w", "w+1", "--out", str(trace))
    assert result.exit_code == 0
    kinds = [json.loads(line)["kind"] for line in trace.read_text(encoding="utf-8").splitlines()]
    assert kinds == ["run", "ordinal"]
    _verify(runner, trace)


def test_extend_fuzz_command(runner, tmp_path):
    trace = tmp_path / "fuzz.jsonl"
    result = _invoke(
        runner, "extend-fuzz", "--universe", "3", "--max-term", "2", "--terms", "1", "--out", str(trace)
    )
    assert result.exit_code == 0, result.output
    assert "0 counterexamples" in result.output
    _verify(runner, trace)


def _engine_trace(runner: CliRunner, trace: Path) -> None:
    result = _invoke(
        runner,
        "engine-run",
        "--source",
        "[0,w)%2=0",
        "--target",
        "[0,w)%3=0",
        "--steps",
        "20",
        "--prefix",
        "20",
        "--out",
        str(trace),
    )
    assert result.exit_code == 0, result.output


def test_engine_run_trace_replays(runner, tmp_path):
    trace = tmp_path / "engine.jsonl"
    _engine_trace(runner, trace)
    result = _verify(runner, trace)
    assert "task" in result.output


def test_tampered_trace_is_rejected(runner, tmp_path):
    trace = tmp_path / "engine.jsonl"
    _engine_trace(runner, trace)
    lines = trace.read_text(encoding="utf-8").splitlines()
    for number, line in enumerate(lines):
        entry = json.loads(line)
        if entry["kind"] == "task" and entry["data"]["record"]["witness"] is not None:
            entry["data"]["record"]["image"] = "999"
            lines[number] = json.dumps(entry)
            break
    trace.write_text("\n".join(lines) + "\n", encoding="utf-8")
    result = _invoke(runner, "verify-log", str(trace))
    assert result.exit_code == 1
    assert "trace has 999" in result.output


def test_engine_run_budget_exit_code(runner):
    result = _invoke(
        runner,
        "engine-run",
        "--source",
        "[0,w)%2=0",
        "--target",
        "[0,w)%3=0",
        "--steps",
        "0",
        "--budget",
        "3",
    )
    assert result.exit_code == 3
    assert "Budget exhausted" in result.output


def test_config_file_supplies_defaults(runner, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text(
        "# engine defaults\nsource = [0,w)%2=0\ntarget = [0,w)%3=0\nsteps = 10\nprefix = 10\nlambda = w\n",
        encoding="utf-8",
    )
    trace = tmp_path / "engine.jsonl"
    result = _invoke(runner, "--config", str(config), "engine-run", "--out", str(trace))
    assert result.exit_code == 0, result.output
    run = json.loads(trace.read_text(encoding="utf-8").splitlines()[0])
    assert run["data"]["ambient"] == "w"
    assert run["data"]["options"]["steps"] == "10"


def test_config_flags_win_over_file(runner, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("source = [0,w)%2=0\ntarget = [0,w)%3=0\nsteps = 10\nprefix = 10\n", encoding="utf-8")
    trace = tmp_path / "engine.jsonl"
    result = _invoke(runner, "--config", str(config), "engine-run", "--steps", "4", "--out", str(trace))
    assert result.exit_code == 0, result.output
    run = json.loads(trace.read_text(encoding="utf-8").splitlines()[0])
    assert run["data"]["options"]["steps"] == "4"


def test_config_unknown_key(runner, tmp_path):
    config = tmp_path / "run.conf"
    config.write_text("bogus = 1\n", encoding="utf-8")
    result = _invoke(runner, "--config", str(config), "ordinal", "cmp", "1", "2")
    assert result.exit_code == 2
    assert "Unknown config keys: bogus" in result.output


def _small_catalog(tmp_path: Path) -> Path:
    path = tmp_path / "catalog.json"
    path.write_text(json.dumps({"pairs": [["[0,w)", "[0,w)%2=1"]], "kappa": "w"}), encoding="utf-8")
    return path


def test_keylemma_trace_replays(runner, tmp_path):
    trace = tmp_path / "keylemma.jsonl"
    result = _invoke(
        runner,
        "keylemma",
        "--catalog",
        str(_small_catalog(tmp_path)),
        "--lambda",
        "w",
        "--tasks",
        "4",
        "--prefix",
        "10",
        "--word-set",
        "[0,w)%2=1",
        "--out",
        str(trace),
    )
    assert result.exit_code == 0, result.output
    assert "by f0" in result.output
    _verify(runner, trace)


def test_intransitive_cert_rejects_unknown_generator(runner, tmp_path):
    result = _invoke(
        runner,
        "intransitive-cert",
        "--catalog",
        str(_small_catalog(tmp_path)),
        "--lambda",
        "w",
        "--tasks",
        "2",
        "--prefix",
        "5",
        "--word",
        "f9",
    )
    assert result.exit_code == 2
    assert "f9 is not a catalog generator" in result.output


def test_intransitive_cert_trace_replays(runner, tmp_path):
    trace = tmp_path / "cert.jsonl"
    result = _invoke(
        runner,
        "intransitive-cert",
        "--catalog",
        str(_small_catalog(tmp_path)),
        "--lambda",
        "w",
        "--tasks",
        "4",
        "--prefix",
        "10",
        "--word",
        "f0",
        "--out",
        str(trace),
    )
    assert result.exit_code == 0, result.output
    assert "f0 misses" in result.output
    _verify(runner, trace)


def test_generic_run_trace_replays(runner, tmp_path):
    trace = tmp_path / "generic.jsonl"
    result = _invoke(
        runner,
        "generic-run",
        "--round",
        "[0,w)%2=0:[0,w)%2=1:[0,w)",
        "--requirements",
        "3",
        "--base-steps",
        "10",
        "--lambda",
        "w",
        "--out",
        str(trace),
    )
    assert result.exit_code == 0, result.output
    assert "1 rounds, 3 requirements met" in result.output
    _verify(runner, trace)


def test_default_generic_run_is_reproducible(runner, tmp_path):
    trace = tmp_path / "generic.jsonl"
    args = ("generic-run", "--requirements", "3", "--base-steps", "10", "--lambda", "w", "--out", str(trace))
    first = _invoke(runner, *args)
    assert first.exit_code == 0, first.output
    assert "2 rounds, 6 requirements met" in first.output
    written = trace.read_bytes()
    second = _invoke(runner, *args)
    assert second.exit_code == 0, second.output
    assert trace.read_bytes() == written
    _verify(runner, trace)
