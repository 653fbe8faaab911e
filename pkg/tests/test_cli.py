import json

import pytest

import settings_store
from cli import CliError, EXIT_OK, EXIT_REJECTED, EXIT_UNKNOWN, EXIT_USAGE, dispatch, parse_complex
from report_io import load_jsonl


@pytest.fixture(autouse=True)
def _isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    for var in list(settings_store.ENV_KEYS) + [settings_store.CONFIG_ENV]:
        monkeypatch.delenv(var, raising=False)


def _run(capsys, argv):
    code = dispatch(argv)
    out = capsys.readouterr().out
    records = [json.loads(line) for line in out.splitlines() if line.strip()]
    return code, records


def test_corollary_rejection_exit_code(capsys):
    code, records = _run(capsys, ["check", "corollary", "--n", "11", "--a0", "1", "--a1", "1", "--a2", "1"])
    assert code == EXIT_REJECTED
    rec = records[-1]
    assert rec["command"] == "check corollary"
    assert rec["ok"] is False
    assert rec["verdict"] == "rejected"
    assert rec["failing_condition"] == "power-condition"
    assert rec["exit_code"] == EXIT_REJECTED
    assert rec["a"] == ["1", "1", "1"]


def test_corollary_accepts_complex_and_ball_coefficients(capsys):
    code, records = _run(capsys, ["check", "corollary", "--n", "11", "--a0", "2", "--a1", "3i", "--a2", "(5,1)"])
    assert code == EXIT_OK
    rec = records[-1]
    assert rec["ok"] is True
    assert rec["a"][0] == "2"
    assert len(rec["a"]) == 3

    code, records = _run(capsys, ["check", "corollary", "--n", "11", "--a0", "i", "--a1", "i", "--a2", "2"])
    assert code == EXIT_UNKNOWN
    assert records[-1]["ok"] is False
    assert records[-1]["failing_condition"] == "power-condition"


def test_construct_small_power_sum(capsys):
    code, records = _run(capsys, ["construct", "thm3", "--n", "2", "--seed", "7"])
    assert code == EXIT_OK
    rec = records[-1]
    assert (rec["N"], rec["p"]) == (5, 16)
    assert rec["seed"] == 7
    assert rec["config"]["seed"] == 7


def test_grassmann_scan(capsys):
    code, records = _run(capsys, ["grassmann", "scan", "--m", "4", "--N", "9"])
    assert code == EXIT_OK
    assert records[-1]["uniformly_empty"] is True
    assert records[-1]["cases"] == 16


def test_borel_threshold(capsys):
    code, records = _run(capsys, ["borel", "threshold", "--n", "3", "--deltas", "1,0,2,0", "--p", "20"])
    assert code == EXIT_OK
    assert records[-1]["threshold"] == 11
    assert records[-1]["prefactor_exponent"] == 9


def test_unknown_flag_is_a_usage_error(capsys):
    code = dispatch(["grassmann", "scan", "--m", "4", "--N", "9", "--bogus"])
    captured = capsys.readouterr()
    assert code == EXIT_USAGE
    rec = json.loads(captured.out.splitlines()[-1])
    assert rec["ok"] is False
    assert rec["kind"] == "usage"
    assert "hj: error" in captured.err


def test_domain_error_is_reported(capsys):
    code, records = _run(capsys, ["check", "corollary", "--n", "10", "--a0", "1", "--a1", "2", "--a2", "3"])
    assert code == EXIT_USAGE
    assert records[-1]["ok"] is False
    assert records[-1]["kind"] == "HypersurfaceError"


def test_output_is_deterministic(capsys):
    argv = ["grassmann", "evidence", "--m", "4", "--k", "2", "--blocks", "2,2", "--trials", "2"]
    _, first = _run(capsys, argv)
    _, second = _run(capsys, argv)
    for rec in first + second:
        rec.pop("generated_at", None)
    assert first == second


def test_output_file_and_human_mode(tmp_path, capsys):
    target = tmp_path / "runs" / "scan.jsonl"
    code = dispatch(["grassmann", "scan", "--m", "3", "--N", "5", "--output", str(target)])
    assert code == EXIT_OK
    assert capsys.readouterr().out == ""
    assert load_jsonl(str(target))[-1]["command"] == "grassmann scan"

    dispatch(["borel", "cartan", "--n", "3", "--p", "9", "--human"])
    text = capsys.readouterr().out
    assert "contradiction" in text
    assert "ratio" in text


def test_config_set_then_used(capsys):
    code, records = _run(capsys, ["config", "set", "precision=128", "seed=3"])
    assert code == EXIT_OK
    assert records[-1]["path"] == settings_store.DEFAULT_SETTINGS_PATH
    assert records[-1]["saved"]["precision"] == "128"

    code, records = _run(capsys, ["config", "show"])
    assert code == EXIT_OK
    assert records[-1]["path"] == settings_store.DEFAULT_SETTINGS_PATH
    assert records[-1]["config"]["precision"] == 128
    assert records[-1]["config"]["seed"] == 3

    _, records = _run(capsys, ["config", "show", "--seed", "5"])
    assert records[-1]["config"]["seed"] == 5


def test_config_set_rejects_bad_values(capsys):
    code, records = _run(capsys, ["config", "set", "nodes=3"])
    assert code == EXIT_USAGE
    assert records[-1]["kind"] == "ConfigError"
    code, _ = _run(capsys, ["config", "set", "nodes"])
    assert code == EXIT_USAGE


def test_parse_complex():
    assert parse_complex("i") == 1j
    assert parse_complex("-i") == -1j
    assert parse_complex("2") == 2
    assert parse_complex("0.5+1.2i") == complex(0.5, 1.2)
    with pytest.raises(CliError):
        parse_complex("bad")
