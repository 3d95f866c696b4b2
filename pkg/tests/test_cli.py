import json
import subprocess
import sys

import jsonschema
import pytest

from towerforge.cli import load_schema, main

EVERY_COMMAND = [
    ["gov", "--field", "10", "--primes", "3"],
    ["gov", "--field", "Q", "--primes", "3", "--T", "5"],
    ["frob", "--field", "Q", "--split-at", "5", "--primes", "13,29,5"],
    ["gras", "--field", "Q", "--ramified", "5"],
    ["gras", "--field", "10", "--ramified", "17", "--split-at", "3"],
    ["eliminate", "--field", "Q", "--split-at", "5"],
    ["run", "--field", "Q", "--split-at", "3,5"],
    ["classgroup", "--field", "-23"],
    ["classgroup", "--field", "10", "--primes", "3"],
    ["unit", "--field", "10"],
    ["kuroda", "--field", "5,2"],
    ["chevalley", "--field", "10", "--kummer", "2"],
    ["cs-check", "--field", "10", "--split-at", "3"],
    ["seq-check", "--T", "5", "--split-at", "3"],
    ["diagnose", "--d", "5", "--r", "6"],
    ["diagnose", "--field", "10", "--target", "C2"],
    ["select-tame", "--field", "Q", "--n", "1"],
]


def run_json(argv, capsys):
    code = main(argv + ["--format", "json", "--threads", "1"])
    out = capsys.readouterr().out
    return code, json.loads(out), out


@pytest.mark.parametrize("argv", EVERY_COMMAND, ids=lambda a: " ".join(a))
def test_json_validates_and_round_trips(argv, capsys):
    code, doc, text = run_json(argv, capsys)
    assert code == 0
    jsonschema.validate(doc, load_schema())
    assert doc["schema_version"] == "1.0"
    assert json.loads(json.dumps(doc)) == doc


def test_gras_text_output(capsys):
    assert main(["gras", "--field", "Q", "--ramified", "5"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "exists: Q(√(5))"


def test_diagnose_flags_infinite_tower(capsys):
    code, doc, _ = run_json(["diagnose", "--d", "5", "--r", "6"], capsys)
    assert doc["result"]["gs"]["infinite_tower_flag"] is True


def test_run_q10_report(capsys):
    argv = ["run", "--field", "10", "--split-at", "3", "--target", "C2", "--bound", "20000"]
    code, doc, text = run_json(argv, capsys)
    assert code == 0
    res = doc["result"]
    assert res["m"] == 1
    assert res["steps"][0]["q"] == 241
    _, _, again = run_json(argv, capsys)
    assert again == text


def test_hypothesis_refusal_exit_code(capsys):
    code = main(["run", "--field", "-5", "--split-at", "3", "--target", "C2"])
    assert code == 2
    assert "A_K = 0 < h1 = 1" in capsys.readouterr().err


def test_search_failure_exit_code(capsys):
    code = main(["eliminate", "--field", "Q", "--split-at", "3,5,7,11,13", "--bound", "30",
                 "--format", "json"])
    assert code == 3
    payload = json.loads(capsys.readouterr().out)
    assert payload["error"] == "SearchFailure"


def test_domain_error_exit_code(capsys):
    assert main(["gras", "--field", "Q", "--ramified", "4"]) == 1


def test_usage_errors_exit_nonzero():
    with pytest.raises(SystemExit) as ei:
        main(["frob", "--primes", "x"])
    assert ei.value.code == 1
    with pytest.raises(SystemExit) as ei:
        main([])
    assert ei.value.code == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "towerforge.cli", "gras", "--field", "Q",
                           "--ramified", "3"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("does not exist")


def test_max_disc_env(monkeypatch, capsys):
    monkeypatch.setenv("TOWERFORGE_MAX_DISC", "10")
    assert main(["classgroup", "--field", "-23"]) == 3
