import json

import pytest

from limiar import __version__
from limiar.cli import EXIT_CONFIG, EXIT_OK, EXIT_PRECONDITION, main

BASE = {
    "model": {"degrees": {"counts": {"1": 400, "3": 600}}},
    "states": {"n_I": 2},
    "rates": {"beta": 1.0, "rho": 0.1},
    "experiment": {"engine": "pairing", "reps": 5, "m_grid": [1, 2, 5]},
    "rng": {"seed": 7},
}

SUBCRITICAL = {**BASE, "model": {"degrees": {"counts": {"2": 100}}}, "rates": {"rho": 1.0}}


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_predict(tmp_path, capsys):
    out = tmp_path / "predict.json"
    code = main(["predict", "--config", write_config(tmp_path, BASE), "--out", str(out)])
    assert code == EXIT_OK
    assert "alpha" in capsys.readouterr().out
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["alpha"] > 0
    assert report["spec"]["master_seed"] == 7


def test_config_errors(tmp_path):
    bad = {**BASE, "extra": 1}
    assert main(["predict", "--config", write_config(tmp_path, bad)]) == EXIT_CONFIG
    assert main(["predict", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    path = write_config(tmp_path, BASE)
    assert main(["predict", "--config", path, "--seed", "-1"]) == EXIT_CONFIG
    assert main(["simulate", "--config", path, "--reps", "0"]) == EXIT_CONFIG


def test_bad_arguments_exit_through_argparse(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["predict"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


def test_version_string(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
    assert __version__ in capsys.readouterr().out


def test_subcritical_predict(tmp_path):
    path = write_config(tmp_path, SUBCRITICAL)
    assert main(["predict", "--config", path]) == EXIT_PRECONDITION


def test_failing_validate(tmp_path, capsys):
    path = write_config(tmp_path, SUBCRITICAL)
    assert main(["validate", "--config", path]) == EXIT_PRECONDITION
    assert "FAIL" in capsys.readouterr().out
    assert main(["validate", "--config", write_config(tmp_path, BASE, "ok.json")]) == EXIT_OK


def test_simulate_output_independent_of_threads(tmp_path):
    path = write_config(tmp_path, BASE)
    one, three = tmp_path / "one.json", tmp_path / "three.json"
    assert main(["simulate", "--config", path, "--threads", "1", "--out", str(one)]) == EXIT_OK
    assert main(["simulate", "--config", path, "--threads", "3", "--out", str(three)]) == EXIT_OK
    assert one.read_bytes() == three.read_bytes()
    result = json.loads(one.read_text(encoding="utf-8"))
    assert result["completed"] == 5
    assert len(result["replicas"]) == 5


def test_seed_override_changes_results(tmp_path):
    path = write_config(tmp_path, BASE)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["simulate", "--config", path, "--out", str(a), "--format", "csv", "--reps", "20"])
    main(["simulate", "--config", path, "--out", str(b), "--format", "csv", "--reps", "20", "--seed", "8"])
    assert a.read_bytes() != b.read_bytes()


def test_sellke_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    code = main(["sellke-sweep", "--config", write_config(tmp_path, BASE), "--out", str(out)])
    assert code == EXIT_OK
    raw = out.read_bytes()
    assert raw.startswith(b"realisation_id,m,X_I0,Z\r\n")
    assert raw.count(b"\r\n") == 4


def test_sellke_sweep_seed_count_beyond_n_is_a_config_error(tmp_path):
    doc = {**BASE, "experiment": {**BASE["experiment"], "m_grid": [1, 5000]}}
    assert main(["sellke-sweep", "--config", write_config(tmp_path, doc)]) == EXIT_CONFIG


def test_giant_json(tmp_path):
    doc = {**BASE, "experiment": {"reps": 3}}
    out = tmp_path / "giant.json"
    assert main(["giant", "--config", write_config(tmp_path, doc), "--out", str(out)]) == EXIT_OK
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["reps"] == 3


def test_survival_curve_needs_targets(tmp_path):
    assert main(["survival-curve", "--config", write_config(tmp_path, BASE)]) == EXIT_CONFIG
