import csv
import json
import shutil
import subprocess
from pathlib import Path

import pytest

from hyplab.cli import load_config, main
from hyplab.errors import ConfigError
from hyplab.hyperbolicity import HyperbolicityEstimate
from hyplab.markov import PartitionSequence, TransitionMatrixSequence

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
CAT = {"extension": "periodic", "pattern": [{"kind": "linear", "matrix": [[2, 1], [1, 1]]}], "window": [0, 0]}


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(command, config, out, capsys=None):
    return main([command, "--config", str(config), "--output-dir", str(out)])


def test_analyze_reports_cat_rate(tmp_path):
    assert run("analyze", CONFIGS / "cat_analyze.json", tmp_path) == 0
    doc = json.loads((tmp_path / "analyze.json").read_text())
    assert doc["hyperbolicity"]["lambda"] == pytest.approx(0.381966, abs=1e-6)
    assert HyperbolicityEstimate.from_dict(doc["hyperbolicity"]).to_dict() == doc["hyperbolicity"]


def test_shadow_run(tmp_path):
    assert run("shadow", CONFIGS / "cat_shadow.json", tmp_path) == 0
    doc = json.loads((tmp_path / "shadow.json").read_text())
    assert doc["max_error"] < doc["params"]["beta"]
    with open(tmp_path / "shadow_steps.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 41 and max(float(r["error"]) for r in rows) == doc["max_error"]


@pytest.mark.parametrize("name, files", [
    ("cat_bracket.json", ["bracket.json"]),
    ("perturbed_manifold.json", ["manifold.csv"]),
    ("shear_analyze.json", ["analyze.json"]),
    ("cat_markov_eigen.json", ["partition.json", "partition_level0.svg", "partition_level1.svg", "markov_report.json"]),
    ("cat_code_eigen.json", ["transitions.json"]),
])
def test_shipped_configs_run(tmp_path, name, files):
    command = json.loads((CONFIGS / name).read_text())["command"]
    assert run(command, CONFIGS / name, tmp_path) == 0
    for f in files:
        assert (tmp_path / f).stat().st_size > 0


def test_markov_outputs_parse(tmp_path):
    run("markov", CONFIGS / "cat_markov_eigen.json", tmp_path)
    part = PartitionSequence.from_json((tmp_path / "partition.json").read_text())
    assert part.max_cardinality == 2
    assert json.loads((tmp_path / "markov_report.json").read_text())["markov"]["passed"]
    run("code", CONFIGS / "cat_code_eigen.json", tmp_path)
    tm = TransitionMatrixSequence.from_dict(json.loads((tmp_path / "transitions.json").read_text()))
    assert tm.nondegenerate()


def test_reruns_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("shadow", CONFIGS / "cat_shadow.json", out) == 0
        assert run("markov", CONFIGS / "cat_markov_eigen.json", out) == 0
    for f in sorted(p.name for p in a.iterdir()):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_malformed_matrix_exits_2(tmp_path, capsys):
    bad = {**CAT, "pattern": [{"kind": "linear", "matrix": [[2, 1], [1, 1], [0, 0]]}]}
    cfg = write(tmp_path, {"command": "analyze", "family": bad})
    assert run("analyze", cfg, tmp_path) == 2
    assert "family.pattern[0].matrix" in capsys.readouterr().err
    assert not (tmp_path / "analyze.json").exists()


def test_bad_json_reports_position(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"command": "analyze",\n "family": }')
    assert run("analyze", cfg, tmp_path) == 2
    assert "line 2" in capsys.readouterr().err


def test_command_mismatch_exits_2(tmp_path):
    assert run("bracket", CONFIGS / "cat_analyze.json", tmp_path) == 2


def test_missing_pseudo_orbit_file(tmp_path):
    cfg = write(tmp_path, {"command": "shadow", "family": CAT, "params": {"pseudo_orbit": "nope.csv"}})
    assert run("shadow", cfg, tmp_path) == 2


def test_unknown_and_invalid_params():
    with pytest.raises(ConfigError, match="params.colour"):
        load_config(json.dumps({"command": "analyze", "family": CAT, "params": {"colour": 1}}))
    with pytest.raises(ConfigError, match="params.beta"):
        load_config(json.dumps({"command": "shadow", "family": CAT, "params": {"beta": -1}}))
    with pytest.raises(ConfigError, match="params.p"):
        load_config(json.dumps({"command": "bracket", "family": CAT, "params": {"q": [0, 0]}}))


def test_bowen_markov_reports_budget(tmp_path, capsys):
    assert run("markov", CONFIGS / "cat_markov.json", tmp_path) == 3
    assert "BudgetExceeded" in capsys.readouterr().err


def test_console_script(tmp_path):
    exe = shutil.which("hyplab")
    if exe is None:
        pytest.skip("console script not installed")
    proc = subprocess.run([exe, "analyze", "--config", str(CONFIGS / "cat_analyze.json"), "--output-dir", str(tmp_path)], capture_output=True)
    assert proc.returncode == 0
    assert (tmp_path / "analyze.json").exists()
