from __future__ import annotations

import csv
import io
import json
import math
import shutil
import subprocess

import jsonschema
import pytest

from ougauss import schemas
from ougauss.cli import RunConfig, load_config, main
from oracles import GOLDEN_P1_00


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_kernel_golden(capsys):
    code, out, _ = run(capsys, "kernel", "--n", "1", "--t", "1", "--x", "0", "--y", "0")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.KERNEL)
    assert doc["results"][0]["value"] == pytest.approx(GOLDEN_P1_00, rel=1e-8)


def test_transform_const(capsys):
    code, out, _ = run(capsys, "transform", "--f", "CONST:1", "--t", "2", "--x", "0.3")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.TRANSFORM)
    assert doc["value"] == pytest.approx(1.0, abs=1e-6)


def test_certify_zero_samples(capsys):
    code, out, err = run(capsys, "certify", "--bound", "LEMMA31", "--samples", "0")
    assert code == 2 and out == ""
    e = json.loads(err)
    jsonschema.validate(e, schemas.ERROR)
    assert e["error"] == "validation"


def test_convergence_failure_exit_3(capsys):
    code, _, err = run(capsys, "kernel", "--t", "1", "--x", "0", "--y", "0", "--rel-tol", "1e-13",
                       "--abs-tol", "1e-15", "--max-subdivisions", "1")
    assert code == 3
    e = json.loads(err)
    jsonschema.validate(e, schemas.ERROR)
    assert e["error"] == "convergence" and e["estimate"][0] == pytest.approx(GOLDEN_P1_00, rel=1e-6)


@pytest.mark.parametrize("argv", [
    ["nonsense"],
    ["kernel", "--bogus", "1"],
    ["kernel", "--n", "2", "--x", "0"],
    ["kernel", "--t", "1e-8", "--x", "0", "--y", "0"],
    ["transform", "--f", "EXP_GAUSS:1", "--t", "1", "--x", "0"],
    ["transform", "--f", "NOPE:1"],
    ["seminorm", "--f", "LOG_ALPHA:0.5", "--alpha", "1.5"],
    ["certify", "--format", "csv", "--samples", "100"],
    ["kernel", "--threads", "0"],
    [],
])
def test_validation_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert json.loads(err)["error"] == "validation"


def test_kernel_csv(capsys):
    code, out, _ = run(capsys, "kernel", "--n", "2", "--t", "0.5", "1", "--x", "0.1", "0.2", "--y", "0.3", "-0.1",
                       "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "x1", "x2", "y1", "y2", "value"]
    assert len(rows) == 3 and float(rows[2][0]) == 1.0


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "kernel", "t": [2.0], "x": [0.5], "y": [0.5], "part": "dt"}))
    code, out, _ = run(capsys, "--config", str(cfg), "--t", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["part"] == "dt" and doc["results"][0]["t"] == 1.0


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "kernel", "colour": "blue"}))
    code, _, err = run(capsys, "--config", str(cfg))
    assert code == 2 and "colour" in json.loads(err)["message"]


def test_config_keys_mirror_fields(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "certify", "samples": 200, "bound": "LEMMA32A", "c": 0.1,
                               "threads": 2}))
    rc = load_config(["--config", str(cfg)])
    assert isinstance(rc, RunConfig) and rc.samples == 200 and rc.c == 0.1 and rc.threads == 2


def test_threads_env(monkeypatch):
    monkeypatch.setenv("OUGAUSS_THREADS", "3")
    assert load_config(["catalog"]).threads == 3
    assert load_config(["catalog", "--threads", "1"]).threads == 1


def test_certificate_byte_identical_across_threads(tmp_path):
    paths = []
    for th in ("1", "4"):
        p = tmp_path / f"cert{th}.json"
        assert main(["certify", "--bound", "PROP21", "--samples", "1000", "--threads", th, "--output", str(p)]) == 0
        paths.append(p.read_bytes())
    assert paths[0] == paths[1]
    doc = json.loads(paths[0])
    jsonschema.validate(doc, schemas.CERTIFICATE)


def test_seminorm_and_trace(tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "seminorm", "--f", "LOG_ALPHA:0.5", "--alpha", "0.5", "--t-points", "7",
                       "--x-points-per-axis", "7", "--trace", str(trace))
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.SEMINORM)
    rows = list(csv.reader(trace.open()))
    assert rows[0] == ["t", "x1", "objective"] and len(rows) == 50
    assert max(float(r[2]) for r in rows[1:]) == doc["value"]


def test_holder_seminorm(capsys):
    code, out, _ = run(capsys, "seminorm", "--f", "SINE:1", "--estimator", "holder", "--n-pairs", "512")
    assert code == 0
    jsonschema.validate(json.loads(out), schemas.SEMINORM)


def test_equivalence_and_catalog_schemas(capsys):
    code, out, _ = run(capsys, "equivalence", "--f", "COORD:1", "--t-points", "7", "--x-points-per-axis", "7",
                       "--n-pairs", "256")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, schemas.EQUIVALENCE)
    assert doc["doubling"]["A_divergent"] and doc["doubling"]["K_divergent"]
    code, out, _ = run(capsys, "catalog")
    jsonschema.validate(json.loads(out), schemas.CATALOG)


def test_json_is_canonical(capsys):
    _, a, _ = run(capsys, "kernel", "--t", "0.7", "--x", "0.2", "--y", "-0.4")
    _, b, _ = run(capsys, "kernel", "--y", "-0.4", "--x", "0.2", "--t", "0.7")
    assert a == b
    assert a == json.dumps(json.loads(a), sort_keys=True, indent=2) + "\n"


def test_every_schema_is_valid():
    for s in (*schemas.BY_COMMAND.values(), schemas.ERROR):
        jsonschema.Draft202012Validator.check_schema(s)


@pytest.mark.skipif(shutil.which("ougauss") is None, reason="console script not installed")
def test_console_script():
    p = subprocess.run(["ougauss", "kernel", "--t", "1", "--x", "0", "--y", "0"], capture_output=True, text=True)
    assert p.returncode == 0
    assert math.isclose(json.loads(p.stdout)["results"][0]["value"], GOLDEN_P1_00, rel_tol=1e-8)
    p = subprocess.run(["ougauss", "certify", "--bound", "LEMMA31", "--samples", "0"], capture_output=True, text=True)
    assert p.returncode == 2
