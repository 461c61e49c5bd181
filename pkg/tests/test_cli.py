import csv
import io
import json
import os
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

from gaugecert.cli import main

SCHEMAS = Path(__file__).resolve().parents[1] / "docs" / "schemas"


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_certify_quadratic(capsys):
    code, out, _ = run(capsys, "certify", "--function", "quadratic",
                       "--domain", "-1,1", "--resolution", "201")
    assert code == 0
    rep = json.loads(out)
    jsonschema.validate(rep, schema("certify"))
    assert rep["verdict"] == "certified-convex"
    assert rep["envelope_gap"] <= 1e-3


def test_certify_neg_abs_witness(capsys):
    code, out, _ = run(capsys, "certify", "--function", "neg_abs", "--domain", "-1,1")
    assert code == 1
    rep = json.loads(out)
    jsonschema.validate(rep, schema("certify"))
    assert rep["verdict"] == "nonconvex-witnessed"
    pair = rep["worst_pair"]
    assert pair["value"] <= -3.9
    assert pair["x1"][0] * pair["x2"][0] < 0


def test_certify_expression_and_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"expr": "max(x, 2*x)", "domain": "-1,1",
                               "resolution": 101, "lambda_schedule": [0.1, 0.01]}))
    code, out, _ = run(capsys, "certify", "--config", str(cfg))
    assert code == 0
    assert json.loads(out)["function"] == "max(x, 2*x)"
    # a flag overrides the file
    code, out, _ = run(capsys, "certify", "--config", str(cfg), "--expr", "-abs(x)")
    assert code == 1


def test_certify_deterministic(tmp_path):
    outs = []
    for i in range(3):
        path = tmp_path / f"r{i}.json"
        assert main(["certify", "--function", "cube", "--seed", "7",
                     "--out", str(path)]) == 1
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_minty_examples(capsys):
    code, out, _ = run(capsys, "minty", "--function", "abs", "--domain", "-2,2",
                       "--x0", "0", "--x0star", "0.5")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("minty"))
    assert code == 0 and rep["related"] and rep["fenchel_member"]
    code, out, _ = run(capsys, "minty", "--function", "abs", "--x0", "0",
                       "--x0star", "1.5")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("minty"))
    assert code == 1 and not rep["related"] and rep["witness"]["x"][0] > 0


def test_minty_outside_domain_flagged(capsys):
    code, out, _ = run(capsys, "minty", "--function", "indicator_box",
                       "--x0", "0.9", "--x0star", "0")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("minty"))
    assert rep["fenchel_member"] is None and rep["notes"]


def test_barrier_ray_csv(capsys):
    code, out, _ = run(capsys, "barrier", "--body", "ball:1", "--ray", "1,0",
                       "--steps", "50")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 51
    assert float(rows[0]["k"]) == 0.0
    assert float(rows[-1]["mu"]) >= 0.98 and float(rows[-1]["k"]) >= 49


def test_barrier_json_body(capsys):
    body = json.dumps({"type": "polytope", "normals": [[0.5], [-1.0]]})
    code, out, _ = run(capsys, "barrier", "--body", body, "--ray", "-1", "--steps", "3")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(rows[-1]["x1"]) == pytest.approx(-0.75)


def test_ekeland_localisation(capsys):
    code, out, _ = run(capsys, "ekeland", "--function", "quadratic", "--start", "0.3",
                       "--eps", "0.1", "--lambda", "0.05")
    rep = json.loads(out)
    jsonschema.validate(rep, schema("ekeland"))
    assert code == 0 and abs(rep["y"][0] - 0.3) <= 0.05


def test_ekeland_precondition_is_config_error(capsys):
    code, _, err = run(capsys, "ekeland", "--function", "quadratic", "--start", "0.9",
                       "--eps", "0.1")
    assert code == 64 and "eps-minimiser" in err


def test_trace_outputs(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "trace", "--function", "step", "--nmax", "8",
                       "--resolution", "101", "--csv", str(path))
    rep = json.loads(out)
    jsonschema.validate(rep, schema("trace"))
    assert code == 0 and rep["converged"] and rep["steps"] == 8
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 8 and "pairing" in rows[0]


def test_graph_csv(capsys):
    code, out, _ = run(capsys, "graph", "--function", "quadratic", "--resolution", "21",
                       "--lambda", "0.01", "--tilts", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 21
    assert set(rows[0]) == {"x1", "xstar1", "fx"}


@pytest.mark.parametrize("argv,needle", [
    (["certify", "--function", "nope"], "unknown function"),
    (["certify", "--expr", "x +* 2"], "malformed expression"),
    (["certify", "--expr", "exp(x)"], "unsupported"),
    (["certify", "--function", "abs", "--dim", "5"], "dimension"),
    (["certify", "--function", "abs", "--resolution", "1"], "resolution"),
    (["certify", "--function", "abs", "--tol", "-1"], "tol"),
    (["barrier", "--ray", "1"], "--body"),
    (["certify", "--config", "/nonexistent.json"], "cannot read config"),
])
def test_config_errors_exit_64(capsys, argv, needle):
    code, out, err = run(capsys, *argv)
    assert code == 64
    assert needle in err
    assert len(err.strip().splitlines()) == 1


def test_bad_flag_exits_64(capsys):
    with pytest.raises(SystemExit) as info:
        main(["certify", "--bogus"])
    assert info.value.code == 64


def test_module_entry_point_and_logging():
    env = dict(os.environ, GAUGE_CERTIFY_LOG="info")
    proc = subprocess.run([sys.executable, "-m", "gaugecert", "certify", "--function",
                           "abs", "--resolution", "51"], capture_output=True,
                          text=True, env=env)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["verdict"] == "certified-convex"
    assert "INFO" in proc.stderr
