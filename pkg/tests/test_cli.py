import json
import subprocess
import sys

import numpy as np
import pytest

from distsecret.cli import main
from distsecret.source import from_arrays, pairwise_key_source


@pytest.fixture
def pairwise_file(tmp_path):
    path = tmp_path / "pairwise.json"
    pairwise_key_source(4, 2).save(path)
    return path


def run(capsys, *argv):
    rc = main([str(a) for a in argv])
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_region_outer(capsys, pairwise_file):
    rc, out, _ = run(capsys, "region", "--source", pairwise_file, "--access", "thr:4:3:1", "--bound", "outer")
    assert rc == 0
    doc = json.loads(out)
    assert [r["bound_bits"] for r in doc["facets"]] == [2.0, 2.0, 4.0]


def test_region_csv(capsys):
    rc, out, _ = run(capsys, "region", "--access", "thr:4:3:1", "--bound", "thr-cap", "--dealers", "2",
                     "--format", "csv")
    assert rc == 0
    assert out.splitlines()[0] == "bound_bits,subset"
    assert out.splitlines()[3] == "4.0,1 2"


def test_region_inner_reports_aux(capsys, pairwise_file):
    rc, out, _ = run(capsys, "region", "--source", pairwise_file, "--access", "thr:4:3:1", "--bound", "inner")
    doc = json.loads(out)
    assert rc == 0 and doc["empty"] is False
    assert [a["lower"] for a in doc["auxiliary"]] == [1.0, 1.0, 2.0]


def test_share_and_reconstruct(capsys, tmp_path):
    path = tmp_path / "t.json"
    rc, _, _ = run(capsys, "threshold", "share", "--L", 4, "--t", 3, "--z", 1, "--D", 2, "--m", 2,
                   "--blocks", 2, "--seed", 5, "--out", path)
    assert rc == 0
    assert json.loads(path.read_text())["points"] == [1, 2, 3, 4]
    rc, out, _ = run(capsys, "threshold", "reconstruct", "--in", path, "--participants", "1,3,4")
    assert rc == 0 and json.loads(out)["match"] is True
    rc, _, err = run(capsys, "threshold", "reconstruct", "--in", path, "--participants", "1,3")
    assert rc == 2 and "threshold" in err


def test_bad_field_size_exit_code(capsys):
    rc, _, _ = run(capsys, "threshold", "share", "--L", 9, "--t", 3, "--z", 1, "--D", 1, "--m", 3, "--seed", 1)
    assert rc == 2


def test_guard_exit_code(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    src = tmp_path / "src.json"
    from_arrays(np.full((2, 2), 0.25), 1).save(src)
    spec.write_text(json.dumps({"scheme": "random-binning", "seed": 1, "source": "src.json", "access": "aon",
                                "params": {"n": 40}, "rates": [0.1], "aux_rates": [0.5]}))
    rc, _, err = run(capsys, "verify", "--spec", spec)
    assert rc == 3 and "limit" in err


def test_verify_and_simulate(capsys, tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"scheme": "threshold-ramp", "seed": 3, "L": 3, "t": 2, "z": 1, "m": 2}))
    rc, out, _ = run(capsys, "verify", "--spec", spec)
    doc = json.loads(out)
    assert rc == 0 and all(r["bits"] == 0.0 for r in doc["leakage"])
    rc, out, _ = run(capsys, "simulate", "--spec", spec, "--trials", 20, "--seed", 1)
    assert rc == 0 and json.loads(out)["trials"] == 20


def test_transcript_written(capsys, tmp_path):
    src = tmp_path / "src.json"
    from_arrays(np.array([[0.4, 0.1], [0.1, 0.4]]), 1).save(src)
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"scheme": "random-binning", "seed": 1, "source": "src.json", "access": "aon",
                                "params": {"n": 4}, "rates": [0.25], "aux_rates": [0.85]}))
    rc, _, _ = run(capsys, "simulate", "--spec", spec, "--trials", 5, "--seed", 2, "--transcript",
                   tmp_path / "tr.json")
    doc = json.loads((tmp_path / "tr.json").read_text())
    assert rc == 0 and doc["sample_seed"] == "0000000000000002"


def test_hash_command(capsys):
    rc, out, _ = run(capsys, "hash", "--bits", "101100", "--r", 3, "--seed", 0)
    doc = json.loads(out)
    assert rc == 0 and len(doc["output"]) == 3 and len(doc["seed_bits"]) == 8
    rc, _, _ = run(capsys, "hash", "--bits", "10a", "--r", 3, "--seed", 0)
    assert rc == 2


def test_source_validate(capsys, pairwise_file, tmp_path):
    rc, out, _ = run(capsys, "source", "validate", "--source", pairwise_file, "--access", "thr:4:3:1")
    doc = json.loads(out)
    assert rc == 0 and doc["access"]["minimal_authorized"][0] == [1, 2, 3]
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc, _, _ = run(capsys, "source", "validate", "--source", bad)
    assert rc == 2


def test_console_script_runs():
    res = subprocess.run([sys.executable, "-m", "distsecret.cli", "region", "--access", "thr:3:2:1",
                          "--bound", "thr-cap", "--dealers", "1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["corner"] == [1.0]
