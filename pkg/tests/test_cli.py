import csv
import hashlib
import json
import subprocess
import sys

import numpy as np
import pytest

from singpoints import cli
from singpoints.linalg import matrix_to_json


def run(tmp_path, *argv):
    return cli.main([str(a) for a in argv])


def _manifest(path):
    return json.loads((path.parent / (path.name + ".manifest.json")).read_text())


def test_sample_spherical_jsonl(tmp_path):
    out = tmp_path / "s.jsonl"
    assert run(tmp_path, "sample", "--family", "spherical", "--n", 3, "--trials", 100, "--seed", 7, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 100
    for line in lines:
        obj = json.loads(line)
        assert len(obj["points"]) + obj["infinity_count"] == 3 and obj["seed"] == 7
    man = _manifest(out)
    data = out.read_bytes()
    assert man["outputs"][0]["sha1"] == hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()
    assert man["flags"]["family"] == "spherical" and man["flags"]["seed"] == 7
    assert "version" in man and "timestamp" in man and man["config"]["seed"] == 7


def test_sample_truncated_csv_and_gnuplot(tmp_path):
    out = tmp_path / "t.csv"
    rc = run(tmp_path, "sample", "--family", "truncated", "--N", 32, "--n", 1, "--trials", 5, "--seed", 3,
             "--format", "csv", "--out", out, "--gnuplot")
    assert rc == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["trial", "index", "re", "im"]
    assert len(rows) == 5 * 32
    z = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
    assert np.all(np.abs(z) <= 1 + 1e-8)
    trip = np.loadtxt(tmp_path / "t.csv.gnuplot.dat")
    assert trip.shape == (160, 3) and np.allclose(trip[:, 2], 1 / 5)


def test_sample_byte_identical_rerun(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        assert run(tmp_path, "sample", "--family", "ginibre", "--n", 4, "--trials", 20, "--seed", 11, "--out", out) == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.jsonl"
    run(tmp_path, "sample", "--family", "ginibre", "--n", 4, "--trials", 20, "--seed", 11, "--threads", 3, "--out", c)
    assert c.read_bytes() == a.read_bytes()


def test_sample_hyperbolic(tmp_path):
    out = tmp_path / "h.jsonl"
    assert run(tmp_path, "sample", "--family", "hyperbolic", "--n", 1, "--radius", 0.5, "--trials", 3, "--out", out) == 0
    obj = json.loads(out.read_text().splitlines()[0])
    assert obj["family"] == "hyperbolic-det-gaf" and obj["params"]["radius"] == 0.5


@pytest.mark.parametrize(
    "argv",
    [
        ["sample", "--family", "toroidal", "--n", 2],
        ["sample", "--family", "truncated", "--n", 2],
        ["sample", "--family", "planar", "--n", 0],
        ["verify", "--suite", "unknown"],
        ["verify"],
        ["bogus"],
    ],
)
def test_invalid_arguments_exit_2(tmp_path, argv):
    assert run(tmp_path, *argv, "--out", tmp_path / "x") == 2 if argv[0] != "bogus" else run(tmp_path, *argv) == 2


def test_io_failure_exit_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    out = blocker / "sub" / "s.jsonl"
    assert run(tmp_path, "sample", "--family", "planar", "--n", 2, "--out", out) == 3
    assert run(tmp_path, "coeffs", "--matrix", tmp_path / "missing.json", "--out", tmp_path / "c.json") == 3


def test_verify_oracle(tmp_path):
    out = tmp_path / "r.json"
    assert run(tmp_path, "verify", "--suite", "oracle-lemma41", "--seed", 1, "--trials", 20, "--out", out) == 0
    reps = json.loads(out.read_text())
    assert reps[0]["passed"] and reps[0]["statistic"] <= 1e-9


def test_verify_f0_moment(tmp_path):
    out = tmp_path / "r.json"
    rc = run(tmp_path, "verify", "--suite", "f0-moment", "--N", 16, "--n", 2, "--trials", 10000, "--seed", 1, "--out", out)
    rep = json.loads(out.read_text())[0]
    assert rep["predicted"] == pytest.approx(0.006536, abs=5e-7)
    assert rc == (0 if rep["passed"] else 1)


def test_verify_failure_exit_1(tmp_path):
    cfgfile = tmp_path / "strict.cfg"
    cfgfile.write_text("sigma = 0.0\n")
    out = tmp_path / "r.json"
    rc = run(tmp_path, "verify", "--suite", "ginibre-intensity", "--n", 3, "--radius", 1.0, "--trials", 1000,
             "--config", cfgfile, "--out", out)
    assert rc == 1
    assert json.loads(out.read_text())[0]["passed"] is False


def test_verify_mobius_suite(tmp_path):
    out = tmp_path / "m.json"
    assert run(tmp_path, "verify", "--suite", "mobius-identities", "--trials", 100, "--out", out) == 0
    assert len(json.loads(out.read_text())) == 4


def test_coeffs_scalar(tmp_path):
    m = tmp_path / "v.json"
    m.write_text(json.dumps(matrix_to_json(np.array([[0.5]]))))
    out = tmp_path / "c.json"
    assert run(tmp_path, "coeffs", "--matrix", m, "--kmax", 1, "--out", out) == 0
    res = json.loads(out.read_text())
    for route in ("cycle_sum", "series_division"):
        assert res[route]["re"][0] == pytest.approx(0.5)
        assert res[route]["re"][1] == pytest.approx(0.75)
    assert res["max_rel_discrepancy"] <= 1e-12


def test_coeffs_sampled(tmp_path):
    out = tmp_path / "c.json"
    assert run(tmp_path, "coeffs", "--N", 5, "--n", 1, "--kmax", 8, "--seed", 4, "--out", out) == 0
    res = json.loads(out.read_text())
    V = np.array(res["matrix"]["re"]) + 1j * np.array(res["matrix"]["im"])
    det = np.linalg.det(V.reshape(5, 5))
    assert complex(res["cycle_sum"]["re"][0], res["cycle_sum"]["im"][0]) == pytest.approx(det, rel=1e-10)
    assert res["max_rel_discrepancy"] <= 1e-9


def test_coeffs_nested_list_matrix(tmp_path):
    m = tmp_path / "v.json"
    m.write_text(json.dumps([[0.5, 0.1], [0.0, 0.3]]))
    assert run(tmp_path, "coeffs", "--matrix", m, "--kmax", 3, "--out", tmp_path / "c.json") == 0


def test_coeffs_singular_exit_4(tmp_path):
    m = tmp_path / "v.json"
    m.write_text(json.dumps(matrix_to_json(np.array([[1.0, 2.0], [2.0, 4.0]]))))
    assert run(tmp_path, "coeffs", "--matrix", m, "--out", tmp_path / "c.json") == 4


def test_convergence_command_small(tmp_path):
    out = tmp_path / "conv.json"
    rc = run(tmp_path, "convergence", "--N", 64, "--n", 1, "--kmax", 2, "--trials", 1000, "--seed", 2, "--out", out)
    reps = json.loads(out.read_text())
    assert len(reps) == 3 and rc == (0 if all(r["passed"] for r in reps) else 1)
    table = json.loads((tmp_path / "conv.json.table.json").read_text())
    assert len(table["labels"]) == len(table["stderr"])
    assert len(_manifest(out)["outputs"]) == 2


def test_invariance_command(tmp_path):
    out = tmp_path / "inv.json"
    rc = run(tmp_path, "invariance", "--family", "spherical", "--n", 2, "--trials", 1000, "--seed", 3, "--out", out)
    assert rc == 0


def test_module_entry_point(tmp_path):
    p = subprocess.run([sys.executable, "-m", "singpoints", "verify", "--suite", "unknown", "--out", str(tmp_path / "x")],
                       capture_output=True, text=True)
    assert p.returncode == 2 and "unknown suite" in p.stderr
