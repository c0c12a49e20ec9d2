import json
import math
import subprocess
import sys

import numpy as np
import pytest

from radial_gate.cli import dump_json, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def assert_error_line(err, code):
    lines = err.strip().splitlines()
    assert len(lines) == 1
    payload = json.loads(lines[0])
    assert payload["exit_code"] == code
    assert set(payload) == {"error", "exit_code", "message"}


def test_classify_2d_m0(capsys):
    code, out, _ = run(capsys, "classify", "--dim", "2", "--m", "0")
    assert code == 0
    d = json.loads(out)
    assert (d["acceptable"], d["unacceptable"], d["q_pattern"]) == ("r^0", "ln kr", "δ⁽²⁾(r)")


def test_classify_3d_l1(capsys):
    code, out, _ = run(capsys, "classify", "--dim", "3", "--l", "1")
    d = json.loads(out)
    assert code == 0
    assert (d["acceptable"], d["unacceptable"], d["q_pattern"]) == ("r^1", "r^-2", "∂_i δ⁽³⁾(r)")


def test_classify_irregular_exit_3(capsys):
    code, out, err = run(capsys, "classify", "--dim", "2", "--m", "0", "--potential", "power:c=1,k=-2")
    assert code == 3 and out == ""
    assert_error_line(err, 3)


@pytest.mark.parametrize("argv", [
    ["classify", "--bogus"],
    ["classify", "--dim", "4"],
    ["classify", "--dim", "3", "--m", "1"],
    ["flux", "--alpha", "-1", "--eps", "0.1"],
    ["verify-anomaly", "--case", "m7"],
    ["classify", "--potential", "well"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert_error_line(err, 2)


def test_verify_log(capsys):
    code, out, _ = run(capsys, "verify-anomaly", "--case", "log")
    d = json.loads(out)
    assert code == 0 and d["pass"]
    ratios = [complex(*r["measured"]).real / complex(*r["predicted"]).real
              for r in d["rows"] if r["predicted"] != [0, 0]]
    assert len(ratios) == 5
    assert all(abs(x - 1) <= 1e-6 for x in ratios)


def test_verify_smooth(capsys):
    code, out, _ = run(capsys, "verify-anomaly", "--case", "smooth", "--m", "2")
    d = json.loads(out)
    assert code == 0
    assert all(abs(complex(*r["measured"])) <= 1e-6 for r in d["rows"])


def test_verify_m2(capsys):
    code, out, _ = run(capsys, "verify-anomaly", "--case", "m2")
    d = json.loads(out)
    assert code == 0 and d["pass"]
    xx = next(r for r in d["rows"] if r["multi_index"] == [2, 0])
    assert complex(*xx["measured"]) == pytest.approx(-math.pi, rel=1e-3)


def test_verify_m3_published_fails_with_exit_9(capsys):
    code, out, err = run(capsys, "verify-anomaly", "--case", "m3", "--reference", "published")
    assert code == 9
    assert not json.loads(out)["pass"]
    assert_error_line(err, 9)


def test_verify_csv(capsys):
    code, out, _ = run(capsys, "verify-anomaly", "--case", "m1", "--format", "csv")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "multi_index,measured_re,measured_im,predicted_re,predicted_im,error"
    assert len(lines) == 11


def test_bad_quadrature_config_exit_2(capsys):
    code, _, err = run(capsys, "verify-anomaly", "--case", "log", "--eps-list", "0.01,0.005")
    assert code == 2
    assert_error_line(err, 2)


def test_well(capsys):
    code, out, _ = run(capsys, "well", "--a", "1", "--m", "0", "--levels", "3")
    d = json.loads(out)
    assert code == 0
    assert d["levels"][0]["energy"] == pytest.approx(2.8916, abs=1e-4)
    assert [lv["n"] for lv in d["levels"]] == [1, 2, 3]


def test_spectrum_matches_well(capsys):
    _, a, _ = run(capsys, "well", "--m", "1", "--levels", "3")
    _, b, _ = run(capsys, "spectrum", "--a", "1", "--m", "1", "--levels", "3")
    ea = [lv["energy"] for lv in json.loads(a)["levels"]]
    eb = [lv["energy"] for lv in json.loads(b)["levels"]]
    assert np.allclose(ea, eb, rtol=1e-10)
    assert max(json.loads(b)["max_residual"]) <= 1e-6


def test_spectrum_csv_level(capsys):
    code, out, _ = run(capsys, "spectrum", "--potential", "power:c=0.5,k=2", "--r-max", "10",
                       "--levels", "2", "--level", "2", "--format", "csv", "--points", "50")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "r,Re R,Im R" and len(lines) == 51
    code, _, err = run(capsys, "spectrum", "--potential", "power:c=0.5,k=2", "--r-max", "10",
                       "--levels", "2", "--level", "3", "--format", "csv")
    assert code == 2


def test_spectrum_needs_r_max(capsys):
    code, _, err = run(capsys, "spectrum", "--potential", "power:c=0.5,k=2")
    assert code == 2
    assert_error_line(err, 2)


def test_fig1(capsys, tmp_path):
    path = tmp_path / "fig1.csv"
    code, out, _ = run(capsys, "fig1", "--points", "500", "--out", str(path))
    assert code == 0 and out == ""
    rows = path.read_text().strip().splitlines()
    assert rows[0] == "x,xY0sq" and len(rows) == 501
    x, v = map(float, rows[-1].split(","))
    assert x == pytest.approx(3.95768, abs=5e-5) and abs(v) < 1e-20


def test_flux(capsys):
    code, out, _ = run(capsys, "flux", "--alpha", "1e-9", "--eps", "0.1")
    d = json.loads(out)
    assert code == 0
    assert d["flux"] == pytest.approx(2 * math.pi, rel=1e-7)


def test_pseudo_y0(capsys):
    code, out, _ = run(capsys, "pseudo-y0")
    d = json.loads(out)
    assert code == 0
    assert d["q_coefficient"] == pytest.approx(4, rel=1e-3)
    assert d["green_defect"] == pytest.approx(4, rel=1e-3)


def test_dump_json_floats():
    assert dump_json({"a": 0.1, "b": [1, 2.5], "c": True}) == \
        '{\n  "a": 0.10000000000000001,\n  "b": [1, 2.5],\n  "c": true\n}'
    assert json.loads(dump_json({"z": complex(1, -2)})) == {"z": [1, -2]}


@pytest.mark.parametrize("argv", [
    ["spectrum", "--potential", "coulomb2d:Z=1", "--r-max", "40", "--levels", "3"],
    ["verify-anomaly", "--case", "m2"],
    ["fig1", "--points", "100"],
])
def test_byte_determinism(tmp_path, argv):
    blobs = []
    for k, threads in enumerate(("1", "3")):
        out = tmp_path / f"run{k}"
        env = {"RADIAL_GATE_THREADS": threads, "PATH": "/usr/bin:/bin"}
        subprocess.run([sys.executable, "-m", "radial_gate.cli", *argv, "--out", str(out)],
                       check=True, env=env)
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]


def test_module_entry_error_stream():
    proc = subprocess.run([sys.executable, "-m", "radial_gate.cli", "classify", "--dim", "2",
                           "--potential", "power:c=1,k=-3"], capture_output=True, text=True)
    assert proc.returncode == 3
    assert proc.stdout == ""
    assert_error_line(proc.stderr, 3)
