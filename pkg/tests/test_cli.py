import csv
import io
import json
import math

import numpy as np
import pytest

from dunklkit.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv)
    doc = json.loads(out)
    assert doc["schema_version"] == "1"
    return code, doc


def test_ak_single(capsys):
    code, doc = run_json(capsys, "ak", "--k", "1")
    assert code == 0
    assert doc["A_k"] == pytest.approx(4 / 3, rel=1e-14)
    assert doc["rel_diff"] < 1e-7
    assert doc["sqrt2_gap"] == pytest.approx(math.sqrt(2) - 4 / 3, rel=1e-12)


def test_ak_classical(capsys):
    code, doc = run_json(capsys, "ak", "--k", "0")
    assert code == 0 and doc["A_k"] == pytest.approx(1.0, rel=1e-14)


def test_ak_sweep(capsys):
    code, out = run(capsys, "ak", "--sweep", "0", "10", "50", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    a = [float(r["A_k"]) for r in rows]
    assert code == 0 and len(a) == 50
    assert all(p < q for p, q in zip(a, a[1:]))
    assert a[-1] < 1.41422


def test_ak_mismatch_exit_code(capsys):
    # an impossible threshold makes the cross-check fail
    code, doc = run_json(capsys, "ak", "--k", "2", "--check-tol", "1e-300")
    assert doc["rel_diff"] > 1e-300 and code == 2


@pytest.mark.parametrize("x, y, expected", [("1", "-2", 1.0), ("1", "1", 4 / 3)])
def test_tv_values(capsys, x, y, expected):
    code, doc = run_json(capsys, "tv", "--k", "1", "--x", x, "--y", y)
    assert code == 0 and doc["tv_at(x,y)"] == pytest.approx(expected, rel=1e-9)
    assert doc["bound_ok"]


def test_tv_routes(capsys):
    code, doc = run_json(capsys, "tv", "--k", "2", "--x", "0.5", "--y", "3")
    assert code == 0
    assert doc["tv_at(x,y)"] <= doc["A_k"]
    assert abs(doc["tv_at(x,y)"] - doc["tv_direct"]) < 1e-7


def test_kernel_scan_mass(capsys):
    code, out = run(capsys, "kernel", "--k", "1", "--x", "1", "--y", "1")
    data = np.loadtxt(io.StringIO(out), delimiter=",", skiprows=1)
    assert out.splitlines()[0] == "z,gamma,weighted_gamma"
    assert np.trapezoid(data[:, 2], data[:, 0]) == pytest.approx(1.0, abs=1e-4)


def test_kernel_json_echoes_grid(capsys):
    code, doc = run_json(capsys, "kernel", "--k", "1", "--x", "1", "--y", "2", "--format", "json")
    assert doc["grid"] == {"start": -3.0, "stop": 3.0, "count": 2000}


def test_translate_by_zero_is_bit_identical(capsys, tmp_path):
    src = tmp_path / "in.csv"
    code, out = run(capsys, "transform", "--k", "0.5", "--function", "bump", "--xi-grid=-4,4,17")
    src.write_text(out)
    code, again = run(capsys, "translate", "--k", "1", "--x", "0", "--input", str(src))
    assert code == 0 and again == out


def test_translate_values(capsys):
    code, out = run(capsys, "translate", "--k", "0", "--x", "0.5", "--grid=-6,6,121", "--y-grid=-1,1,5")
    rows = list(csv.DictReader(io.StringIO(out)))
    ys = np.array([float(r["x"]) for r in rows])
    assert np.allclose([float(r["re"]) for r in rows], np.exp(-(ys + 0.5) ** 2 / 2), atol=1e-15)


def test_transform_gaussian_column(capsys):
    code, out = run(capsys, "transform", "--k", "1")
    rows = list(csv.DictReader(io.StringIO(out)))
    xi = np.array([float(r["x"]) for r in rows])
    re = np.array([float(r["re"]) for r in rows])
    assert code == 0 and np.max(np.abs(re - np.exp(-xi**2 / 2))) < 1e-7
    # repr floats re-parse exactly
    assert all(repr(float(r["re"])) == r["re"] for r in rows)


def test_support2d(capsys, tmp_path):
    heat = tmp_path / "heat.csv"
    code, doc = run_json(capsys, "support2d", "--root", "A1xA1", "--x", "1,2", "--y", "2,1",
                         "--eps", "0.1", "--shell", "--csv", str(heat))
    assert code == 0
    assert doc["indicator_mismatch_off_boundary"] == 0
    assert doc["shell_contains_region"] is True
    assert doc["mass_outside"] / (doc["mass_inside"] + doc["mass_outside"]) < 0.01
    corners = sorted(tuple(map(abs, v)) for rect in doc["region_vertices"] for v in rect)
    assert set(corners) == {(1.0, 1.0), (3.0, 1.0), (1.0, 3.0), (3.0, 3.0)}
    assert heat.read_text().splitlines()[0] == "z1,z2,gamma_eps"


def test_support2d_rejects_other_roots(capsys):
    assert main(["support2d", "--root", "B2", "--x", "1,2", "--y", "2,1"]) == 1


@pytest.mark.parametrize(
    "argv, order, central, admissible",
    [(["--root", "A2", "--lambda", "1,0"], 6, False, True), (["--root", "B2"], 8, True, True),
     (["--root", "A1xA1", "--lambda", "1,0"], 4, True, False)],
)
def test_rootinfo(capsys, argv, order, central, admissible):
    code, doc = run_json(capsys, "rootinfo", *argv)
    assert code == 0
    assert doc["order"] == order
    assert doc["longest_is_minus_identity"] is central
    assert doc["admissible"] is admissible
    assert len(doc["orbit_vertices"]) >= 2


def test_pw_1d(capsys):
    code, doc = run_json(capsys, "pw", "--k", "0.5", "--radius", "1", "--poly", "3")
    assert code == 0
    assert 0.95 <= doc["ratio"] <= 1.0
    assert doc["real_axis"]["bounded"] and doc["polynomial_order_checked"] == 3


def test_pw_rectangle_diagonal(capsys):
    code, doc = run_json(capsys, "pw", "--radii", "1,2", "--direction", "1,1", "--product-k", "1,1")
    assert code == 0
    assert doc["gauge_value"] == pytest.approx(3 / math.sqrt(2), rel=1e-12)
    assert 0.95 <= doc["ratio"] <= 1.0


def test_pw_rate_window_exit_code(capsys):
    code, doc = run_json(capsys, "pw", "--radius", "1", "--rate-low", "0.999")
    assert code == 10


def test_usage_error_exit(capsys):
    with pytest.raises(SystemExit) as info:
        main(["tv", "--k", "1"])
    assert info.value.code == 1


def test_deterministic(capsys):
    first = run(capsys, "rootinfo", "--root", "G2")
    assert run(capsys, "rootinfo", "--root", "G2") == first


def test_out_file(capsys, tmp_path):
    target = tmp_path / "ak.json"
    assert main(["ak", "--k", "0.5", "--out", str(target)]) == 0
    assert json.loads(target.read_text())["A_k"] == pytest.approx(4 / math.pi, rel=1e-13)
