import csv
import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vwx import serialize as io
from vwx import spectral as sp
from vwx.cli import main
from vwx.contour import AnnulusParams, ContourState, EvenSeries


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bifurcation_table_round_trip(tmp_path, capsys):
    code, out, _ = _run(["bifurcation", "--a1", "1", "--a2", "2", "--nmax", "50", "--out", str(tmp_path)], capsys)
    assert code == 0 and "threshold mode N=5" in out
    data = json.loads((tmp_path / "bifurcation.json").read_text())
    p = AnnulusParams(1, 2)
    expected = [n for n in range(1, 51) if sp.discriminant(p, n) > 0]
    assert [r["n"] for r in data["rows"]] == expected
    for r in data["rows"]:
        lo, hi = sp.bifurcation_velocities(p, r["n"])
        assert (r["omega_minus"], r["omega_plus"]) == (lo, hi)           # bit-for-bit
        assert r["delta"] == sp.discriminant(p, r["n"])
        assert r["admissible"] == (r["n"] >= 5)
        assert isinstance(r["excluded_collision"], bool)
    assert data["threshold"] == 5


def test_invalid_radii_exit_2(capsys):
    code, _, err = _run(["bifurcation", "--a1", "2", "--a2", "2"], capsys)
    assert code == 2 and "0 < a1 < a2" in err
    code, _, err = _run(["solve", "--sign", "x"], capsys)
    assert code == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[params]\na1 = 0.8\na2 = 1.9\n[mode]\nn = 7\nsign = -\n[quadrature]\nn_theta = 128  # comment\n"
                   "[continuation]\nstep = none\n")
    c = io.load_config(cfg)
    assert (c.a1, c.a2, c.n, c.sign, c.n_theta, c.step) == (0.8, 1.9, 7, -1, 128, None)
    (tmp_path / "bad1.ini").write_text("[params]\na3 = 1\n")
    with pytest.raises(io.ConfigError, match="unknown key"):
        io.load_config(tmp_path / "bad1.ini")
    (tmp_path / "bad2.ini").write_text("[physics]\na1 = 1\n")
    with pytest.raises(io.ConfigError, match="unknown section"):
        io.load_config(tmp_path / "bad2.ini")
    (tmp_path / "bad3.ini").write_text("[params]\na1 = one\n")
    with pytest.raises(io.ConfigError, match=r"\[params\] a1"):
        io.load_config(tmp_path / "bad3.ini")
    (tmp_path / "bad4.ini").write_text("a1 = 1\n")
    with pytest.raises(io.ConfigError, match="line:? 1"):
        io.load_config(tmp_path / "bad4.ini")
    with pytest.raises(io.ConfigError, match="cannot read"):
        io.load_config(tmp_path / "missing.ini")


def test_cli_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[params]\na1 = 1\na2 = 3\n")
    code, out, _ = _run(["bifurcation", "--config", str(cfg), "--a2", "2", "--nmax", "20", "--out", str(tmp_path)],
                        capsys)
    assert code == 0 and "a2=2" in out


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_json_floats_round_trip_exactly(xs):
    back = json.loads(io.dumps({"x": np.array(xs)}))["x"]
    assert back == xs


def test_non_finite_become_null():
    assert json.loads(io.dumps({"a": float("nan"), "b": [np.inf, 1.0]})) == {"a": None, "b": [None, 1.0]}


def test_contour_csv_closes(tmp_path):
    s = ContourState(AnnulusParams(1, 2), EvenSeries([0.0, 0.05]), EvenSeries([0.1, 0.0]))
    path = io.write_contour_csv(tmp_path / "c.csv", s, 32)
    rows = list(csv.DictReader(open(path)))
    for layer in ("1", "2"):
        pts = [(float(r["x"]), float(r["y"])) for r in rows if r["layer"] == layer]
        assert len(pts) == 33 and pts[0] == pts[-1]
    st2 = io.state_from_dict(json.loads(io.dumps(io.state_to_dict(s))), s.params)
    assert np.array_equal(st2.r1.coeffs, s.r1.coeffs) and st2.x1 == s.x1


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    code = main(["solve", "--n", "6", "--sign", "+", "--modes", "30", "--ntheta", "128", "--max-steps", "4",
                 "--step", "0.0025", "--out", str(out)])
    return code, out


def test_solve_outputs(solved):
    code, out = solved
    assert code == 0
    data = json.loads((out / "branch_n6p.json").read_text())
    pts = data["points"]
    assert len(pts) == 4 and data["error"] is None
    assert all(p["residual_norm"] <= data["config"]["newton_tol"] for p in pts)
    assert np.all(np.diff([p["s"] for p in pts]) > 0)
    assert np.max(np.abs(np.diff([p["omega"] for p in pts]))) < 1e-3
    for f in ("contour_n6p_000.csv", "contour_n6p_003.csv"):
        rows = list(csv.reader(open(out / f)))[1:]
        assert rows[0][1:3] == rows[128][1:3] and rows[0][3] == rows[128][3]


def test_evolve_branch_point(solved, tmp_path, capsys):
    _, out = solved
    code, text, _ = _run(["evolve", "--input", str(out / "branch_n6p.json"), "--ntheta", "128",
                          "--steps", "100", "--out", str(tmp_path)], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "evolve_diagnostics.json").read_text())
    assert rep["rate_rel_error"] <= 1e-4
    assert rep["area_drift"] <= 1e-8
    header = next(csv.reader(open(tmp_path / "trajectory.csv")))
    assert header == ["frame", "time", "kind", "index", "node", "x", "y"]


def test_evolve_stationary_annulus(tmp_path, capsys):
    code, text, _ = _run(["evolve", "--ntheta", "64", "--steps", "50", "--dt", "0.05", "--out", str(tmp_path)], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "evolve_diagnostics.json").read_text())
    assert abs(rep["fitted_rate"]) <= 1e-12 and rep["area_drift"] <= 1e-6


def test_evolve_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"params": {"a1": 1,\n "a2": }')
    code, _, err = _run(["evolve", "--input", str(bad)], capsys)
    assert code == 2 and "line 2" in err
    (tmp_path / "empty.json").write_text('{"params": {"a1": 1, "a2": 2}, "points": []}')
    code, _, err = _run(["evolve", "--input", str(tmp_path / "empty.json")], capsys)
    assert code == 2
    code, _, err = _run(["evolve", "--input", str(tmp_path / "nope.json")], capsys)
    assert code == 2 and "not found" in err


def test_verify_default_and_degraded(tmp_path, capsys):
    code, out, _ = _run(["verify", "--out", str(tmp_path / "a")], capsys)
    assert code == 0 and "10/10 checks passed" in out
    code, out, _ = _run(["verify", "--ntheta", "16", "--out", str(tmp_path / "b")], capsys)
    assert code == 1
    a = json.loads((tmp_path / "a" / "verify.json").read_text())
    b = json.loads((tmp_path / "b" / "verify.json").read_text())
    assert [c["name"] for c in a["checks"]] == [c["name"] for c in b["checks"]]
    failed = {c["name"] for c in b["checks"] if not c["passed"]}
    assert "quadrature_convergence" in failed


def test_limits(tmp_path, capsys):
    code, out, _ = _run(["limits", "--targets", "1", "0.2", "--out", str(tmp_path)], capsys)
    assert code == 0
    data = json.loads((tmp_path / "limits.json").read_text())
    assert data["limits"]["omega_plus"] == pytest.approx(3 / 8 + 1 / (8 * math.pi))
    assert [r["c"] for r in data["density"]] == [1.0, 0.2]


def test_aliasing_resolution_exit_2(solved, capsys):
    _, out = solved
    code, _, err = _run(["evolve", "--input", str(out / "branch_n6p.json"), "--ntheta", "32"], capsys)
    assert code == 2 and "aliases" in err


def test_usage_errors_exit_2(capsys):
    assert main([]) == 2
    assert main(["frobnicate"]) == 2


def _env(**kw):
    env = dict(os.environ)
    for k in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        env.pop(k, None)
    env.update(kw)
    return env


def test_thread_cap_env():
    code = "import os, vwx; print(os.environ.get('OMP_NUM_THREADS'))"
    r = subprocess.run([sys.executable, "-c", code], env=_env(VWX_THREADS="2"), capture_output=True, text=True)
    assert r.stdout.strip() == "2"
    r = subprocess.run([sys.executable, "-c", code], env=_env(VWX_THREADS="zero"), capture_output=True, text=True)
    assert r.returncode != 0 and "VWX_THREADS" in r.stderr
