import csv
import io
import json

import pytest

from hgeom.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_verify_gauge_ball(capsys):
    code, out, _ = run(capsys, "verify", "--surface", "gauge-ball", "--R", "1", "--n", "2",
                       "--samples", "30", "--seed", "7")
    assert code == 0
    table = rows(out)
    names = {r["check"] for r in table}
    assert {"bracket_span", "codazzi_k", "position_props", "shape_oracle", "phi_v_constant"} <= names
    assert all(float(r["max_residual"]) < 1e-6 for r in table)


def test_verify_ellipsoid_umbilic(capsys):
    code, out, _ = run(capsys, "verify", "--surface", "profile:ellipsoid", "--a", "2", "--b", "1",
                       "--n", "2", "--samples", "30")
    assert code == 0
    umb = [r for r in rows(out) if r["check"] == "umbilic_residual"][0]
    assert float(umb["max_residual"]) < 1e-8


@pytest.mark.parametrize("argv", [
    ["verify", "--surface", "klein-bottle"],
    ["verify", "--surface", "gauge-ball", "--R", "-1"],
    ["verify", "--surface", "gauge-ball", "--a", "2"],
    ["verify", "--bogus-flag"],
    ["sweep", "--n", "1", "--phi0", "0"],
    ["sweep", "--n", "1", "--c", "-3", "--phi0", "0"],
    ["sweep", "--n", "1", "--c", "3", "--phi0", "zero"],
    ["flow", "--surface", "gauge-ball", "--start", "1,0"],
    ["verify", "--seed", "-1"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err.strip()


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": 1, "n": 1, "c": 3, "phi0": [0, 0.5]}))
    code, out, _ = run(capsys, "sweep", "--config", str(cfg))
    assert code == 0
    assert [r["classification"] for r in rows(out)] == ["closes-at-pole", "t-unbounded"]
    # flags override the file
    code, out, _ = run(capsys, "sweep", "--config", str(cfg), "--phi0", "0")
    assert len(rows(out)) == 1

    cfg.write_text(json.dumps({"schema": 1, "n": 1, "c": 3, "phi0": [0], "colour": "red"}))
    assert run(capsys, "sweep", "--config", str(cfg))[0] == 2
    cfg.write_text(json.dumps({"n": 1}))
    assert run(capsys, "sweep", "--config", str(cfg))[0] == 2
    cfg.write_text("{not json")
    assert run(capsys, "sweep", "--config", str(cfg))[0] == 2


def test_sweep_rows(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "1", "--c", "3", "--phi0", "0,0.5,-0.1")
    assert code == 0
    a, b, c = rows(out)
    assert float(a["dt_measured"]) == pytest.approx(-2.0, abs=1e-8)
    assert a["classification"] == "closes-at-pole"
    assert abs(float(b["dt_measured"]) - float(b["dt_formula"])) < 1e-6
    assert b["classification"] == "t-unbounded"
    assert c["dt_measured"] == "" and c["status"] == "pass"


def test_flow_output(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    code, _, err = run(capsys, "flow", "--surface", "gauge-ball", "--R", "1", "--n", "1",
                       "--start", "1,0,0", "--out", str(out))
    assert code == 0
    assert "pole-reached" in err
    table = rows(out.read_text())
    ts = [float(r["t"]) for r in table]
    assert all(b < a for a, b in zip(ts, ts[1:]))
    assert float(table[-1]["t"]) == pytest.approx(-1.0, abs=1e-3)
    raw = out.read_bytes()
    assert b"\r" not in raw


def test_sphere_report(capsys):
    code, out, _ = run(capsys, "sphere-report", "--n", "3", "--samples", "40")
    assert code == 0
    table = rows(out)
    assert len(table) == 40
    assert all(abs(float(r["l_over_k"]) - 3) < 1e-8 for r in table)
    code, out, _ = run(capsys, "sphere-report", "--R", "1", "--t0", "0", "--n", "1", "--samples", "50")
    assert code == 0
    assert max(float(r["H_diff"]) for r in rows(out)) < 1e-8


def test_json_format(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "1", "--c", "3", "--phi0", "0", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "pass"
    assert doc["rows"][0]["cycle_spread"] is None


def test_threshold_failure_exit_1(capsys):
    # a wrong curvature constant breaks the phi_v closed-form check
    code, out, _ = run(capsys, "verify", "--surface", "gauge-ball", "--n", "1", "--samples", "5",
                       "--c", "1")
    assert code == 1
    assert any(r["status"] == "fail" for r in rows(out))


@pytest.mark.parametrize("argv", [
    ["verify", "--surface", "gauge-ball", "--n", "2", "--samples", "24", "--seed", "3"],
    ["verify", "--surface", "profile:ellipsoid", "--a", "2", "--b", "1", "--n", "2", "--samples", "24"],
    ["sweep", "--n", "1", "--c", "3", "--phi0", "0,0.25,0.5"],
    ["sphere-report", "--n", "2", "--samples", "24"],
])
def test_byte_identical_across_threads(tmp_path, capsys, monkeypatch, argv):
    outputs = []
    for threads in ("1", "8", "8"):
        path = tmp_path / f"out{len(outputs)}"
        code = main(argv + ["--threads", threads, "--out", str(path)])
        capsys.readouterr()
        assert code == 0
        outputs.append(path.read_bytes())
    monkeypatch.setenv("HGEOM_THREADS", "4")
    path = tmp_path / "env"
    assert main(argv + ["--out", str(path)]) == 0
    outputs.append(path.read_bytes())
    assert len(set(outputs)) == 1
