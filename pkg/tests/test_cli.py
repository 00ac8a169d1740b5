import json
import os
import subprocess
import sys

import pytest

from rellichkit import cli, quadrature


def run(args, capsys):
    code = cli.main([str(a) for a in args])
    out = capsys.readouterr()
    lines = [l for l in out.out.splitlines() if l.strip()]
    return code, json.loads(lines[-1]), out.err


@pytest.fixture
def no_quadrature(monkeypatch):
    def boom(*a, **k):
        raise AssertionError("quadrature was reached")
    monkeypatch.setattr(quadrature, "_panels", boom)


def test_verify_passes_and_writes_files(tmp_path, capsys):
    code, msg, _ = run(["verify", "--which", "all", "--n", "9,11", "--alpha", "0,1", "--c", "0,-1",
                        "--output-dir", tmp_path], capsys)
    assert code == 0 and msg["passed"] and msg["suites"] == ["verify"]
    rows = (tmp_path / "verify.csv").read_text().splitlines()
    assert rows[0].startswith("which,n,alpha,c")
    assert len(rows) == 1 + 3 * 2 * 2 * 2
    summary = json.loads((tmp_path / "verify.json").read_text())
    assert summary["passed"] and len(summary["provenance"]["config_hash"]) == 16
    assert summary["provenance"]["backend"] in ("numba", "numpy")


def test_hypothesis_violation_stops_before_quadrature(tmp_path, capsys, no_quadrature):
    code, msg, err = run(["verify", "--which", "rellich1", "--n", "5", "--alpha", "2",
                          "--output-dir", tmp_path], capsys)
    assert code == 2 and not msg["passed"]
    assert "alpha" in err and "2" in err
    assert not list(tmp_path.iterdir())


def test_skip_invalid(tmp_path, capsys):
    code, msg, _ = run(["verify", "--which", "rellich2", "--n", "8,9", "--skip-invalid",
                        "--output-dir", tmp_path], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "verify.json").read_text())
    assert summary["params"]["skipped"] == [["rellich2", 8, 0.0, 0.0]]


def test_sweep_cli(tmp_path, capsys):
    code, msg, _ = run(["sweep", "--n", "9", "--which", "rellich2", "--output-dir", tmp_path], capsys)
    assert code == 0
    data = json.loads((tmp_path / "sweep.json").read_text())
    assert data["summary"]["L"] == pytest.approx(20.25, rel=1e-8)
    assert (tmp_path / "sweep.dat").read_text().startswith("# eps")


def test_sweep_failure_exit_code(tmp_path, capsys):
    # the inverse-log fit misses the constant by more than 2%
    code, msg, _ = run(["sweep", "--n", "9", "--model", "inverse-log", "--output-dir", tmp_path], capsys)
    assert code == 1 and not msg["passed"]
    assert any(f["check"] == "relative_gap" for f in msg["failures"])


def test_kf_probe_non_riemannian_is_not_an_error(tmp_path, capsys):
    code, msg, _ = run(["kf-probe", "--norm", "pnorm:4", "--output-dir", tmp_path], capsys)
    assert code == 0
    data = json.loads((tmp_path / "kf-probe.json").read_text())
    assert data["summary"]["verdict"] is False


def test_kf_probe_expectation_mismatch(tmp_path, capsys):
    code, msg, _ = run(["kf-probe", "--norm", "pnorm:4", "--expect", "riemannian",
                        "--output-dir", tmp_path], capsys)
    assert code == 1


def test_green_check(tmp_path, capsys):
    code, _, _ = run(["green-check", "--c", "-1", "--profiles", "3", "--output-dir", tmp_path], capsys)
    assert code == 0


def test_constants_table(tmp_path, capsys):
    code, _, _ = run(["constants", "--n", "5,9", "--output-dir", tmp_path], capsys)
    assert code == 0
    text = (tmp_path / "constants.csv").read_text()
    assert "1.5625" in text and "20.25" in text


def test_same_config_gives_identical_csv(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 5, "c": -1.0, "profiles": 4, "seed": 7}))
    outs = []
    for k in range(2):
        d = tmp_path / f"o{k}"
        d.mkdir()
        code, _, _ = run(["green-check", "--config", cfg, "--output-dir", d], capsys)
        assert code == 0
        outs.append((d / "green-check.csv").read_bytes())
    assert outs[0] == outs[1]


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 5, "which": "rellich1"}))
    code, _, _ = run(["verify", "--config", cfg, "--n", "9", "--output-dir", tmp_path], capsys)
    assert code == 0
    assert json.loads((tmp_path / "verify.json").read_text())["params"]["n"] == [9]


def test_config_syntax_error_position(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{\n  "n": 5,\n  "alpha": ,\n}\n')
    code, msg, err = run(["verify", "--config", cfg, "--output-dir", tmp_path], capsys)
    assert code == 2
    assert f"{cfg}:3:12" in err


def test_unknown_parameter(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dimension": 5}))
    code, _, err = run(["verify", "--config", cfg, "--output-dir", tmp_path], capsys)
    assert code == 2 and "dimension" in err


def test_run_suites_in_parallel_and_report(tmp_path, capsys):
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps({"suites": [
        {"command": "verify", "name": "h", "which": "hardy", "n": [5, 9], "c": [0, -1]},
        {"command": "kf-probe", "name": "probe", "norm": "anisotropic:2,1,1", "dim": 3},
        {"command": "constants", "n": [5, 6]},
    ]}))
    out = tmp_path / "out"
    out.mkdir()
    code, msg, _ = run(["run", cfg, "--jobs", "2", "--output-dir", out], capsys)
    assert code == 0 and msg["suites"] == ["h", "probe", "02_constants"]
    code, msg, _ = run(["report", "--output-dir", out], capsys)
    assert code == 0
    rows = (out / "report.csv").read_text().splitlines()
    assert len(rows) == 4


def test_run_validates_every_suite_first(tmp_path, capsys, no_quadrature):
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps({"suites": [
        {"command": "verify", "n": 9},
        {"command": "sweep", "n": 8, "which": "rellich2"},
    ]}))
    code, _, _ = run(["run", cfg, "--output-dir", tmp_path], capsys)
    assert code == 2
    assert not list(tmp_path.glob("*.csv"))


def test_report_without_inputs(tmp_path, capsys):
    code, msg, _ = run(["report", "--output-dir", tmp_path], capsys)
    assert code == 1


def test_output_dir_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path))
    code, _, _ = run(["constants"], capsys)
    assert code == 0 and (tmp_path / "constants.json").exists()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rellichkit", "constants", "--n", "9",
                           "--output-dir", str(tmp_path)], capture_output=True, text=True,
                          env={**os.environ, "RELLICHKIT_DISABLE_NUMBA": "1"})
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["passed"] is True
    assert json.loads((tmp_path / "constants.json").read_text())["provenance"]["backend"] == "numpy"
