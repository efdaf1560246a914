"""End-to-end tests of the command-line harness.

Every test runs the real entry point in a subprocess so exit codes, stdout
JSON error envelopes, and file artifacts are checked exactly as a user
would see them.
"""

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from adialab import schedule

T_GEODESIC_PI = (2 * math.pi + 3 * math.pi**2) / (4 * 0.01)


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "adialab.cli", *[str(a) for a in args]],
        capture_output=True,
        text=True,
    )


def read_report(out_dir):
    with open(out_dir / "report.json", encoding="utf-8") as fh:
        return json.load(fh)


def stdout_error(proc):
    return json.loads(proc.stdout)["error"]


def test_prepare_geodesic_full_report(tmp_path):
    out = tmp_path / "run"
    proc = run_cli("prepare", "--kind", "geodesic", "--theta", math.pi,
                   "--epsilon", "0.01", "--out", out)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    rep = read_report(out)
    assert rep["schema"] == 1
    assert rep["command"] == "prepare"
    assert rep["backend"] in ("cython", "numpy")
    assert rep["gamma_constant"] is True
    assert rep["applicable_bound"] == "theorem1"
    assert rep["t_bound"] == pytest.approx(T_GEODESIC_PI, rel=1e-12)
    assert rep["t_evolution"] == rep["t_bound"]
    assert rep["steps"] == 17946
    assert rep["bounds"]["t_theorem1"] == rep["t_bound"]
    assert rep["norms"]["source"] == "closed-form"
    assert rep["norms"]["h1_max"] == pytest.approx(math.pi, rel=1e-12)
    assert rep["norms"]["h2_max"] == pytest.approx(math.pi**2, rel=1e-12)
    assert rep["measured_error"] <= 0.01
    assert rep["within_epsilon"] is True

    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0].startswith("# adialab prepare")
    assert lines[1] == "s,psi0_re,psi0_im,psi1_re,psi1_im"
    assert len(lines) > 10


def test_prepare_constant_schedule_needs_no_time(tmp_path):
    out = tmp_path / "run"
    proc = run_cli("prepare", "--kind", "geodesic", "--theta", 0.0, "--out", out)
    assert proc.returncode == 0
    rep = read_report(out)
    assert rep["t_evolution"] == 0.0
    assert rep["measured_error"] == 0.0


def test_prepare_gap_collapse_exit_code(tmp_path):
    proc = run_cli("prepare", "--kind", "linear", "--theta", math.pi,
                   "--out", tmp_path / "run")
    assert proc.returncode == 3
    assert stdout_error(proc)["type"] == "GapCollapse"


@pytest.mark.parametrize("override,expected", [(20.0, 20.0), (5.0, 12.5)])
def test_prepare_t_override_never_undercuts_bound(tmp_path, override, expected):
    out = tmp_path / "run"
    proc = run_cli("prepare", "--kind", "geodesic", "--theta", 1.0,
                   "--epsilon", "0.1", "--t-override", override, "--out", out)
    assert proc.returncode == 0
    rep = read_report(out)
    assert rep["t_bound"] == pytest.approx(12.5, rel=1e-12)
    assert rep["t_evolution"] == pytest.approx(expected, rel=1e-12)


def test_sweep_linear_decay(tmp_path):
    out = tmp_path / "run"
    proc = run_cli("sweep", "--kind", "linear", "--theta", math.pi / 2,
                   "--t-list", "50,100,200,400,800", "--out", out)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    rep = read_report(out)
    assert 10.0 < rep["c_h"] < 14.0
    assert len(rep["rows"]) == 5
    for row in rep["rows"]:
        assert row["error_times_T"] <= rep["c_h"] + 1e-6
    assert -1.5 <= rep["slope_envelope"] <= -0.7
    assert rep["monotone_decay"] is True
    assert rep["violations"] == []

    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[1] == "T,steps,error,error_times_T"
    assert len(lines) == 7


def test_sweep_constant_schedule_zero_error(tmp_path):
    """A frozen Hamiltonian incurs no error, so the log-log slope is undefined."""
    out = tmp_path / "run"
    proc = run_cli("sweep", "--kind", "geodesic", "--theta", 0.0,
                   "--t-list", "10,20", "--out", out)
    assert proc.returncode == 0
    rep = read_report(out)
    assert all(row["error"] == 0.0 for row in rep["rows"])
    assert rep["slope_envelope"] is None
    assert rep["violations"] == []


CHECK_NAMES = {
    "chain_r_phi1", "chain_rp_phi1", "chain_r_phi2", "phi1_norm",
    "gamma_d1", "gamma_d2", "hellmann_feynman",
    "shifted_d1_norm", "shifted_d2_norm",
    "integral_representation", "phase_fidelity", "phase_angle",
}


def test_verify_geodesic_all_checks_pass(tmp_path):
    out = tmp_path / "run"
    proc = run_cli("verify", "--kind", "geodesic", "--theta", 1.0, "--out", out)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    rep = read_report(out)
    assert {c["name"] for c in rep["checks"]} == CHECK_NAMES
    assert all(c["passed"] for c in rep["checks"])
    assert rep["all_passed"] is True
    assert "12/12 checks passed" in proc.stdout


def test_verify_random_dim8(tmp_path):
    out = tmp_path / "run"
    proc = run_cli("verify", "--kind", "random", "--dim", 8, "--seed", 42,
                   "--out", out)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert read_report(out)["all_passed"] is True


def test_verify_tabulated_level_crossing(tmp_path):
    # Three knots whose middle sample swaps the two sigma_z levels: the
    # tracked eigenvalue changes sorted position between knots, which no
    # amount of interpolation can resolve.
    sz = np.diag([1.0, -1.0]).astype(complex)
    tab = schedule.Tabulated(np.array([0.0, 0.5, 1.0]), np.stack([sz, -sz, sz]))
    sched_file = tmp_path / "crossing.json"
    tab.to_json(sched_file)

    proc = run_cli("verify", "--kind", "tabulated", "--file", sched_file,
                   "--out", tmp_path / "run")
    assert proc.returncode == 3
    err = stdout_error(proc)
    assert err["type"] == "ContinuityLoss"
    assert "sorted position" in err["message"]


def test_gap_scan_linear(tmp_path):
    out = tmp_path / "run"
    proc = run_cli("gap-scan", "--kind", "linear", "--theta", math.pi / 2,
                   "--out", out)
    assert proc.returncode == 0
    rep = read_report(out)
    assert rep["min_gap"] == pytest.approx(math.sqrt(2.0), abs=1e-9)
    assert rep["argmin_s"] == 0.5
    assert rep["closed_form_max_dev"] <= 1e-9

    lines = (out / "gaps.csv").read_text().splitlines()
    assert lines[1] == "s,ev0,ev1,gap,gap_closed_form"
    assert len(lines) == 2003


def test_gap_scan_geodesic_constant_gap(tmp_path):
    out = tmp_path / "run"
    proc = run_cli("gap-scan", "--kind", "geodesic", "--theta", 1.0, "--out", out)
    assert proc.returncode == 0
    rep = read_report(out)
    assert rep["min_gap"] == pytest.approx(2.0, abs=1e-12)
    assert rep["closed_form_max_dev"] is None


def test_gap_scan_linear_degenerate_path(tmp_path):
    out = tmp_path / "run"
    proc = run_cli("gap-scan", "--kind", "linear", "--theta", 0.0, "--out", out)
    assert proc.returncode == 0
    rep = read_report(out)
    assert rep["min_gap"] == pytest.approx(2.0, abs=1e-12)
    assert rep["argmin_s"] == 0.0


def _normalized(rep):
    rep = dict(rep)
    rep.pop("timestamp")
    rep.pop("config_hash")
    rep["config"] = dict(rep["config"])
    rep["config"].pop("out")
    return rep


def _data_lines(path):
    return [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]


def test_prepare_is_deterministic(tmp_path):
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        proc = run_cli("prepare", "--kind", "geodesic", "--theta", 1.0,
                       "--epsilon", "0.1", "--out", out)
        assert proc.returncode == 0
    assert _normalized(read_report(outs[0])) == _normalized(read_report(outs[1]))
    assert _data_lines(outs[0] / "trajectory.csv") == _data_lines(outs[1] / "trajectory.csv")


def test_config_file_merge(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "linear", "theta": 0.3}))

    out = tmp_path / "file-only"
    proc = run_cli("gap-scan", "--config", cfg, "--out", out)
    assert proc.returncode == 0
    assert read_report(out)["config"]["theta"] == 0.3

    out = tmp_path / "flag-wins"
    proc = run_cli("gap-scan", "--config", cfg, "--theta", 0.7, "--out", out)
    assert proc.returncode == 0
    assert read_report(out)["config"]["theta"] == 0.7


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"kind": "linear", "thetta": 0.3}))
    proc = run_cli("gap-scan", "--config", cfg, "--out", tmp_path / "run")
    assert proc.returncode == 2
    assert stdout_error(proc)["type"] == "ConfigInvalid"


@pytest.mark.parametrize("args,err_type", [
    (("gap-scan", "--kind", "tabulated"), "ConfigInvalid"),
    (("gap-scan", "--kind", "geodesic", "--theta", "9"), "DomainError"),
])
def test_validation_exit_codes(tmp_path, args, err_type):
    proc = run_cli(*args, "--out", tmp_path / "run")
    assert proc.returncode == 2
    assert stdout_error(proc)["type"] == err_type


def test_unknown_kind_rejected_by_parser(tmp_path):
    proc = run_cli("gap-scan", "--kind", "bogus", "--out", tmp_path / "run")
    assert proc.returncode == 2
    assert "usage" in proc.stderr
