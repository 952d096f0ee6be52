import json
import math

import pytest

from roughwet.cli import EXIT_CONFIG, EXIT_OK, EXIT_SOLVER, EXIT_VALIDATION, OUTPUT_ENV, main
from roughwet.config import ConfigError, load_config

FLAT60 = """
scenario = "formula"
[surface]
geometry = "flat"
chemistry = "homogeneous"
theta = 60.0
"""


@pytest.fixture
def cfg_file(tmp_path):
    p = tmp_path / "run.toml"
    p.write_text(FLAT60)
    return p


def read_csv(path):
    lines = path.read_text().splitlines()
    head = lines[0].split(",")
    return [dict(zip(head, l.split(","))) for l in lines[1:]]


def test_formula_scenario(cfg_file, tmp_path):
    out = tmp_path / "o"
    assert main(["run", str(cfg_file), "--out", str(out)]) == EXIT_OK
    rows = read_csv(out / "formula.csv")
    assert len(rows) == 1 and float(rows[0]["theta_a_deg"]) == 60.0
    assert float(rows[0]["cos_theta_a"]) == pytest.approx(0.5)
    man = json.loads((out / "manifest.json").read_text())
    assert man["artifacts"][0]["file"] == "formula.csv" and len(man["config_sha256"]) == 64


def test_overrides_and_degrees(cfg_file):
    cfg = load_config(cfg_file, ["surface.theta=120", "surface.geometry=wave_y", "solver.nx=32"])
    assert cfg.surface.build().chemistry.params["theta"] == pytest.approx(120 * math.pi / 180)
    assert cfg.solver_config().nx == 32
    assert load_config(cfg_file, ["surface.eps_list=[0.5, 0.25, 0.125]"]).surface.eps_list == [0.5, 0.25, 0.125]


@pytest.mark.parametrize("override, key", [
    ("surface.nope=1", "surface.nope"),
    ("surface.eps=0.9", "surface.eps"),
    ("surface.theta=180", "surface.theta"),
    ("surface.amplitude=0.3", "surface.amplitude"),
    ("surface.geometry=bumps", "surface.geometry"),
    ("solver.nx=abc", "solver.nx"),
    ("scenario=dance", "scenario"),
])
def test_config_errors_name_the_key(cfg_file, override, key):
    with pytest.raises(ConfigError) as err:
        load_config(cfg_file, [override])
    assert err.value.key == key


def test_config_error_exit_code(cfg_file, tmp_path, capsys):
    assert main(["solve", str(cfg_file), "--set", "surface.eps=2"]) == EXIT_CONFIG
    assert "surface.eps" in capsys.readouterr().err
    assert main(["solve", str(tmp_path / "missing.toml")]) == EXIT_CONFIG
    bad = tmp_path / "bad.toml"
    bad.write_text("scenario = \n")
    assert main(["run", str(bad)]) == EXIT_CONFIG


def test_solve_is_reproducible(cfg_file, tmp_path):
    args = ["solve", str(cfg_file), "--set", "surface.geometry=wave_y", "--set", "solver.nx=32",
            "--set", "solver.ny=16", "--set", "surface.eps=0.25"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("summary.csv", "solution_0.csv", "solution_0_line.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    row = read_csv(tmp_path / "a" / "summary.csv")[0]
    assert row["converged"] == "1" and "cos_theta_meas" in row


def test_nonconvergence_exit_code(cfg_file, tmp_path):
    out = tmp_path / "nc"
    code = main(["solve", str(cfg_file), "--set", "surface.geometry=wave_yz",
                 "--set", "solver.max_iter=1", "--out", str(out)])
    assert code == EXIT_SOLVER
    assert (out / "summary.csv").exists() and (out / "manifest.json").exists()


def test_output_dir_from_environment(cfg_file, tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["formula", str(cfg_file)]) == EXIT_OK
    assert (tmp_path / "env" / "formula.csv").exists()


def test_sweep_and_hysteresis(cfg_file, tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", str(cfg_file), "--set", "surface.geometry=wave_y",
                 "--set", "surface.eps_list=[0.25,0.125,0.0625]", "--set", "solver.nx=32",
                 "--set", "solver.ny=16", "--out", str(out)]) == EXIT_OK
    man = json.loads((out / "manifest.json").read_text())
    assert man["slope_est1"] > 0.9
    assert len(read_csv(out / "convergence_loglog.csv")) == 3
    out = tmp_path / "h"
    assert main(["hysteresis", str(cfg_file), "--set", "surface.geometry=wave_z",
                 "--set", "surface.theta=90", "--out", str(out)]) == EXIT_OK
    adv, rec = read_csv(out / "range.csv")
    assert float(adv["theta_deg"]) == pytest.approx(122.14, abs=0.2)


def test_validate_failure_exit_code(cfg_file, tmp_path, monkeypatch):
    from roughwet import cli
    from roughwet.checks import CheckResult
    monkeypatch.setattr(cli, "validation_suite", lambda seed, cfg: [CheckResult("x", 2.0, 1.0, False)])
    assert main(["validate", str(cfg_file), "--out", str(tmp_path / "v")]) == EXIT_VALIDATION
    monkeypatch.setattr(cli, "validation_suite", lambda seed, cfg: [CheckResult("x", 0.0, 1.0, True)])
    assert main(["validate", str(cfg_file), "--out", str(tmp_path / "v")]) == EXIT_OK


@pytest.mark.slow
def test_validate_suite_passes(cfg_file, tmp_path):
    assert main(["validate", str(cfg_file), "--out", str(tmp_path / "v")]) == EXIT_OK
