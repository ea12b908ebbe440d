import json
import os

import numpy as np

from caplace.cli import main


def run(tmp_path, *argv):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        return main(list(argv))
    finally:
        os.chdir(cwd)


def test_solve_neumann_disk_outputs(tmp_path):
    code = run(tmp_path, "solve-neumann-disk", "--phi", "cos", "--n", "256",
               "--out", "run1")
    assert code == 0
    sol = np.loadtxt(tmp_path / "run1_solution.csv", delimiter=",", skiprows=1)
    assert sol.shape[1] == 5
    rep = json.loads((tmp_path / "run1_residual.json").read_text())
    assert rep["max_abs_deviation"] < 1e-6
    assert (tmp_path / "run1_stages.json").exists()


def test_nonclassical_data_succeeds(tmp_path):
    code = run(tmp_path, "solve-neumann-disk", "--phi", "const:1", "--n", "256",
               "--out", "run2")
    assert code == 0
    rep = json.loads((tmp_path / "run2_residual.json").read_text())
    assert rep["max_abs_deviation"] < 1e-3
    assert rep["n_excluded"] > 0


def test_mu_from_a_prints_value(tmp_path, capsys):
    assert run(tmp_path, "mu-from-a", "--a", "diag:2,0.5") == 0
    out = capsys.readouterr().out
    assert "-0.3333333333" in out


def test_validate_a_failure_exit_code(tmp_path, capsys):
    code = run(tmp_path, "validate-a", "--a", "diag:2,1", "--grid", "16")
    assert code == 2
    err = capsys.readouterr().err
    payload = json.loads(err)
    assert payload["error"] == "ValidationError"
    assert "points" in payload["details"]


def test_validate_a_success(tmp_path):
    assert run(tmp_path, "validate-a", "--a", "diag:2,0.5", "--grid", "16") == 0


def test_unknown_selector_is_configuration_error(tmp_path, capsys):
    code = run(tmp_path, "solve-neumann-disk", "--phi", "bogus", "--out", "x")
    assert code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "ConfigurationError"


def test_bad_n_is_configuration_error(tmp_path):
    assert run(tmp_path, "solve-neumann-disk", "--n", "100", "--out", "x") == 2


def test_oracle_compare_disk(tmp_path):
    assert run(tmp_path, "oracle-compare", "--phi", "cos", "--n", "256",
               "--out", "oc") == 0
    rep = json.loads((tmp_path / "oc_compare.json").read_text())
    assert rep["max_discrepancy"] < 1e-3


def test_oracle_compare_anisotropic_manufactured(tmp_path):
    assert run(tmp_path, "oracle-compare", "--a", "diag:2,0.5", "--grid", "128",
               "--fd-n", "65", "--n", "256", "--out", "oca") == 0
    rep = json.loads((tmp_path / "oca_compare.json").read_text())
    assert rep["max_discrepancy"] < 1e-2


def test_oracle_compare_zero_data(tmp_path):
    assert run(tmp_path, "oracle-compare", "--phi", "const:0", "--n", "256",
               "--out", "oc0") == 0
    rep = json.loads((tmp_path / "oc0_compare.json").read_text())
    assert rep["max_discrepancy"] == 0.0


def test_oracle_compare_refuses_incompatible(tmp_path, capsys):
    code = run(tmp_path, "oracle-compare", "--phi", "const:1", "--n", "256",
               "--out", "oc2")
    assert code == 2
    assert json.loads(capsys.readouterr().err)["error"] == "IncompatibleDataError"


def test_dry_run_writes_nothing(tmp_path):
    assert run(tmp_path, "solve-neumann-disk", "--phi", "cos", "--n", "256",
               "--out", "dry", "--dry-run") == 0
    assert list(tmp_path.iterdir()) == []


def test_every_subcommand_has_dry_run(tmp_path):
    cases = [
        ["solve-neumann-disk", "--n", "256"],
        ["solve-directional-disk", "--nu", "const:1,0", "--n", "256"],
        ["solve-neumann-jordan", "--curve", "limacon:0.3", "--n", "256"],
        ["solve-directional-jordan", "--curve", "limacon:0.3", "--n", "256"],
        ["solve-neumann-aharmonic", "--a", "diag:2,0.5", "--grid", "64", "--n", "256"],
        ["solve-directional-aharmonic", "--a", "identity", "--grid", "64", "--n", "256"],
        ["beltrami-solve", "--grid", "64"],
        ["conformal-map", "--n", "256"],
        ["mu-from-a", "--a", "identity"],
        ["a-from-mu", "--mu", "const:0.2"],
        ["validate-a", "--a", "identity", "--grid", "16"],
        ["family", "--k", "2", "--n", "256"],
        ["oracle-compare", "--n", "256"],
    ]
    for argv in cases:
        assert run(tmp_path, *argv, "--dry-run") == 0
    assert list(tmp_path.iterdir()) == []


def test_family_subcommand(tmp_path):
    assert run(tmp_path, "family", "--k", "3", "--n", "256", "--out", "fam") == 0
    rep = json.loads((tmp_path / "fam_family.json").read_text())
    assert rep["rank"] == 3


def test_jordan_subcommand(tmp_path):
    code = run(tmp_path, "solve-neumann-jordan", "--curve", "limacon:0.3",
               "--phi", "normal-x", "--n", "256", "--out", "jr")
    assert code == 0
    rep = json.loads((tmp_path / "jr_residual.json").read_text())
    assert rep["max_abs_deviation"] < 1e-5


def test_beltrami_subcommand(tmp_path):
    assert run(tmp_path, "beltrami-solve", "--mu", "const:0.3", "--grid", "128",
               "--out", "bs") == 0
    header = json.loads((tmp_path / "bs_h.json").read_text())
    assert header["residual_sup"] < 1e-8
    data = np.loadtxt(tmp_path / "bs_h.csv", delimiter=",", skiprows=1)
    assert data.shape == (128 * 128, 4)


def test_conformal_subcommand(tmp_path):
    assert run(tmp_path, "conformal-map", "--curve", "limacon:0.3", "--n", "256",
               "--out", "cm") == 0
    d = json.loads((tmp_path / "cm_map.json").read_text())
    assert set(d) == {"theta", "psi", "center"}


def test_aharmonic_with_config_file(tmp_path):
    cfg = {
        "A": "diag:2,0.5", "curve": "circle", "phi": "normal-x",
        "zeta0": [1.0, 0.0], "grid": 128, "out": "cfgrun",
    }
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    code = run(tmp_path, "solve-neumann-aharmonic", "--config", "cfg.json",
               "--n", "256")
    assert code == 0
    rep = json.loads((tmp_path / "cfgrun_residual.json").read_text())
    assert rep["max_abs_deviation"] < 1e-2
    stages = json.loads((tmp_path / "cfgrun_stages.json").read_text())
    assert stages["beltrami_iterations"] >= 1


def test_determinism_bit_identical(tmp_path):
    run(tmp_path, "solve-neumann-disk", "--phi", "sin2", "--n", "256", "--out", "a")
    run(tmp_path, "solve-neumann-disk", "--phi", "sin2", "--n", "256", "--out", "b")
    assert (tmp_path / "a_solution.csv").read_bytes() == (
        tmp_path / "b_solution.csv"
    ).read_bytes()
    ra = json.loads((tmp_path / "a_residual.json").read_text())
    rb = json.loads((tmp_path / "b_residual.json").read_text())
    assert ra == rb
