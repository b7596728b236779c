import csv
import json

import numpy as np
import pytest

from dnchoreo.cli import FIG1_PAIRS, example_config_path, main
from dnchoreo.config import load_config, parse_config
from dnchoreo.errors import ConfigError
from dnchoreo.serialize import load_solution, parse_svg_path, read_configuration_csv
from dnchoreo.symmetry import winding_number_from_samples

BASE = """
[symmetry]
n = 3
W = 4

[physics]
alpha = 1.0
Omega = {Omega}

[solver]
K_max = 32
lambda_schedule = [0.25, 0.5, 0.75, 1.0]
"""


def write_cfg(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve")
    rc = main(["solve", "--out", str(out)])
    return rc, out


# -- config ------------------------------------------------------------------------------


def test_bundled_config_parses():
    run = load_config(example_config_path())
    assert (run.spec.n, run.spec.W, run.params.alpha) == (3, 4, 1.0)
    assert run.amplitudes == {1: 0.3, 4: 1.0}
    assert len(run.solver.lambda_schedule) == 8
    assert run.sweep == {"alpha": [0.5, 1.0, 1.5]}


def test_missing_key_named(tmp_path):
    text = BASE.format(Omega=0.5).replace("alpha = 1.0\n", "")
    with pytest.raises(ConfigError, match="physics.alpha"):
        load_config(write_cfg(tmp_path, text))


def test_syntax_error_has_line(tmp_path):
    text = BASE.format(Omega=0.5).replace("W = 4", "W = = 4")
    with pytest.raises(ConfigError, match="line 4"):
        load_config(write_cfg(tmp_path, text))


def test_unknown_solver_key():
    with pytest.raises(ConfigError, match="tolerance"):
        parse_config({"symmetry": {"n": 3, "W": 4}, "physics": {"alpha": 1, "Omega": 0.5},
                      "solver": {"tolerance": 1e-8}})


def test_invalid_values_become_config_errors():
    with pytest.raises(ConfigError):
        parse_config({"symmetry": {"n": 3, "W": 4}, "physics": {"alpha": 3.0, "Omega": 0.5}})


# -- solve / verify -------------------------------------------------------------------------


def test_solve_bundled_example(solved):
    rc, out = solved
    assert rc == 0
    for name in ("solution.json", "curve.json", "report.json",
                 "trajectories_rotating.csv", "trajectories_inertial.csv"):
        assert (out / name).exists()
    report = json.loads((out / "report.json").read_text())
    assert report["converged"] and report["winding"] == 4 and report["error"] is None
    curve, spec, params = load_solution(out / "solution.json")
    rot = read_configuration_csv(out / "trajectories_rotating.csv", curve.T)
    inert = read_configuration_csv(out / "trajectories_inertial.csv", curve.T)
    assert rot.n == 3 and abs(rot.min_separation - inert.min_separation) < 1e-12


def test_solve_is_reproducible(solved, tmp_path):
    _, out = solved
    assert main(["solve", "--out", str(tmp_path)]) == 0
    for name in ("report.json", "solution.json", "trajectories_inertial.csv"):
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes()


def test_seeded_perturbation_reproducible(tmp_path):
    cfg = write_cfg(tmp_path, BASE.format(Omega=0.5) + "perturbation = 0.05\n")
    a, b, c = (tmp_path / x for x in "abc")
    assert main(["solve", "--config", str(cfg), "--seed", "3", "--out", str(a)]) == 0
    assert main(["solve", "--config", str(cfg), "--seed", "3", "--out", str(b)]) == 0
    main(["solve", "--config", str(cfg), "--seed", "4", "--out", str(c)])
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    assert (a / "report.json").read_bytes() != (c / "report.json").read_bytes()


def test_solve_resonant_config_rejected(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE.format(Omega=3.0))
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) != 0
    assert "nonresonance" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_solve_missing_key(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE.format(Omega=0.5).replace("n = 3\n", ""))
    assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "symmetry.n" in capsys.readouterr().err


def test_verify_round_trip(solved, tmp_path):
    _, out = solved
    assert main(["verify", str(out / "solution.json"), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "verification.json").read_text())
    assert report["passed"] and not report["failed"]


def test_verify_corrupted(solved, tmp_path, capsys):
    _, out = solved
    data = json.loads((out / "solution.json").read_text())
    data["curve"]["coeffs"][3][1] *= 1.1  # mode k=4
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert main(["verify", str(bad), "--out", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "physical_residual_sup" in err and "period_return_error" in err


# -- curves ----------------------------------------------------------------------------------


def test_curves_preset(tmp_path):
    assert main(["curves", "--preset", "fig1", "--out", str(tmp_path)]) == 0
    svgs = sorted(tmp_path.glob("*.svg"))
    assert len(svgs) == 6
    summary = json.loads((tmp_path / "curves.json").read_text())
    assert [(s["n"], s["W"]) for s in summary] == list(FIG1_PAIRS)
    for s in summary:
        assert s["winding"] == s["W"]
        assert s["closure_gap"] < 1e-9
        assert max(s["symmetry_shift"], s["symmetry_reflection"]) < 1e-12


def test_curves_single_winding_from_svg(tmp_path):
    assert main(["curves", "--n", "3", "--W", "4", "--amplitudes", "1:0.3,4:1", "--out", str(tmp_path)]) == 0
    pts = parse_svg_path((tmp_path / "curve_n3_W4.svg").read_text())
    assert winding_number_from_samples((pts - 240.0) * np.array([1.0, -1.0])) == 4


def test_curves_rejects_gcd(tmp_path, capsys):
    assert main(["curves", "--n", "4", "--W", "2", "--out", str(tmp_path)]) == 2
    assert "gcd" in capsys.readouterr().err


def test_curves_rejects_inadmissible_amplitude(tmp_path, capsys):
    assert main(["curves", "--n", "3", "--W", "4", "--amplitudes", "2:0.3,4:1", "--out", str(tmp_path)]) == 2
    assert "k=2" in capsys.readouterr().err


# -- sweep -----------------------------------------------------------------------------------


def test_sweep_alpha(tmp_path):
    assert main(["sweep", "--workers", "2", "--out", str(tmp_path / "a")]) == 0
    rows = list(csv.DictReader(open(tmp_path / "a" / "sweep.csv")))
    assert len(rows) == 3
    assert [float(r["alpha"]) for r in rows] == [0.5, 1.0, 1.5]
    assert {"n", "W", "converged", "residual", "min_separation", "winding", "h1_norm", "R0"} <= set(rows[0])
    assert main(["sweep", "--workers", "1", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "sweep.csv").read_bytes() == (tmp_path / "b" / "sweep.csv").read_bytes()


def test_sweep_needs_table(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE.format(Omega=0.5))
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "[sweep]" in capsys.readouterr().err
