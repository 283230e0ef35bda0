import shutil
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

import oracles as O
from thinfilm import cli
from thinfilm.config import load_toml, parse_config
from thinfilm.errors import (ConfigError, GapError, ParseError, SolverError, TimeSteppingError,
                             ValidationError)
from thinfilm.grid import Grid, read_csv, write_csv

EXAMPLES = Path(__file__).resolve().parents[1] / "examples_configs"

SLIDER = """
model = "lubricate"
[chart]
name = "plane"
[grid]
n = [{n}, 6]
periodic = [false, true]
[gap]
h = "{h}"
[lubricate]
mu = {mu}
V = ["1", "0"]
"""

FIXED = """
model = "shallow"
[chart]
name = "plane"
[grid]
n = [16, 16]
periodic = [true, true]
[gap]
h = "{h}"
h0 = {h0}
[shallow]
rho0 = 1.0
nu = 0.01
pi0 = "2"
V = ["{v1}", "-0.1"]
t_end = {t_end}
{extra}
[output]
every = 5
"""


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


# ---------------------------------------------------------------------------
# parsing and validation

def test_parse_error_reports_line_and_column(tmp_path):
    p = write(tmp_path, 'model = "geometry"\n[chart]\nname = \n')
    with pytest.raises(ParseError) as ei:
        load_toml(p)
    assert ei.value.line == 3 and ei.value.column is not None
    assert f"{p}:3:" in str(ei.value)


def test_missing_file_is_parse_error(tmp_path):
    with pytest.raises(ParseError):
        load_toml(tmp_path / "nope.toml")


def test_all_validation_errors_reported(tmp_path):
    text = SLIDER.format(n=2, h="2 - xi1", mu=-1.0) + 'method = "lu"\nbogus = 1\n'
    with pytest.raises(ValidationError) as ei:
        parse_config(write(tmp_path, text))
    paths = [p for p, _ in ei.value.errors]
    assert "lubricate.mu" in paths and "grid.n" in paths
    assert "lubricate.method" in paths and "lubricate.bogus" in paths
    assert "lubricate.mu" in str(ei.value)


def test_bad_expression_names_field(tmp_path):
    with pytest.raises(ValidationError) as ei:
        parse_config(write(tmp_path, SLIDER.format(n=9, h="2 - foo(xi1)", mu=1.0)))
    assert [p for p, _ in ei.value.errors] == ["gap.h"]


def test_prescribed_gap_mode_rejected(tmp_path):
    text = FIXED.format(h="1", h0=1e-6, v1="0.3", t_end=0.1, extra='mode = "prescribed-h"')
    with pytest.raises(ValidationError) as ei:
        parse_config(write(tmp_path, text))
    (path, msg), = ei.value.errors
    assert path == "shallow.mode" and "not supported" in msg


def test_fully_periodic_pressure_rejected(tmp_path):
    text = SLIDER.format(n=9, h="2 - xi1", mu=1.0).replace("[false, true]", "[true, true]")
    with pytest.raises(ValidationError, match="Dirichlet"):
        parse_config(write(tmp_path, text))


def test_time_dependent_initial_gap_rejected(tmp_path):
    text = FIXED.format(h="1 + t", h0=1e-6, v1="0.3", t_end=0.1, extra="")
    with pytest.raises(ValidationError) as ei:
        parse_config(write(tmp_path, text))
    assert ei.value.errors[0][0] == "gap.h"


def test_overrides(tmp_path):
    cfg = parse_config(write(tmp_path, SLIDER.format(n=9, h="2 - xi1", mu=1.0)),
                       overrides={"grid": (17, 4), "tol": 1e-6})
    assert cfg.grid == (17, 4) and cfg.lubricate["tol"] == 1e-6


# ---------------------------------------------------------------------------
# exit codes

@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_exit_codes_by_family(tmp_path, capsys):
    assert ConfigError.exit_code != GapError.exit_code != SolverError.exit_code
    bad = write(tmp_path, "model = 3\n", "bad.toml")
    assert cli.main(["geometry", "--config", str(bad)]) == ConfigError.exit_code
    thin = write(tmp_path, FIXED.format(h="1", h0=2.0, v1="0.3", t_end=0.1, extra=""), "thin.toml")
    assert cli.main(["shallow", "--config", str(thin), "--out", str(tmp_path / "o1")]) == GapError.exit_code
    fast = write(tmp_path, FIXED.format(h="1", h0=1e-6, v1="0.3", t_end=0.1, extra="dt = 1.0"), "fast.toml")
    assert cli.main(["shallow", "--config", str(fast), "--out", str(tmp_path / "o2")]) == TimeSteppingError.exit_code
    slider = write(tmp_path, SLIDER.format(n=33, h="2 - xi1", mu=1.0) + 'method = "cg"\n', "s.toml")
    assert cli.main(["lubricate", "--config", str(slider), "--out", str(tmp_path / "o3"),
                     "--tol", "1e-300"]) == SolverError.exit_code
    assert cli.main(["geometry", "--config", str(slider)]) == ConfigError.exit_code
    err = capsys.readouterr().err
    assert "ValidationError" in err and ("GapCollapse" in err or "GapTooSmall" in err)


# ---------------------------------------------------------------------------
# pipelines

def test_geometry_sphere_curvature(tmp_path):
    out = cli.run("geometry", EXAMPLES / "geometry_sphere.toml", tmp_path)
    _, _, cols = read_csv(out / "geometry.csv")
    np.testing.assert_allclose(cols["KG"], 0.25, atol=1e-10)
    np.testing.assert_allclose(np.abs(cols["Km"]), 0.5, atol=1e-10)
    assert (out / "coefficients.csv").is_file() and (out / "traceability.txt").is_file()


def test_slider_pressure_file_matches_closed_form(tmp_path):
    out = cli.run("lubricate", EXAMPLES / "lubricate_slider.toml", tmp_path)
    x1, _, cols = read_csv(out / "pressure.csv")
    ref = O.closed_form_slider(2.0, 1.0, 1.0, 1.0)(x1)
    err = np.abs(cols["p"] - ref[:, None]).max() / np.abs(ref).max()
    assert err < 1e-4
    _, _, vel = read_csv(out / "velocity_xi3=0.csv")
    np.testing.assert_allclose(vel["u1"], 1.0, atol=1e-12)
    diag = (out / "diagnostics.txt").read_text()
    assert "residual" in diag


def test_fixed_point_state_files_constant(tmp_path):
    out = cli.run("shallow", EXAMPLES / "shallow_fixed_point.toml", tmp_path)
    states = sorted(out.glob("state_*.csv"))
    assert len(states) >= 2
    for f in states:
        _, _, c = read_csv(f)
        assert np.abs(c["h"] - 1).max() <= 1e-12
        assert np.abs(c["V1"] - 0.3).max() <= 1e-12 and np.abs(c["V2"] + 0.1).max() <= 1e-12
    summary = (out / "summary.txt").read_text()
    assert "steps" in summary and "mass[" in summary


def test_tabulated_chart_and_gap_file(tmp_path):
    # a cylinder of radius 2 given as points, with a gap table
    g = Grid(41, 21, ((0.0, 1.0), (0.0, 1.0)))
    X1, X2 = g.mesh()
    write_csv(tmp_path / "surf.csv", g, [2 * np.cos(X1), 2 * np.sin(X1), X2], ["x", "y", "z"])
    write_csv(tmp_path / "gap.csv", g, [1 + 0.1 * X1 ** 2], ["h"])
    text = """
model = "geometry"
[chart]
tabulated = "surf.csv"
[grid]
n = [21, 11]
[output]
dir = "geo"
"""
    out = cli.run("geometry", write(tmp_path, text), None)
    _, _, cols = read_csv(out / "geometry.csv")
    np.testing.assert_allclose(cols["E"], 4.0, rtol=1e-4)
    np.testing.assert_allclose(cols["KG"], 0.0, atol=1e-3)
    text = """
model = "lubricate"
[chart]
tabulated = "surf.csv"
[grid]
n = [21, 11]
[gap]
file = "gap.csv"
[lubricate]
mu = 1.0
V = ["0.5", "0"]
[output]
dir = "lub"
"""
    out = cli.run("lubricate", write(tmp_path, text, "lub.toml"), None)
    _, _, p = read_csv(out / "pressure.csv")
    assert np.isfinite(p["p"]).all() and np.abs(p["p"]).max() > 0


def test_console_entry_point(tmp_path):
    exe = shutil.which("thinfilm")
    cmd = [exe] if exe else [sys.executable, "-m", "thinfilm.cli"]
    r = subprocess.run(cmd + ["geometry", "--config", str(EXAMPLES / "geometry_sphere.toml"),
                              "--out", str(tmp_path), "--grid", "9x8"], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    assert (tmp_path / "geometry.csv").is_file()
