"""CLI tests: commands, exit codes, determinism of output files."""

import os

import numpy as np
import pytest

from motslab import cli


def run(args, tmp_path, sub="run"):
    out = tmp_path / sub
    return cli.main(args + ["--out", str(out)]), out


def test_catalog(tmp_path, capsys):
    code, out = run(["catalog"], tmp_path)
    assert code == 0
    assert (out / "catalog.csv").exists()
    assert "schwarzschild_isotropic" in capsys.readouterr().out


def test_constraints_minkowski(tmp_path):
    code, out = run(["constraints", "--data", "minkowski", "--samples", "50"],
                    tmp_path)
    assert code == 0
    lines = (out / "constraints.csv").read_text().splitlines()
    assert lines[0] == "x,y,z,mu,J_x,J_y,J_z,J_norm,dec"
    assert len(lines) == 51
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    assert np.max(np.abs(data[:, 3])) < 1e-10


def test_surface_summary(tmp_path, capsys):
    code, out = run(["surface", "--data", "minkowski",
                     "--surface", "sphere:r=1", "--grid", "64x128"], tmp_path)
    assert code == 0
    text = (out / "surface.csv").read_text().splitlines()
    row = dict(zip(text[0].split(","), text[1].split(",")))
    assert abs(float(row["hawking_energy"])) < 1e-6
    assert abs(float(row["area"]) - 4.0 * np.pi) < 1e-5


def test_eigen_horizon(tmp_path):
    code, out = run(["eigen", "--operator", "Ls", "--bc", "closed",
                     "--data", "schwarzschild-iso:m=1",
                     "--surface", "sphere:r=0.5", "--grid", "64x128"],
                    tmp_path)
    assert code == 0
    text = (out / "eigen.csv").read_text().splitlines()
    row = dict(zip(text[0].split(","), text[1].split(",")))
    assert abs(float(row["lambda1"]) - 0.25) < 0.01 * 0.25
    assert row["positive"] == "true"
    assert (out / "eigenfunction.csv").exists()


def test_audit_index_exit_codes(tmp_path):
    code, _ = run(["audit", "--theorem", "index", "--genus", "0",
                   "--boundary", "10", "--index", "1"], tmp_path)
    assert code == 1
    code, _ = run(["audit", "--theorem", "index", "--genus", "0",
                   "--boundary", "3", "--index", "1"], tmp_path, "ok")
    assert code == 0
    code, _ = run(["audit", "--theorem", "index", "--genus", "0",
                   "--boundary", "3", "--index", "2"], tmp_path, "na")
    assert code == 2


def test_audit_surface_theorems(tmp_path):
    code, out = run(["audit", "--theorem", "cy-estimate",
                     "--data", "minkowski", "--surface", "sphere:r=1",
                     "--grid", "32x64"], tmp_path)
    assert code == 0
    text = (out / "audit_cy-estimate.csv").read_text()
    assert "verdict,Holds" in text

    code, _ = run(["audit", "--theorem", "cohn-vossen",
                   "--data", "schwarzschild-iso:m=1",
                   "--surface", "sphere:r=0.5", "--grid", "32x64"],
                  tmp_path, "cv")
    assert code == 2


def test_audit_collar(tmp_path):
    code, out = run(["audit", "--theorem", "collar", "--data", "hyperboloidal",
                     "--surface", "sphere:r=1", "--grid", "16x32",
                     "--zeta", "0.2"], tmp_path)
    assert code == 0
    text = (out / "audit_collar.csv").read_text().splitlines()
    assert abs(float(text[1].split(",")[2]) - 3.0) < 1e-9


def test_numerical_failure_exit_code(tmp_path):
    # surface falls outside the excised Schwarzschild chart domain
    code, _ = run(["surface", "--data", "schwarzschild-iso:m=1",
                   "--surface", "sphere:r=0.01", "--grid", "16x32"], tmp_path)
    assert code == 3


def test_sweep_eigen_rows(tmp_path):
    code, out = run(["sweep", "--sweep-command", "eigen",
                     "--sweep-param", "surface:r",
                     "--sweep-from", "0.4", "--sweep-to", "0.6",
                     "--sweep-steps", "3",
                     "--operator", "Ls", "--bc", "closed",
                     "--data", "schwarzschild-iso:m=1",
                     "--surface", "sphere:r=0.5", "--grid", "16x32",
                     "--workers", "2"], tmp_path)
    assert code == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("step,")


def test_config_file_and_flag_override(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("data = minkowski\nsurface = sphere:r=2.0\n"
                       "grid = 16x32\n")
    code, out = run(["surface", "--config", str(cfgfile),
                     "--surface", "sphere:r=1.0"], tmp_path)
    assert code == 0
    row = (out / "surface.csv").read_text().splitlines()[1]
    # the flag override wins over the config value
    assert abs(float(row.split(",")[3]) - 4.0 * np.pi) < 1e-3


def test_determinism_byte_identical(tmp_path):
    args = ["constraints", "--data", "schwarzschild-pg:m=1",
            "--samples", "64", "--seed", "99"]
    _, out1 = run(args, tmp_path, "a")
    _, out2 = run(args, tmp_path, "b")
    assert (out1 / "constraints.csv").read_bytes() == \
        (out2 / "constraints.csv").read_bytes()

    args = ["eigen", "--operator", "L", "--bc", "robin:free",
            "--data", "minkowski", "--surface", "disk:r=1.0",
            "--grid", "16x32"]
    _, out1 = run(args, tmp_path, "c")
    _, out2 = run(args, tmp_path, "d")
    assert (out1 / "eigen.csv").read_bytes() == (out2 / "eigen.csv").read_bytes()
    assert (out1 / "eigenfunction.csv").read_bytes() == \
        (out2 / "eigenfunction.csv").read_bytes()


def test_graph_surface_from_file(tmp_path):
    import numpy as np
    from motslab import grids as g

    grid = g.make_grid(g.SPHERE, 16, 32)
    rho = 1.0 + 0.1 * np.sin(grid.meshgrid()[0]) ** 2
    path = tmp_path / "rho.csv"
    path.write_text("rho\n" + "\n".join("%.17g" % v for v in rho.ravel()))
    code, out = run(["surface", "--data", "minkowski",
                     "--surface", f"graph:file={path}", "--grid", "16x32"],
                    tmp_path)
    assert code == 0
    row = (out / "surface.csv").read_text().splitlines()[1].split(",")
    area = float(row[3])
    assert 4.0 * np.pi < area < 4.0 * np.pi * 1.21**2


def test_sweep_audit_exit_precedence(tmp_path):
    # indices l = 8, 10 straddle the even-genus threshold: one step violates
    code, out = run(["sweep", "--sweep-command", "audit",
                     "--sweep-param", "surface:r",
                     "--sweep-from", "0.8", "--sweep-to", "1.2",
                     "--sweep-steps", "2",
                     "--theorem", "cy-estimate", "--data", "hyperboloidal",
                     "--surface", "sphere:r=1.0", "--grid", "16x32"],
                    tmp_path)
    # r = 1.2 sphere in the de Sitter slice has H < |P|: HypothesisUnmet
    assert code == 2
    lines = (out / "sweep.csv").read_text().splitlines()
    assert len(lines) == 3
    assert lines[1].endswith("Holds") and lines[2].endswith("HypothesisUnmet")
