import math
import subprocess
import sys

import numpy as np
import pytest

from bosecrit import cli
from bosecrit.io import read_csv
from bosecrit.linalg import ConvergenceError

SMALL = {
    "portrait": ["n_particles=20", "alphas=0.0, 0.8, 2.0", "n_z=11", "n_phi=16", "orbit_points=20"],
    "spectrum": ["n_particles=30", "alpha_min=0", "alpha_max=2", "alpha_steps=21", "levels=8"],
    "dos": ["n_particles=2000", "energy_window=20"],
    "ladder": ["n_list=1e6, 1e9, 1e23", "ladder_window=6"],
    "otoc": ["n_list=50, 100", "t_max=10", "n_steps=200"],
    "scaling": ["n_list=30, 300, 3000", "scan_min=0.95", "scan_max=1.4", "scan_steps=19"],
}


def run(tmp_path, command, extra=(), threads=1, name="out"):
    argv = [command, "--out", str(tmp_path / name), "--threads", str(threads)]
    for s in [*SMALL[command], *extra]:
        argv += ["--set", s]
    return cli.main(argv), tmp_path / name


def snapshot(folder):
    return {p.name: p.read_bytes() for p in sorted(folder.iterdir())}


@pytest.mark.parametrize("command", sorted(SMALL))
def test_commands_are_deterministic(tmp_path, command):
    code, a = run(tmp_path, command, name="a")
    assert code == 0
    code, b = run(tmp_path, command, name="b", threads=3)
    assert code == 0
    sa, sb = snapshot(a), snapshot(b)
    assert sa and sa == sb
    for blob in sa.values():
        assert blob.startswith(b"# bosecrit ")
        assert f"# command = {command}".encode() in blob


def test_portrait_contents(tmp_path):
    _, out = run(tmp_path, "portrait")
    grid, _ = read_csv(out / "portrait_alpha0.csv")
    w = grid["omega"].reshape(11, 16)
    assert np.all(w == w[:, :1])
    for tag in ("0", "0.8", "2"):
        orbits, meta = read_csv(out / f"orbits_alpha{tag}.csv")
        assert np.unique(orbits["m"]).size == 20 // 2 + 1 == int(meta["contours"])
    _, meta2 = read_csv(out / "orbits_alpha2.csv")
    _, meta08 = read_csv(out / "orbits_alpha0.8.csv")
    assert "saddle_phi" in meta2 and "saddle_phi" not in meta08


def test_spectrum_contents(tmp_path):
    _, out = run(tmp_path, "spectrum")
    cols, _ = read_csv(out / "spectrum.csv")
    free = cols["alpha"] == 0.0
    assert np.array_equal(cols["E_exact"][free], 2.0 * np.arange(9))
    assert np.allclose(cols["E_ebk"][free], 2.0 * np.arange(9), atol=1e-10)
    cross, _ = read_csv(out / "separatrix_crossings.csv")
    assert np.all((cross["alpha"] > 1.0) & (cross["alpha"] <= 2.0))
    assert (out / "gaps.csv").exists()


def test_ladder_heisenberg_column(tmp_path):
    _, out = run(tmp_path, "ladder")
    for n in ("1000000", "1000000000", str(10**23)):
        cols, meta = read_csv(out / f"ladder_N{n}.csv")
        assert np.allclose(cols["deltaE_times_tau"], 2 * math.pi, rtol=1e-14)
    summary, _ = read_csv(out / "ladder_summary.csv")
    assert np.all(np.diff(summary["max_central_deviation"]) < 0)


def test_otoc_files_start_at_zero(tmp_path):
    _, out = run(tmp_path, "otoc")
    for n in (50, 100):
        cols, _ = read_csv(out / f"otoc_N{n}.csv")
        assert cols["C"][0] == 0.0 and cols["t"][-1] == 10.0
        assert np.all(cols["C"] >= 0)
        report = (out / f"otoc_fit_N{n}.txt").read_text()
        assert "rate = " in report and "heisenberg_period = " in report


def test_scaling_report(tmp_path):
    _, out = run(tmp_path, "scaling")
    text = (out / "gap_scaling_fit.txt").read_text()
    assert "ci95_alpha = " in text and "exponent_energy = " in text


def test_config_file_with_override(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("command = dos\nn_particles = 500\nenergy_window = 10\n")
    code = cli.main(["dos", "--config", str(cfg), "--set", "energy_window=12", "--out", str(tmp_path / "o")])
    assert code == 0
    _, meta = read_csv(tmp_path / "o" / "dos.csv")
    assert meta["energy_window"] == "12.0"


def test_exit_code_for_config_errors(tmp_path, capsys):
    assert run(tmp_path, "dos", ["bogus=1"])[0] == 2
    assert run(tmp_path, "dos", ["solver_tol=0"])[0] == 2
    assert cli.main(["dos", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert cli.main(["dos", "--threads", "0", "--out", str(tmp_path / "x")]) == 2
    # no separatrix below alpha = 1
    assert run(tmp_path, "dos", ["alpha=0.5"])[0] == 2
    assert "config error" in capsys.readouterr().err


def test_exit_code_for_solver_failure(tmp_path, monkeypatch, capsys):
    def fail(*a, **k):
        raise ConvergenceError("no convergence", np.array([1.0]))

    monkeypatch.setattr(cli.qm, "diagonalize", fail)
    assert run(tmp_path, "dos")[0] == 1
    assert "solver failure" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "bosecrit", "ladder", "--set", "n_list=1e6, 1e9",
                          "--out", str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0
    assert "ladder_summary.csv" in res.stdout
