import numpy as np
import pytest
from hypothesis import given, strategies as st

from bosecrit import __version__
from bosecrit.config import ConfigError, ExperimentConfig, load_config, parse_config
from bosecrit.io import read_csv, spectrum_csv, write_csv, write_report

finite = st.floats(1e-300, 1e300)


@given(alpha=st.floats(0.0, 10.0), tol=finite, n=st.integers(1, 10**50),
       ns=st.lists(st.integers(1, 10**45), min_size=1, max_size=5), entropy=st.booleans())
def test_round_trip_is_lossless(alpha, tol, n, ns, entropy):
    cfg = ExperimentConfig(command="otoc", alpha=alpha, solver_tol=tol, n_particles=n,
                           n_list=tuple(ns), entropy=entropy)
    assert parse_config(cfg.dumps()) == cfg


def test_huge_particle_numbers_stay_exact():
    cfg = parse_config("n_list = 1e6, 1e23, 1e42")
    assert cfg.n_list == (10**6, 10**23, 10**42)
    assert all(type(x) is int for x in cfg.n_list)
    with pytest.raises(ConfigError):
        parse_config("n_particles = 1.5")


def test_file_and_overrides(tmp_path):
    path = ExperimentConfig(command="dos", alpha=1.5).save(tmp_path / "a.cfg")
    cfg = load_config(path, ["alpha=3.0", "alpha = 2.5", "entropy=off"])
    assert cfg.command == "dos" and cfg.alpha == 2.5 and cfg.entropy is False


def test_comments_and_blank_lines():
    cfg = parse_config("# a comment\n\n  command = ladder  \nladder_method = asymptotic\n")
    assert cfg.command == "ladder" and cfg.ladder_method == "asymptotic"


@pytest.mark.parametrize("text", [
    "bogus = 1", "alpha = two", "no equals sign", "solver_tol = 0", "leak_tol = -1e-3",
    "command = plot", "mode_cutoff = 3", "n_list = 10, -5", "alpha_min = 2\nalpha_max = 1",
    "ladder_method = guess", "entropy = maybe", "n_steps = 1",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_csv_header_and_read_back(tmp_path):
    x = np.array([0.1, 1 / 3, 1e-300])
    path = write_csv(tmp_path / "sub" / "t.csv", {"x": x, "label": ["a", "b", "c"]},
                     {"alpha": 2.0, "n_list": (1, 2), "flag": True})
    lines = path.read_text().splitlines()
    assert lines[0] == f"# bosecrit {__version__}"
    assert "# alpha = 2.0" in lines and "# n_list = 1 2" in lines and "# flag = true" in lines
    cols, meta = read_csv(path)
    assert np.array_equal(cols["x"], x)
    assert cols["label"] == ["a", "b", "c"]
    assert meta["alpha"] == "2.0"


def test_csv_rejects_ragged_columns(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "r.csv", {"a": [1, 2], "b": [1]})


def test_report_and_spectrum(tmp_path):
    rep = write_report(tmp_path / "r.txt", {"rate": 3.9, "ok": False}).read_text()
    assert "rate = 3.9\n" in rep and "ok = false\n" in rep
    cols, _ = read_csv(spectrum_csv(tmp_path / "s.csv", [-1.0, 0.5, 2.0]))
    assert np.array_equal(cols["E_minus_E0"], [0.0, 1.5, 3.0])
