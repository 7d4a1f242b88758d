import subprocess
import sys

from alloc_arena import __version__
from alloc_arena.cli import main


def test_allocate_greedy(tmp_path, capsys):
    probs = tmp_path / "p.txt"
    probs.write_text("0.5\n0.1")
    assert main(["allocate", "--probs", str(probs), "--budget", "3", "--tau", "1", "--method", "greedy"]) == 0
    assert capsys.readouterr().out == "2 1\n"


def test_allocate_lagrangian(tmp_path, capsys):
    probs = tmp_path / "p.txt"
    probs.write_text("0.5\n0.1\n")
    assert main(["allocate", "--probs", str(probs), "--budget", "3", "--method", "lagrangian"]) == 0
    assert capsys.readouterr().out == "2 1\n"


def test_allocate_budget_too_small(tmp_path, capsys):
    probs = tmp_path / "p.txt"
    probs.write_text("0.5\n0.1\n0.2\n")
    assert main(["allocate", "--probs", str(probs), "--budget", "2"]) == 1


def test_missing_config_exit_one(tmp_path, capsys):
    path = tmp_path / "missing.cfg"
    assert main(["run", "--config", str(path)]) == 1
    assert str(path) in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main(["allocate"]) == 1
    assert main(["frobnicate"]) == 1
    assert main([]) == 1


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_unwritable_output_exit_two(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_sims = 1\nenv.horizon = 12\nenv.shifts = none\n")
    assert main(["run", "--config", str(cfg), "--out", str(blocker / "sub")]) == 2


def _tiny_config(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("n_sims = 2\nworkers = 1\nenv.n_types = 4\nenv.n_units = 40\nenv.horizon = 20\n"
                   "env.shifts = 0:12:0.7\nburn_in = 5\n")
    return cfg


def test_run_and_compare(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "--config", str(_tiny_config(tmp_path)), "--out", str(out), "--seed", "5"]) == 0
    assert (out / "metrics.csv").is_file() and (out / "run_metadata.json").is_file()
    capsys.readouterr()
    assert main(["compare", "--csv", str(out / "metrics.csv"), "--a", "oracle", "--b", "static",
                 "--burn-in", "5"]) == 0
    assert "p_value=" in capsys.readouterr().out
    assert main(["compare", "--csv", str(out / "metrics.csv"), "--a", "oracle", "--b", "nobody"]) == 1


def test_seed_precedence(tmp_path, monkeypatch):
    cfg = _tiny_config(tmp_path)
    monkeypatch.setenv("ALLOC_ARENA_SEED", "11")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "env")]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "flag"), "--seed", "11"]) == 0
    monkeypatch.delenv("ALLOC_ARENA_SEED")
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "plain")]) == 0
    env = (tmp_path / "env" / "metrics.csv").read_bytes()
    assert env == (tmp_path / "flag" / "metrics.csv").read_bytes()
    assert env != (tmp_path / "plain" / "metrics.csv").read_bytes()


def test_bad_seed_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ALLOC_ARENA_SEED", "abc")
    assert main(["run", "--config", str(_tiny_config(tmp_path)), "--out", str(tmp_path / "o")]) == 1


def test_module_entry_point(tmp_path):
    probs = tmp_path / "p.txt"
    probs.write_text("0.5\n0.1\n")
    res = subprocess.run([sys.executable, "-m", "alloc_arena", "allocate", "--probs", str(probs), "--budget", "3",
                          "--method", "greedy"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "2 1\n"
