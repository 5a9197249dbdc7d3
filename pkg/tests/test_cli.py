import subprocess
import sys
from pathlib import Path

import pytest

from collage_mco.cli import main
from collage_mco.report import parse_table

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

POP = """seed = 0
[problem]
k_true = [1.0, 1.0]
f = [1.0, 4.0]
u_true = [1.0, 1.0, -1.0]
bc = [1.0, 1.0]
[target]
mode = "sampled"
n_interior = 9
[noise]
relative_level = 0.01
[model1]
weights = [[1.0, 0.0, 0.0], [0.96, 0.02, 0.02]]
[optimizer]
max_iter = 300
[forward]
mesh_nodes = 63
"""


def write(tmp_path, text, name="c.toml"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_validate_ok(capsys):
    assert main(["validate", "--config", str(CONFIGS / "diffusion_entropy.toml")]) == 0
    assert "model1 with 11 row(s)" in capsys.readouterr().out


def test_invert_without_config(capsys):
    assert main(["invert"]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err and "--config" in err


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["invert", "--seed", "x", "--config", "c.toml"]) == 1


def test_config_errors(tmp_path):
    assert main(["validate", "--config", str(tmp_path / "nope.toml")]) == 1
    assert main(["validate", "--config", str(write(tmp_path, "[problem]\nf = [1.0]\nk_true = [1.0]\n"))]) == 1
    bad_obs = write(tmp_path, POP.replace('n_interior = 9', 'observations = "obs.csv"'))
    (tmp_path / "obs.csv").write_text("x,u\n0.5,1\n0.4,1\n", encoding="utf-8")
    assert main(["invert", "--config", str(bad_obs), "--out", str(tmp_path / "o")]) == 1


def test_numeric_failure_exit_code(tmp_path):
    cfg = write(tmp_path, POP.replace("k_true = [1.0, 1.0]", "k_true = [-1.0, 1.0]"))
    assert main(["forward", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_forward(tmp_path):
    cfg = write(tmp_path, POP)
    assert main(["forward", "--config", str(cfg), "--out", str(tmp_path / "f")]) == 0
    lines = (tmp_path / "f" / "forward.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "x,u" and len(lines) == 66
    x, u = map(float, lines[33].split(","))
    assert u == pytest.approx(x - x * x + 1, abs=1e-4)


def test_synth_then_invert(tmp_path, capsys):
    cfg = write(tmp_path, POP)
    assert main(["synth", "--config", str(cfg), "--out", str(tmp_path / "s"), "--seed", "4"]) == 0
    obs = tmp_path / "s" / "observations.csv"
    assert obs.read_text(encoding="utf-8").count("\n") == 10
    inv = write(tmp_path, POP.replace("n_interior = 9", f'observations = "{obs.as_posix()}"'), "inv.toml")
    assert main(["invert", "--config", str(inv), "--out", str(tmp_path / "r")]) == 0
    rows = parse_table(tmp_path / "r" / "results.csv")
    assert len(rows) == 2 and all(r.er is not None for r in rows)
    assert capsys.readouterr().out.count("\n") >= 3


def test_seed_changes_noise(tmp_path):
    cfg = write(tmp_path, POP)
    main(["synth", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "1"])
    main(["synth", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "2"])
    main(["synth", "--config", str(cfg), "--out", str(tmp_path / "c"), "--seed", "1"])
    a, b, c = ((tmp_path / d / "observations.csv").read_bytes() for d in "abc")
    assert a == c and a != b


def test_sweep_command(tmp_path):
    cfg = write(tmp_path, POP)
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "w")]) == 0
    assert (tmp_path / "w" / "sweep_all.csv").exists()


def test_invert_needs_model(tmp_path):
    cfg = write(tmp_path, POP.replace("[model1]\nweights = [[1.0, 0.0, 0.0], [0.96, 0.02, 0.02]]\n", ""))
    assert main(["invert", "--config", str(cfg)]) == 1
    assert main(["validate", "--config", str(cfg)]) == 1


def test_console_script_module(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "collage_mco.cli", "validate", "--config",
                           str(CONFIGS / "population.toml")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
