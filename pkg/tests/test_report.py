import math

import numpy as np
import pytest

from collage_mco.assembly import collage_distance
from collage_mco.config import parse_config
from collage_mco.criteria import entropy, l2_error, sparsity, SparsityMode
from collage_mco.errors import ConfigError
from collage_mco.mco import dominates
from collage_mco.report import (
    PLOT_COLUMNS,
    ResultRow,
    emit_plot_data,
    emit_table,
    parse_table,
    read_plot_data,
    recover_solution,
    run_experiment,
)

from conftest import K_TRUE, U_TRUE

DIFFUSION = {
    "problem": {"f": [-1.0, 12.0], "k_true": [1.0, 3.0], "u_true": [0.0, 1.0, -1.0]},
    "optimizer": {"max_iter": 300},
}


def diffusion(tmp_path, **extra):
    raw = {**DIFFUSION, "output": {"dir": str(tmp_path / "out")}, **extra}
    if "model1" not in raw and not any(k in raw for k in ("model2", "model3", "sweep")):
        raw["model1"] = {"weights": [[1, 0, 0], [0.5, 0.3, 0.2], [0, 0, 1]]}
    raw = {k: v for k, v in raw.items() if v is not None}
    return parse_config(raw)


def test_emit_table_shapes(tmp_path):
    p = emit_table([], tmp_path / "empty.csv")
    assert p.read_text(encoding="utf-8") == "eta1,eta2,eta3,CD,ENT,SP,ER,status\n"
    row = ResultRow({"eta1": 1.0, "eta2": 0.0, "eta3": 0.0}, 1 / 3, math.log(38), 38, math.sqrt(7))
    p = emit_table([row], tmp_path / "one.csv")
    lines = p.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert lines[1] == "1,0,0,0.333333333333333,3.63758615972639,38,2.64575131106459,ok"


def test_emit_table_roundtrip(tmp_path):
    rows = [ResultRow({"eta1": 0.9, "eta2": 0.1, "eta3": 0.0}, 1.2345678901234567e-9, 3.5, 38, 0.04, "ok"),
            ResultRow({"eta1": 0.0, "eta2": 0.0, "eta3": 1.0}, 12.5, 0.0, 0, None, "not_converged")]
    back = parse_table(emit_table(rows, tmp_path / "r.csv"))
    for a, b in zip(rows, back):
        assert a.params == b.params and a.sp == b.sp and a.status == b.status
        assert float(f"{a.cd:.15g}") == b.cd and float(f"{a.ent:.15g}") == b.ent
        assert (a.er is None and b.er is None) or float(f"{a.er:.15g}") == b.er
    # writing parsed rows reproduces the file
    first = (tmp_path / "r.csv").read_bytes()
    assert emit_table(back, tmp_path / "r2.csv").read_bytes() == first


def test_emit_table_markdown_and_params(tmp_path):
    rows = [ResultRow({"eps1": -1.0, "eps2": 5.0}, 0.5, 1.0, 3, None)]
    text = emit_table(rows, tmp_path / "r.md", "markdown").read_text(encoding="utf-8")
    assert text.splitlines()[0] == "| ε1 | ε2 | CD | ENT | SP | ER |"
    assert text.splitlines()[2].startswith("| -1 | 5 | 0.5 | 1.000000 | 3 |")
    with pytest.raises(ValueError):
        emit_table(rows, tmp_path / "r.x", "xlsx")


def test_plot_data(tmp_path, basis38, lam_star, system38):
    p = emit_plot_data(basis38, lam_star, K_TRUE, U_TRUE, None, tmp_path / "p.csv")
    d = read_plot_data(p)
    assert tuple(d) == PLOT_COLUMNS and d["x"].size == 401
    assert np.abs(d["K_rec"] - d["K_true"]).max() <= 1e-10
    assert np.all(np.isnan(d["u_rec"]))
    d = read_plot_data(emit_plot_data(basis38, np.zeros(38), None, None, None, tmp_path / "z.csv"))
    assert np.all(d["K_rec"] == 0) and np.all(np.isnan(d["K_true"]))


def test_recover_solution_noncoercive(basis38, caplog):
    cfg = parse_config({**DIFFUSION, "model1": {"weights": [[1, 0, 0]]}})
    assert recover_solution(basis38, np.zeros(38), cfg) is None
    assert "not positive" in caplog.text
    u = recover_solution(basis38, basis38.interpolant(K_TRUE), cfg)
    assert np.abs(u.values - U_TRUE(u.breakpoints)).max() < 1e-4


def test_run_experiment_rows(tmp_path):
    cfg = diffusion(tmp_path)
    res = run_experiment(cfg)
    assert len(res.rows) == 3
    for row in res.rows:
        assert abs(row.cd - collage_distance(res.system, row.lam)) <= 1e-12
        assert abs(row.ent - entropy(row.lam)) <= 1e-12
        assert row.sp == sparsity(row.lam, SparsityMode("l0"))
        assert abs(row.er - l2_error(res.basis, row.lam, K_TRUE)) <= 1e-12
    last = res.rows[-1]
    assert last.sp == 0 and last.er == pytest.approx(math.sqrt(7), abs=1e-6)
    out = cfg.output_dir
    assert parse_table(out / "results.csv")[0].params == {"eta1": 1.0, "eta2": 0.0, "eta3": 0.0}
    assert sorted(p.name for p in (out / "coefficients").iterdir()) == ["row_000.csv", "row_001.csv", "row_002.csv"]
    plot = read_plot_data(out / "plots" / "row_002.csv")
    assert np.all(np.isnan(plot["u_rec"]))  # lam = 0 is not coercive
    plot = read_plot_data(out / "plots" / "row_000.csv")
    assert np.nanmax(np.abs(plot["u_rec"] - plot["u_true"])) < 1e-2


def test_blind_recovery_has_no_er(tmp_path):
    raw = {"problem": {"f": [-1.0, 12.0], "u_true": [0.0, 1.0, -1.0]}, "model1": {"weights": [[1, 0, 0]]},
           "optimizer": {"max_iter": 200}, "output": {"dir": str(tmp_path)}}
    res = run_experiment(parse_config(raw))
    assert res.rows[0].er is None
    assert (tmp_path / "results.csv").read_text(encoding="utf-8").splitlines()[1].split(",")[6] == ""


def test_pipeline_determinism(tmp_path):
    a = diffusion(tmp_path / "a", noise={"relative_level": 0.01}, target={"mode": "sampled", "n_interior": 23})
    b = diffusion(tmp_path / "b", noise={"relative_level": 0.01}, target={"mode": "sampled", "n_interior": 23})
    run_experiment(a)
    run_experiment(b)
    for name in ["results.csv", "coefficients/row_001.csv", "plots/row_000.csv"]:
        assert (a.output_dir / name).read_bytes() == (b.output_dir / name).read_bytes()


def test_model2_and_model3_tables(tmp_path):
    cfg = parse_config({**DIFFUSION, "model2": {"bounds": [[0.0, float("inf")], [-3.0, 20.0]]},
                        "output": {"dir": str(tmp_path / "m2")}})
    res = run_experiment(cfg)
    assert list(res.rows[0].params) == ["eps1", "eps2"]
    assert (cfg.output_dir / "results.csv").read_text(encoding="utf-8").startswith("eps1,eps2,CD,")
    cfg = parse_config({**DIFFUSION, "model3": {"goals": [[0.0, -3.0, 10.0]], "theta_minus": [0, 0, 0]},
                        "output": {"dir": str(tmp_path / "m3")}})
    res = run_experiment(cfg)
    assert list(res.rows[0].params) == ["g1", "g2", "g3"]


def test_row_errors_are_recorded(tmp_path, monkeypatch):
    from collage_mco import report
    from collage_mco.errors import NumericError

    calls = []

    def flaky(config, system, basis, params):
        calls.append(params)
        if len(calls) == 1:
            raise NumericError("boom")
        return real(config, system, basis, params)

    real = report.solve_row
    monkeypatch.setattr(report, "solve_row", flaky)
    res = run_experiment(diffusion(tmp_path))
    assert res.rows[0].status == "error:NumericError" and res.rows[0].lam is None
    assert len(res.rows) == 3 and res.rows[1].status != res.rows[0].status


def test_sweep_keeps_only_nondominated(tmp_path):
    cfg = diffusion(tmp_path, model1=None, sweep={"simplex_step": 0.5})
    res = run_experiment(cfg)
    assert len(res.all_rows) == 6
    for r in res.rows:
        assert not any(dominates(o.triple, r.triple) for o in res.all_rows)
    assert (cfg.output_dir / "sweep_all.csv").exists()


def test_run_without_model(tmp_path):
    cfg = parse_config({**DIFFUSION, "output": {"dir": str(tmp_path)}})
    with pytest.raises(ConfigError):
        run_experiment(cfg, write=False)


POPULATION = {
    "problem": {"k_true": [1.0, 1.0], "f": [1.0, 4.0], "u_true": [1.0, 1.0, -1.0], "bc": [1.0, 1.0]},
    "target": {"mode": "sampled", "n_interior": 9},
}


@pytest.mark.xfail(strict=True, reason="nine samples with a piecewise-linear target leave ER near 0.40 "
                                       "on the whole zero-residual set; see the decisions ledger")
def test_population_clean_er_below_tenth():
    cfg = parse_config({**POPULATION, "model1": {"weights": [[1.0, 0.0, 0.0]]}})
    assert run_experiment(cfg, write=False).rows[0].er <= 0.1


def test_population_plot_files(tmp_path):
    cfg = parse_config({**POPULATION, "model1": {"weights": [[1.0, 0.0, 0.0], [0.1, 0.9, 0.0]]},
                        "output": {"dir": str(tmp_path)}})
    res = run_experiment(cfg)
    # w = (1, 0, 0): the zero-residual K dips below 0, so u_rec is omitted
    d = read_plot_data(tmp_path / "plots" / "row_000.csv")
    assert np.all(np.isnan(d["u_rec"])) and np.nanmin(d["K_rec"]) < 0
    # w = (0.1, 0.9, 0): coercive, and the re-solved u tracks the true one
    d = read_plot_data(tmp_path / "plots" / "row_001.csv")
    assert np.abs(d["u_rec"] - d["u_true"]).max() <= 0.05
    assert res.rows[1].er < res.rows[0].er
