"""Experiment orchestration and result/plot files."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .assembly import (
    CollageSystem,
    PiecewiseLinearFn,
    assemble_collage,
    coercivity_lower_bound,
    solve_forward,
)
from .basis import HatBasis, build_multiresolution_basis, merge_breakpoints
from .config import ExperimentConfig
from .criteria import evaluate_criteria
from .data import ObservationSet, add_noise, interpolate_target, load_observations, sample_solution
from .errors import CollageError, ConfigError
from .mco import (
    EpsilonBounds,
    Goals,
    Solution,
    Weights,
    nondominated_indices,
    solve_model1,
    solve_model2,
    solve_model3,
)

log = logging.getLogger(__name__)

PLOT_COLUMNS = ("x", "K_true", "K_rec", "u_true", "u_rec")
PLOT_POINTS = 401


@dataclass
class ResultRow:
    params: dict
    cd: float
    ent: float
    sp: int
    er: float | None = None
    status: str = "ok"
    lam: np.ndarray | None = field(default=None, repr=False)

    @property
    def triple(self):
        return (self.cd, -self.ent, float(self.sp))


def param_columns(params) -> dict:
    if isinstance(params, Weights):
        return {"eta1": params.eta1, "eta2": params.eta2, "eta3": params.eta3}
    if isinstance(params, EpsilonBounds):
        return {"eps1": params.eps1, "eps2": params.eps2}
    if isinstance(params, Goals):
        return {"g1": params.g[0], "g2": params.g[1], "g3": params.g[2]}
    raise TypeError(f"unsupported row parameters {params!r}")


# ---------------------------------------------------------------- pipeline

def build_basis(config: ExperimentConfig) -> HatBasis:
    return build_multiresolution_basis(config.problem.interval, config.interior_counts,
                                       config.include_half_hats)


def true_solution(config: ExperimentConfig) -> Callable:
    """Exact solution if configured, otherwise a fine forward solve with ``k_true``."""
    pr = config.problem
    if pr.u_true is not None:
        return pr.u_true
    if pr.k_true is None:
        raise ConfigError("no u_true or k_true to generate the solution from")
    return solve_forward(pr.k_true, pr.f, pr.bc, max(config.grid_points - 2, 3), pr.interval)


def observations(config: ExperimentConfig) -> ObservationSet:
    """Sampled (and possibly noisy) data, read from file when one is configured."""
    pr = config.problem
    if config.observations is not None:
        obs = load_observations(config.observations, pr.interval, pr.bc)
        return obs
    obs = sample_solution(true_solution(config), config.n_interior, pr.interval, pr.bc)
    return add_noise(obs, config.noise)


def build_target(config: ExperimentConfig, basis: HatBasis) -> PiecewiseLinearFn:
    """Target ``u`` for the collage system.

    ``exact`` interpolates the true solution on a uniform grid merged with the
    basis nodes, so the target's kinks never split a basis element.
    """
    if config.target_mode == "sampled":
        return interpolate_target(observations(config))
    iv = config.problem.interval
    x = merge_breakpoints(np.linspace(iv.x_a, iv.x_b, config.grid_points), basis.breakpoints())
    u = true_solution(config)
    return PiecewiseLinearFn(x, np.asarray(u(x), dtype=float))


def recover_solution(basis: HatBasis, lam, config: ExperimentConfig, label: str = "") -> PiecewiseLinearFn | None:
    """Forward solve with the recovered diffusivity, or None if it is not coercive."""
    pr = config.problem
    if coercivity_lower_bound(basis, lam) <= 0:
        log.warning("%srecovered diffusivity is not positive; skipping forward re-solve", label)
        return None
    lam = np.asarray(lam, dtype=float)
    try:
        return solve_forward(lambda x: basis.values(x) @ lam, pr.f, pr.bc, config.mesh_nodes, pr.interval)
    except CollageError as exc:
        log.warning("%sforward re-solve with recovered diffusivity failed: %s", label, exc)
        return None


def _status(sol: Solution) -> str:
    if not sol.feasible:
        return "infeasible"
    return "ok" if sol.converged else "not_converged"


def solve_row(config: ExperimentConfig, system: CollageSystem, basis: HatBasis, params) -> Solution:
    kw = dict(basis=basis, k_true=config.problem.k_true)
    args = (config.sp_mode, config.box, config.settings)
    if isinstance(params, Weights):
        return solve_model1(system, params, *args, **kw)
    if isinstance(params, EpsilonBounds):
        return solve_model2(system, params, *args, **kw)
    return solve_model3(system, params, *args, **kw)


def row_from_solution(system: CollageSystem, basis: HatBasis, sol: Solution, k_true=None) -> ResultRow:
    """Result row whose criteria are recomputed from the returned coefficients."""
    crit = evaluate_criteria(system, basis, sol.lam, k_true)
    return ResultRow(param_columns(sol.params), crit.cd, crit.ent, crit.sp, crit.er, _status(sol),
                     np.array(sol.lam))


@dataclass
class ExperimentResult:
    rows: list[ResultRow]
    basis: HatBasis
    system: CollageSystem
    target: PiecewiseLinearFn
    all_rows: list[ResultRow] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)


def run_experiment(config: ExperimentConfig, write: bool = True, pareto: bool | None = None) -> ExperimentResult:
    """Build the basis and target, assemble the collage system and solve every
    parameter row.  Row failures are recorded in ``status``.

    With ``pareto`` (default: the ``sweep`` model) only nondominated rows are
    kept in ``rows``; ``all_rows`` always holds every row in grid order.
    """
    if not config.params:
        raise ConfigError("config has no model section to run")
    if pareto is None:
        pareto = config.model == "sweep"
    basis = build_basis(config)
    target = build_target(config, basis)
    system = assemble_collage(basis, None, target, config.problem.f)
    k_true = config.problem.k_true

    def run(params):
        try:
            return row_from_solution(system, basis, solve_row(config, system, basis, params), k_true)
        except CollageError as exc:
            log.warning("row %s failed: %s", params, exc)
            nan = float("nan")
            return ResultRow(param_columns(params), nan, nan, 0, None, f"error:{type(exc).__name__}")

    if config.workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            all_rows = list(pool.map(run, config.params))
    else:
        all_rows = [run(p) for p in config.params]

    rows = all_rows
    if pareto:
        ok = [r for r in all_rows if r.lam is not None]
        rows = sorted((ok[i] for i in nondominated_indices([r.triple for r in ok])),
                      key=lambda r: tuple(-v for v in r.params.values()))
    result = ExperimentResult(rows, basis, system, target, all_rows)
    if write:
        _write_outputs(config, result, pareto)
    return result


def _write_outputs(config: ExperimentConfig, result: ExperimentResult, pareto: bool):
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = list(param_columns(config.params[0]))
    files = [emit_table(result.rows, out / "results.csv", "csv", names)]
    if config.output_format == "markdown":
        files.append(emit_table(result.rows, out / "results.md", "markdown", names))
    if pareto:
        files.append(emit_table(result.all_rows, out / "sweep_all.csv", "csv", names))
    pr = config.problem
    # plots compare against the true solution when one is known, else the target
    u_ref = true_solution(config) if (pr.u_true is not None or pr.k_true is not None) else result.target
    for k, row in enumerate(result.all_rows):
        if row.lam is None:
            continue
        files.append(emit_coefficients(row.lam, out / "coefficients" / f"row_{k:03d}.csv"))
        if config.plot:
            u_rec = recover_solution(result.basis, row.lam, config, f"row {k}: ")
            files.append(emit_plot_data(result.basis, row.lam, pr.k_true, u_ref,
                                        u_rec, out / "plots" / f"row_{k:03d}.csv"))
    result.files = files


# ---------------------------------------------------------------- files

def _real(v: float | None) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    return f"{float(v):.15g}"


def emit_table(rows: Sequence[ResultRow], path, format: str = "csv",
               param_names: Sequence[str] = ("eta1", "eta2", "eta3")) -> Path:
    """Write result rows as CSV (``<params>,CD,ENT,SP,ER,status``) or a markdown table."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(rows[0].params) if rows else list(param_names)
    if format == "csv":
        lines = [",".join(names + ["CD", "ENT", "SP", "ER", "status"])]
        for r in rows:
            cells = [_real(r.params[n]) for n in names]
            cells += [_real(r.cd), _real(r.ent), str(int(r.sp)), _real(r.er), r.status]
            lines.append(",".join(cells))
    elif format == "markdown":
        heads = [_MD_NAMES.get(n, n) for n in names] + ["CD", "ENT", "SP", "ER"]
        lines = ["| " + " | ".join(heads) + " |", "|" + "---|" * len(heads)]
        for r in rows:
            cells = [_real(r.params[n]) for n in names]
            cells += [_real(r.cd), f"{r.ent:.6f}", str(int(r.sp)), _real(r.er)]
            lines.append("| " + " | ".join(cells) + " |")
    else:
        raise ValueError(f"unknown table format {format!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


_MD_NAMES = {"eta1": "η1", "eta2": "η2", "eta3": "η3", "eps1": "ε1", "eps2": "ε2"}


def parse_table(path) -> list[ResultRow]:
    """Read a CSV written by :func:`emit_table`."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        names = header[: header.index("CD")]
        rows = []
        for rec in reader:
            vals = dict(zip(header, rec))
            rows.append(ResultRow(
                params={n: float(vals[n]) for n in names},
                cd=float(vals["CD"]) if vals["CD"] else float("nan"),
                ent=float(vals["ENT"]) if vals["ENT"] else float("nan"),
                sp=int(vals["SP"]),
                er=float(vals["ER"]) if vals["ER"] else None,
                status=vals.get("status", ""),
            ))
    return rows


def emit_coefficients(lam, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,lambda\n")
        for i, v in enumerate(np.asarray(lam, dtype=float)):
            fh.write(f"{i},{float(v)!r}\n")
    return path


def emit_plot_data(basis: HatBasis, lam, k_true: Callable | None, u_target: Callable | None,
                   u_recovered: Callable | None, path, points: int = PLOT_POINTS) -> Path:
    """``x,K_true,K_rec,u_true,u_rec`` on a uniform grid; missing curves are empty fields."""
    iv = basis.interval
    x = np.linspace(iv.x_a, iv.x_b, points)
    cols = [x, _curve(k_true, x), basis.values(x) @ np.asarray(lam, dtype=float),
            _curve(u_target, x), _curve(u_recovered, x)]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(PLOT_COLUMNS) + "\n")
        for k in range(points):
            fh.write(",".join("" if c is None else repr(float(c[k])) for c in cols) + "\n")
    return path


def _curve(fn, x):
    if fn is None:
        return None
    return np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape)


def read_plot_data(path) -> dict[str, np.ndarray]:
    """Columns of a plot file; empty fields become NaN."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) if v else np.nan for v in rec] for rec in reader]
    arr = np.array(data, dtype=float).reshape(-1, len(header))
    return {name: arr[:, k] for k, name in enumerate(header)}
