"""TOML experiment configuration.

Functions of ``x`` (diffusivity, source, exact solution) are polynomials
given as coefficient lists in ascending powers: ``[1.0, 3.0]`` is
``1 + 3x``.  Exactly one of the sections ``[model1]``, ``[model2]``,
``[model3]`` or ``[sweep]`` selects what ``invert``/``sweep`` run.  See
``configs/`` in the repository for complete examples.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from numpy.polynomial import Polynomial

from .assembly import DirichletBC
from .basis import Interval
from .criteria import SparsityMode
from .data import NoiseSpec
from .errors import ConfigError
from .mco import Box, EpsilonBounds, Goals, OptimizerSettings, Weights

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MODEL_SECTIONS = ("model1", "model2", "model3", "sweep")

_KNOWN = {
    "": {"seed", "problem", "basis", "target", "noise", "sparsity", "box", "optimizer",
         "forward", "output", *MODEL_SECTIONS},
    "problem": {"interval", "k_true", "f", "u_true", "bc"},
    "basis": {"interior_counts", "include_half_hats"},
    "target": {"mode", "grid_points", "n_interior", "observations"},
    "noise": {"relative_level", "seed", "distribution"},
    "sparsity": {"kind", "alpha", "tau"},
    "box": {"lo", "hi"},
    "optimizer": {"max_iter", "gtol", "eps_smooth", "n_random_starts", "workers",
                  "penalty_start", "penalty_max", "penalty_tol"},
    "forward": {"mesh_nodes"},
    "output": {"dir", "format", "plot"},
    "model1": {"weights"},
    "sweep": {"weights", "simplex_step"},
    "model2": {"bounds"},
    "model3": {"goals", "theta_plus", "theta_minus"},
}


@dataclass(frozen=True)
class ProblemSpec:
    interval: Interval = Interval()
    f: Polynomial = field(default_factory=lambda: Polynomial([0.0]))
    bc: DirichletBC = DirichletBC()
    k_true: Polynomial | None = None
    u_true: Polynomial | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    problem: ProblemSpec
    interior_counts: tuple[int, ...] = (11, 23)
    include_half_hats: bool = True
    target_mode: str = "exact"
    grid_points: int = 2001
    n_interior: int = 9
    observations: Path | None = None
    noise: NoiseSpec = NoiseSpec()
    model: str = "model1"
    params: tuple = (Weights(1.0, 0.0, 0.0),)
    sp_mode: SparsityMode = SparsityMode()
    box: Box = Box()
    settings: OptimizerSettings = OptimizerSettings()
    workers: int = 1
    seed: int = 0
    mesh_nodes: int = 399
    output_dir: Path = Path("results")
    output_format: str = "csv"
    plot: bool = True

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return replace(self, seed=seed, settings=replace(self.settings, seed=seed),
                       noise=replace(self.noise, seed=seed))

    def with_output_dir(self, path) -> "ExperimentConfig":
        return replace(self, output_dir=Path(path))


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(raw, base_dir=path.parent)


def parse_config(raw: dict, base_dir=".") -> ExperimentConfig:
    try:
        return _parse(raw, Path(base_dir))
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid config: {exc}") from None


def _section(raw, name):
    sec = raw.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(sec) - _KNOWN[name]
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    return sec


def _poly(value, name):
    if value is None:
        return None
    coeffs = np.atleast_1d(np.asarray(value, dtype=float))
    if coeffs.ndim != 1 or coeffs.size == 0 or not np.all(np.isfinite(coeffs)):
        raise ConfigError(f"{name} must be a nonempty list of polynomial coefficients")
    return Polynomial(coeffs)


def _pair(value, name):
    if len(value) != 2:
        raise ConfigError(f"{name} must have two entries")
    return float(value[0]), float(value[1])


def _triple(value, name):
    if len(value) != 3:
        raise ConfigError(f"{name} must have three entries")
    return tuple(float(v) for v in value)


def simplex_grid(step: float) -> list[Weights]:
    """All weight triples on the unit simplex with spacing ``step``, eta1 descending."""
    n = round(1.0 / step)
    if n < 1 or abs(n * step - 1.0) > 1e-9:
        raise ConfigError("simplex_step must divide 1")
    out = []
    for i in range(n, -1, -1):
        for j in range(0, n - i + 1):
            out.append(Weights(i / n, j / n, (n - i - j) / n))
    return out


def _parse(raw: dict, base_dir: Path) -> ExperimentConfig:
    unknown = set(raw) - _KNOWN[""]
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")

    p = _section(raw, "problem")
    if "f" not in p:
        raise ConfigError("[problem] needs a source polynomial f")
    problem = ProblemSpec(
        interval=Interval(*_pair(p.get("interval", [0.0, 1.0]), "interval")),
        f=_poly(p["f"], "f"),
        bc=DirichletBC(*_pair(p.get("bc", [0.0, 0.0]), "bc")),
        k_true=_poly(p.get("k_true"), "k_true"),
        u_true=_poly(p.get("u_true"), "u_true"),
    )

    b = _section(raw, "basis")
    counts = tuple(int(n) for n in b.get("interior_counts", [11, 23]))
    if not counts or min(counts) < 1:
        raise ConfigError("interior_counts must be a nonempty list of positive integers")

    t = _section(raw, "target")
    mode = t.get("mode", "exact")
    if mode not in ("exact", "sampled"):
        raise ConfigError(f"target mode must be 'exact' or 'sampled', got {mode!r}")
    obs = t.get("observations")
    observations = None if obs is None else (base_dir / obs)
    if mode == "exact" and problem.u_true is None and problem.k_true is None:
        raise ConfigError("exact target needs u_true or k_true")
    if mode == "sampled" and observations is None and problem.u_true is None and problem.k_true is None:
        raise ConfigError("sampled target needs an observation file, u_true or k_true")

    seed = int(raw.get("seed", 0))
    nz = _section(raw, "noise")
    noise = NoiseSpec(float(nz.get("relative_level", 0.0)), int(nz.get("seed", seed)),
                      nz.get("distribution", "uniform"))

    present = [m for m in MODEL_SECTIONS if m in raw]
    if len(present) > 1:
        raise ConfigError(f"exactly one model section allowed, found {present}")
    model = present[0] if present else None
    params: tuple = ()
    if model in ("model1", "sweep"):
        ms = _section(raw, model)
        if "weights" in ms:
            params = tuple(Weights(*_triple(w, "weights row")) for w in ms["weights"])
        elif model == "sweep" and "simplex_step" in ms:
            params = tuple(simplex_grid(float(ms["simplex_step"])))
        if not params:
            raise ConfigError(f"[{model}] needs a nonempty weights list")
    elif model == "model2":
        ms = _section(raw, model)
        params = tuple(EpsilonBounds(*_pair(e, "bounds row")) for e in ms.get("bounds", []))
        if not params:
            raise ConfigError("[model2] needs a nonempty bounds list of [eps1, eps2] rows")
    elif model == "model3":
        ms = _section(raw, model)
        tp = _triple(ms.get("theta_plus", [1, 1, 1]), "theta_plus")
        tm = _triple(ms.get("theta_minus", [1, 1, 1]), "theta_minus")
        params = tuple(Goals(_triple(g, "goals row"), tp, tm) for g in ms.get("goals", []))
        if not params:
            raise ConfigError("[model3] needs a nonempty goals list of [g1, g2, g3] rows")

    s = _section(raw, "sparsity")
    tau = s.get("tau")
    sp_mode = SparsityMode(s.get("kind", "l1"), float(s.get("alpha", 1.0)), None if tau is None else float(tau))
    if sp_mode.kind == "l0":
        raise ConfigError("sparsity kind l0 is report-only; optimise with l1, exp_star or exp_star_squared")

    bx = _section(raw, "box")
    box = Box(float(bx.get("lo", -10.0)), float(bx.get("hi", 10.0)))

    o = _section(raw, "optimizer")
    settings = OptimizerSettings(
        max_iter=int(o.get("max_iter", 2000)),
        gtol=float(o.get("gtol", 1e-9)),
        eps_smooth=float(o.get("eps_smooth", 1e-8)),
        n_random_starts=int(o.get("n_random_starts", 2)),
        seed=seed,
        penalty_start=float(o.get("penalty_start", 1.0)),
        penalty_max=float(o.get("penalty_max", 1e6)),
        penalty_tol=float(o.get("penalty_tol", 1e-6)),
    )
    if settings.eps_smooth <= 0 or settings.max_iter < 1 or settings.n_random_starts < 0:
        raise ConfigError("optimizer settings out of range")

    fw = _section(raw, "forward")
    out = _section(raw, "output")
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "markdown"):
        raise ConfigError(f"output format must be csv or markdown, got {fmt!r}")

    grid_points = int(t.get("grid_points", 2001))
    n_interior = int(t.get("n_interior", 9))
    mesh_nodes = int(fw.get("mesh_nodes", 399))
    if grid_points < 2 or n_interior < 1 or mesh_nodes < 3:
        raise ConfigError("grid_points >= 2, n_interior >= 1 and mesh_nodes >= 3 required")

    return ExperimentConfig(
        problem=problem,
        interior_counts=counts,
        include_half_hats=bool(b.get("include_half_hats", True)),
        target_mode=mode,
        grid_points=grid_points,
        n_interior=n_interior,
        observations=observations,
        noise=noise,
        model=model or "none",
        params=params,
        sp_mode=sp_mode,
        box=box,
        settings=settings,
        workers=int(o.get("workers", 1)),
        seed=seed,
        mesh_nodes=mesh_nodes,
        output_dir=base_dir / out.get("dir", "results"),
        output_format=fmt,
        plot=bool(out.get("plot", True)),
    )
