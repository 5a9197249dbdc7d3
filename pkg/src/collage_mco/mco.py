"""Scalarised, epsilon-constraint and goal-programming solves of the
(CD, -ENT, SP) problem over a box of coefficient vectors.

Every model minimises a smooth surrogate: the squared collage distance and
the smoothed entropy/sparsity of :mod:`collage_mco.criteria`.  The criteria
stored on a :class:`Solution` are always recomputed from the returned
coefficients with the exact definitions.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as sopt

from .assembly import CollageSystem, collage_distance_sq
from .basis import HatBasis
from .criteria import (
    DEFAULT_EPS_SMOOTH,
    L0,
    CriteriaValues,
    SparsityMode,
    entropy,
    evaluate_criteria,
    neg_entropy_smooth,
    sparsity,
    sparsity_smooth,
)
from .errors import ConfigError, InfeasibleStartError, NumericError

Objective = Callable[[np.ndarray], "tuple[float, np.ndarray]"]

TIE_TOL = 1e-12


@dataclass(frozen=True)
class Weights:
    eta1: float
    eta2: float
    eta3: float

    def __post_init__(self):
        w = (self.eta1, self.eta2, self.eta3)
        if any(not math.isfinite(v) or v < 0 for v in w) or sum(w) <= 0:
            raise ConfigError(f"weights must be nonnegative with a positive sum, got {w}")

    def scaled(self, c: float) -> "Weights":
        return Weights(c * self.eta1, c * self.eta2, c * self.eta3)


@dataclass(frozen=True)
class Box:
    lo: float = -10.0
    hi: float = 10.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ConfigError(f"box needs lo < hi, got [{self.lo}, {self.hi}]")

    def clip(self, lam) -> np.ndarray:
        return np.clip(np.asarray(lam, dtype=float), self.lo, self.hi)

    def contains(self, lam) -> bool:
        lam = np.asarray(lam, dtype=float)
        return bool(np.all(lam >= self.lo) and np.all(lam <= self.hi))


@dataclass(frozen=True)
class EpsilonBounds:
    eps1: float  # cap on -ENT
    eps2: float  # cap on SP


@dataclass(frozen=True)
class Goals:
    g: tuple[float, float, float]
    theta_plus: tuple[float, float, float] = (1.0, 1.0, 1.0)
    theta_minus: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if len(self.g) != 3 or len(self.theta_plus) != 3 or len(self.theta_minus) != 3:
            raise ConfigError("goals and goal weights must have three components")
        if min(self.theta_plus) < 0 or min(self.theta_minus) < 0:
            raise ConfigError("goal weights must be nonnegative")


@dataclass(frozen=True)
class OptimizerSettings:
    max_iter: int = 2000
    gtol: float = 1e-9
    eps_smooth: float = DEFAULT_EPS_SMOOTH
    n_random_starts: int = 2
    seed: int = 0
    penalty_start: float = 1.0
    penalty_max: float = 1e6
    penalty_tol: float = 1e-6


@dataclass
class Solution:
    lam: np.ndarray
    objective: float
    iterations: int
    converged: bool
    start_index: int
    criteria: CriteriaValues | None = None
    feasible: bool = True
    params: object = None
    message: str = ""


def projected_gradient(lam, grad, box: Box) -> np.ndarray:
    return lam - box.clip(lam - grad)


def _local_solve(fun: Objective, x0: np.ndarray, box: Box, max_iter: int, gtol: float):
    """Projected quasi-Newton (L-BFGS-B) from one start, restarted until the
    relative projected-gradient test passes or the budget is spent."""
    x = box.clip(x0)
    fx, gx = fun(x)
    if not math.isfinite(fx) or not np.all(np.isfinite(gx)):
        raise NumericError("objective is not finite at the start point")
    bounds = sopt.Bounds(np.full(x.size, box.lo), np.full(x.size, box.hi))
    iterations = 0
    while True:
        pg = np.max(np.abs(projected_gradient(x, gx, box)), initial=0.0)
        if pg <= gtol * (1.0 + abs(fx)):
            return x, fx, iterations, True
        if iterations >= max_iter:
            return x, fx, iterations, False
        res = sopt.minimize(fun, x, jac=True, method="L-BFGS-B", bounds=bounds,
                            options={"maxiter": max_iter - iterations, "ftol": 0.0,
                                     "gtol": gtol * (1.0 + abs(fx)), "maxcor": 20})
        iterations += max(int(res.nit), 1)
        x_new = box.clip(res.x)
        f_new, g_new = fun(x_new)
        if not (math.isfinite(f_new) and f_new < fx):
            return x, fx, iterations, False
        x, fx, gx = x_new, f_new, g_new


def optimize(fun: Objective, box: Box, starts: Sequence, settings: OptimizerSettings = OptimizerSettings(),
             tiebreak: Callable[[np.ndarray], float] | None = None) -> Solution:
    """Multi-start box-constrained minimisation of a smooth objective.

    ``fun`` returns ``(value, gradient)``.  The result is never worse than
    the best start.  Final points whose objective ties the best within
    ``TIE_TOL`` are ranked by ``tiebreak`` (lower wins), then by start order.
    """
    starts = [np.asarray(s, dtype=float) for s in starts]
    feasible = [i for i, s in enumerate(starts) if box.contains(s)]
    if not feasible:
        raise InfeasibleStartError("no start point lies inside the box")
    runs = []
    for i in feasible:
        x, fx, its, ok = _local_solve(fun, starts[i], box, settings.max_iter, settings.gtol)
        runs.append((fx, i, x, its, ok))
    best_f = min(r[0] for r in runs)
    tied = [r for r in runs if r[0] <= best_f + TIE_TOL]
    if tiebreak is not None and len(tied) > 1:
        tied.sort(key=lambda r: (tiebreak(r[2]), r[1]))
    else:
        tied.sort(key=lambda r: (r[0], r[1]))
    fx, i, x, its, ok = tied[0]
    return Solution(lam=x, objective=float(fx), iterations=its, converged=ok, start_index=i)


def default_starts(system: CollageSystem, box: Box, settings: OptimizerSettings,
                   basis: HatBasis | None = None) -> list[np.ndarray]:
    """Zero, clipped minimum-norm least squares, constant-one expansion, seeded randoms."""
    n = system.trial_count
    if basis is not None:
        one = np.full(n, 1.0 / len(basis.levels))
    else:
        one = np.ones(n)
    rng = np.random.default_rng(settings.seed)
    starts = [np.zeros(n), box.clip(system.min_norm_solution()), box.clip(one)]
    starts += [rng.uniform(box.lo, box.hi, n) for _ in range(settings.n_random_starts)]
    return [box.clip(s) for s in starts]


def model1_objective(system: CollageSystem, w: Weights, sp_mode: SparsityMode,
                     eps_smooth: float = DEFAULT_EPS_SMOOTH) -> Objective:
    _check_smooth_mode(sp_mode)

    def fun(lam):
        value, grad = 0.0, np.zeros_like(lam)
        if w.eta1:
            v, g = collage_distance_sq(system, lam)
            value, grad = value + w.eta1 * v, grad + w.eta1 * g
        if w.eta2:
            v, g = neg_entropy_smooth(lam, eps_smooth)
            value, grad = value + w.eta2 * v, grad + w.eta2 * g
        if w.eta3:
            v, g = sparsity_smooth(lam, sp_mode, eps_smooth)
            value, grad = value + w.eta3 * v, grad + w.eta3 * g
        return value, grad

    return fun


def _exact_model1(system, w, sp_mode):
    def score(lam):
        r = system.residual(lam)
        return w.eta1 * float(r @ r) - w.eta2 * entropy(lam) + w.eta3 * sparsity(lam, sp_mode)

    return score


def _check_smooth_mode(sp_mode: SparsityMode):
    if sp_mode.kind == L0:
        raise ConfigError("l0 cannot be optimised directly; choose l1, exp_star or exp_star_squared")


def _finish(sol: Solution, system, basis, k_true, params) -> Solution:
    if k_true is not None and basis is None:
        raise ConfigError("computing ER needs the trial basis")
    sol.criteria = evaluate_criteria(system, basis, sol.lam, k_true)
    sol.params = params
    return sol


def solve_model1(system: CollageSystem, w: Weights, sp_mode: SparsityMode = SparsityMode(),
                 box: Box = Box(), settings: OptimizerSettings = OptimizerSettings(), *,
                 starts=None, basis: HatBasis | None = None, k_true=None) -> Solution:
    """Minimise ``eta1 CD^2 - eta2 ENT + eta3 SP`` (smoothed) over the box.

    The weights are normalised to sum 1 before optimising, so ``w`` and
    ``c * w`` run identical iterations; ``objective`` is reported for ``w``.
    """
    total = w.eta1 + w.eta2 + w.eta3
    wn = w.scaled(1.0 / total)
    fun = model1_objective(system, wn, sp_mode, settings.eps_smooth)
    if starts is None:
        starts = default_starts(system, box, settings, basis)
    sol = optimize(fun, box, starts, settings, tiebreak=_exact_model1(system, wn, sp_mode))
    sol.objective *= total
    return _finish(sol, system, basis, k_true, w)


def solve_model2(system: CollageSystem, eps: EpsilonBounds, sp_mode: SparsityMode = SparsityMode(),
                 box: Box = Box(), settings: OptimizerSettings = OptimizerSettings(), *,
                 starts=None, basis: HatBasis | None = None, k_true=None) -> Solution:
    """Minimise CD subject to ``-ENT <= eps1`` and ``SP <= eps2`` by an
    escalating quadratic exterior penalty."""
    _check_smooth_mode(sp_mode)
    es = settings.eps_smooth

    def violations(lam):
        ne, ne_g = neg_entropy_smooth(lam, es)
        sp, sp_g = sparsity_smooth(lam, sp_mode, es)
        return ne - eps.eps1, ne_g, sp - eps.eps2, sp_g

    def penalised(rho):
        def fun(lam):
            cd2, g = collage_distance_sq(system, lam)
            v1, g1, v2, g2 = violations(lam)
            value = cd2
            if v1 > 0:
                value += rho * v1 * v1
                g = g + 2 * rho * v1 * g1
            if v2 > 0 and math.isfinite(v2):
                value += rho * v2 * v2
                g = g + 2 * rho * v2 * g2
            return value, g
        return fun

    def violation(lam):
        v1, _, v2, _ = violations(lam)
        return max(v1, v2, 0.0)

    if starts is None:
        starts = default_starts(system, box, settings, basis)
    runs = []
    for i, s in enumerate(starts):
        s = np.asarray(s, dtype=float)
        if not box.contains(s):
            continue
        x, rho, its, ok = s, settings.penalty_start, 0, False
        while True:
            x, fx, k, ok = _local_solve(penalised(rho), x, box, settings.max_iter, settings.gtol)
            its += k
            if violation(x) <= settings.penalty_tol or rho >= settings.penalty_max:
                break
            rho *= 10.0
        cd2 = collage_distance_sq(system, x)[0]
        runs.append((violation(x) > settings.penalty_tol, cd2 if violation(x) <= settings.penalty_tol
                     else violation(x), i, x, fx, its, ok))
    if not runs:
        raise InfeasibleStartError("no start point lies inside the box")
    runs.sort(key=lambda r: (r[0], r[1], r[2]))
    infeasible, _, i, x, fx, its, ok = runs[0]
    sol = Solution(lam=x, objective=float(fx), iterations=its, converged=ok and not infeasible,
                   start_index=i, feasible=not infeasible,
                   message="constraints violated after maximal penalty" if infeasible else "")
    return _finish(sol, system, basis, k_true, eps)


def _smooth_pos(z, eps):
    """Smooth ``max(z, 0)`` and its derivative."""
    r = math.sqrt(z * z + eps * eps)
    return 0.5 * (z + r), 0.5 * (1.0 + z / r)


def model3_objective(system: CollageSystem, goals: Goals, sp_mode: SparsityMode, eps: float) -> Objective:
    """Weighted goal deviations with the slack variables eliminated."""
    _check_smooth_mode(sp_mode)
    tp, tm, g = goals.theta_plus, goals.theta_minus, goals.g

    def fun(lam):
        cd2, cd2_g = collage_distance_sq(system, lam)
        cd = math.sqrt(cd2 + eps * eps)
        terms = [(cd, cd2_g / (2.0 * cd)), neg_entropy_smooth(lam, eps), sparsity_smooth(lam, sp_mode, eps)]
        value, grad = 0.0, np.zeros_like(lam)
        for k, (J, dJ) in enumerate(terms):
            up, dup = _smooth_pos(J - g[k], eps)
            down, ddown = _smooth_pos(g[k] - J, eps)
            value += tp[k] * up + tm[k] * down
            grad = grad + (tp[k] * dup - tm[k] * ddown) * dJ
        return value, grad

    return fun


def goal_criteria(system: CollageSystem, lam, sp_mode: SparsityMode, eps: float = DEFAULT_EPS_SMOOTH):
    """The smoothed (CD, -ENT, SP) triple that Model 3 compares against its goals."""
    cd2, _ = collage_distance_sq(system, lam)
    return (math.sqrt(cd2 + eps * eps), neg_entropy_smooth(lam, eps)[0], sparsity_smooth(lam, sp_mode, eps)[0])


def solve_model3(system: CollageSystem, goals: Goals, sp_mode: SparsityMode = SparsityMode(),
                 box: Box = Box(), settings: OptimizerSettings = OptimizerSettings(), *,
                 starts=None, basis: HatBasis | None = None, k_true=None,
                 continuation: Sequence[float] = (1e-2, 1e-4, 1e-6)) -> Solution:
    """Goal programming with ``delta+ = (J-g)+`` and ``delta- = (g-J)+``.

    Each start is first relaxed with the coarser smoothing levels in
    ``continuation`` and then polished at ``settings.eps_smooth``; a relaxed
    path is discarded if it ends worse than the start itself.
    """
    final = model3_objective(system, goals, sp_mode, settings.eps_smooth)
    stages = [model3_objective(system, goals, sp_mode, e) for e in continuation if e > settings.eps_smooth]
    if starts is None:
        starts = default_starts(system, box, settings, basis)
    polished = []
    for s in starts:
        s = np.asarray(s, dtype=float)
        if not box.contains(s):
            polished.append(s)
            continue
        x = s
        for fun in stages:
            x, _, _, _ = _local_solve(fun, x, box, settings.max_iter, settings.gtol)
        polished.append(x if final(x)[0] <= final(s)[0] else s)
    sol = optimize(final, box, polished, settings)
    return _finish(sol, system, basis, k_true, goals)


def dominates(p, q) -> bool:
    """Pareto dominance for minimisation."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return bool(np.all(p <= q) and np.any(p < q))


def nondominated_indices(points) -> list[int]:
    """Indices of the points not dominated by any other point, in input order."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        return []
    le = np.all(pts[:, None, :] <= pts[None, :, :], axis=2)
    lt = np.any(pts[:, None, :] < pts[None, :, :], axis=2)
    dominated = np.any(le & lt, axis=0)
    return [int(i) for i in np.flatnonzero(~dominated)]


def sweep_solutions(system: CollageSystem, weight_grid: Sequence[Weights], sp_mode: SparsityMode = SparsityMode(),
                    box: Box = Box(), settings: OptimizerSettings = OptimizerSettings(), *,
                    basis: HatBasis | None = None, k_true=None, workers: int = 1) -> list[Solution]:
    """Model 1 solution for every weight triple, in grid order."""
    grid = list(weight_grid)
    if not grid:
        raise ConfigError("weight grid is empty")

    def run(w):
        return solve_model1(system, w, sp_mode, box, settings, basis=basis, k_true=k_true)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, grid))
    return [run(w) for w in grid]


def pareto_filter(solutions: Sequence[Solution]) -> list[Solution]:
    """Nondominated subset by (CD, -ENT, SP), sorted by eta1 then eta2, both descending."""
    keep = nondominated_indices([s.criteria.as_triple() for s in solutions])
    out = [solutions[i] for i in keep]
    return sorted(out, key=lambda s: (-s.params.eta1, -s.params.eta2))


def pareto_sweep(system: CollageSystem, weight_grid: Sequence[Weights], sp_mode: SparsityMode = SparsityMode(),
                 box: Box = Box(), settings: OptimizerSettings = OptimizerSettings(), *,
                 basis: HatBasis | None = None, k_true=None, workers: int = 1) -> list[Solution]:
    sols = sweep_solutions(system, weight_grid, sp_mode, box, settings, basis=basis, k_true=k_true, workers=workers)
    return pareto_filter(sols)
