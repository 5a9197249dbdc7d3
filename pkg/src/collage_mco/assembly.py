"""Quadrature, the forward Galerkin solver and the collage least-squares system.

For the diffusion problem ``-(K u')' = f`` the collage residual of a
candidate diffusivity ``K = sum_j lam_j phi_j`` against a fixed target ``u``
is the linear functional ``v -> a_lam(u, v) - f(v)``.  Tested against a
finite family of hats ``v_i`` that functional becomes ``A @ lam - b`` with

    A[i, j] = int phi_j u' v_i' dx,    b[i] = int f v_i dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import linalg

from .basis import HatBasis, Interval, merge_breakpoints
from .errors import CoercivityError, ConfigError, NumericError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(3)


@dataclass(frozen=True)
class DirichletBC:
    value_left: float = 0.0
    value_right: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.value_left) and math.isfinite(self.value_right)):
            raise ConfigError("boundary values must be finite")


class PiecewiseLinearFn:
    """Continuous piecewise-linear function given by its breakpoint values."""

    def __init__(self, breakpoints, values):
        x = np.array(breakpoints, dtype=float)
        y = np.array(values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("breakpoints and values must be 1D arrays of equal length >= 2")
        if np.any(np.diff(x) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        x.setflags(write=False)
        y.setflags(write=False)
        self.breakpoints = x
        self.values = y

    def __call__(self, x):
        return np.interp(x, self.breakpoints, self.values)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def deriv(self, x):
        """Piecewise-constant derivative (right-hand slope at interior breakpoints)."""
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, self.breakpoints.size - 2)
        return self.slopes[idx]

    def __repr__(self):
        return f"PiecewiseLinearFn({self.breakpoints.size} breakpoints on [{self.breakpoints[0]}, {self.breakpoints[-1]}])"


@dataclass(frozen=True)
class CollageSystem:
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError(f"inconsistent collage system shapes {A.shape} and {b.shape}")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def test_count(self) -> int:
        return self.A.shape[0]

    @property
    def trial_count(self) -> int:
        return self.A.shape[1]

    def residual(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (self.trial_count,):
            raise ValueError(f"coefficient vector has shape {lam.shape}, expected ({self.trial_count},)")
        return self.A @ lam - self.b

    def min_norm_solution(self) -> np.ndarray:
        """Minimum-norm least-squares solution of ``A lam = b``."""
        return np.linalg.lstsq(self.A, self.b, rcond=None)[0]


def gauss_points(breakpoints):
    """Nodes and weights of composite 3-point Gauss-Legendre on each subinterval."""
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or bp.size < 2:
        raise ValueError("need at least 2 breakpoints to integrate")
    mid = 0.5 * (bp[1:] + bp[:-1])
    half = 0.5 * np.diff(bp)
    x = (mid[:, None] + half[:, None] * _GL_NODES).ravel()
    w = (half[:, None] * _GL_WEIGHTS).ravel()
    return x, w


def integrate(g: Callable, breakpoints) -> float:
    """Composite Gauss-Legendre integral of ``g``; exact for degree <= 5 per subinterval."""
    x, w = gauss_points(breakpoints)
    return float(w @ _evaluate(g, x))


def _evaluate(g: Callable, x: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.asarray(g(x), dtype=float), x.shape)


def solve_forward(K: Callable, f: Callable, bc: DirichletBC = DirichletBC(),
                  mesh_nodes: int = 199, interval: Interval = Interval()) -> PiecewiseLinearFn:
    """P1 Galerkin solution of ``-(K u')' = f`` with Dirichlet data.

    The boundary values are lifted by their linear interpolant ``L``; the
    homogeneous part solves ``a(w, v) = f(v) - a(L, v)`` on ``mesh_nodes``
    uniformly spaced interior nodes.
    """
    if mesh_nodes < 3:
        raise ConfigError("mesh_nodes must be >= 3")
    a, b = interval.x_a, interval.x_b
    nodes = np.linspace(a, b, mesh_nodes + 2)
    h = np.diff(nodes)
    xq, wq = gauss_points(nodes)
    Kq = _evaluate(K, xq)
    if not np.all(np.isfinite(Kq)) or Kq.min() <= 0.0:
        raise CoercivityError(f"diffusivity not positive on the mesh (min {Kq.min():.3g})")
    fq = _evaluate(f, xq)

    n_el = nodes.size - 1
    Kq = Kq.reshape(n_el, 3)
    wq = wq.reshape(n_el, 3)
    xq = xq.reshape(n_el, 3)
    fq = fq.reshape(n_el, 3)
    k_el = (wq * Kq).sum(axis=1) / h**2
    # local shape functions: phi_left = (x_r - x)/h, phi_right = (x - x_l)/h
    phi_r = (xq - nodes[:-1, None]) / h[:, None]
    load_l = (wq * fq * (1.0 - phi_r)).sum(axis=1)
    load_r = (wq * fq * phi_r).sum(axis=1)

    lift_slope = (bc.value_right - bc.value_left) / (b - a)
    # a(L, phi) on each element: int K L' phi' = L' * (int K) / h * (-1, +1)
    flux = lift_slope * k_el * h
    load_l += flux
    load_r -= flux

    diag = k_el[:-1] + k_el[1:]
    off = -k_el[1:-1]
    rhs = load_r[:-1] + load_l[1:]
    banded = np.zeros((3, mesh_nodes))
    banded[0, 1:] = off
    banded[1] = diag
    banded[2, :-1] = off
    try:
        w = linalg.solve_banded((1, 1), banded, rhs, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise NumericError(f"stiffness matrix is singular: {exc}") from exc

    lift = bc.value_left + lift_slope * (nodes - a)
    values = lift.copy()
    values[1:-1] += w
    return PiecewiseLinearFn(nodes, values)


def assemble_collage(trial_basis: HatBasis, test_basis: HatBasis | None,
                     u_target: PiecewiseLinearFn, f: Callable) -> CollageSystem:
    """Assemble ``A`` and ``b`` on the merged breakpoint grid (exact quadrature).

    ``test_basis=None`` tests against the interior hats of the trial levels,
    i.e. the subspace of the trial span that vanishes on the boundary.
    """
    if test_basis is None:
        test_basis = trial_basis.interior_only()
    if trial_basis.interval != test_basis.interval:
        raise ConfigError("trial and test bases live on different intervals")
    iv = trial_basis.interval
    ub = u_target.breakpoints
    tol = 1e-12 * max(1.0, abs(iv.x_a), abs(iv.x_b))
    if abs(ub[0] - iv.x_a) > tol or abs(ub[-1] - iv.x_b) > tol:
        raise ConfigError(f"target is defined on [{ub[0]}, {ub[-1]}], basis on [{iv.x_a}, {iv.x_b}]")

    grid = merge_breakpoints(trial_basis.breakpoints(), test_basis.breakpoints(), ub)
    x, w = gauss_points(grid)
    weighted_du = w * u_target.deriv(x)
    A = test_basis.derivs(x).T @ (weighted_du[:, None] * trial_basis.values(x))
    b = test_basis.values(x).T @ (w * _evaluate(f, x))
    return CollageSystem(A, b)


def collage_distance(system: CollageSystem, lam) -> float:
    """Euclidean norm of the collage residual ``A lam - b``."""
    return float(np.linalg.norm(system.residual(lam)))


def collage_distance_sq(system: CollageSystem, lam):
    """Squared collage distance and its gradient ``2 A^T (A lam - b)``."""
    r = system.residual(lam)
    return float(r @ r), 2.0 * (system.A.T @ r)


def coercivity_lower_bound(trial_basis: HatBasis, lam) -> float:
    """Minimum of the expanded diffusivity over the quadrature nodes.

    This is the coercivity constant of ``a_lam`` with respect to the
    H^1_0 seminorm; a value <= 0 means coercivity is lost.
    """
    x, _ = gauss_points(trial_basis.breakpoints())
    return float(np.min(trial_basis.expand(lam, x)))


def error_bound(cd: float, m_lower: float) -> float:
    if not m_lower > 0:
        raise CoercivityError(f"coercivity bound must be positive, got {m_lower}")
    return cd / m_lower


def norm_constant(test_basis: HatBasis) -> float:
    """Factor turning ``CD / m`` into an L2 bound on ``u - u_lam``.

    ``||r||_2 / sqrt(mu)`` bounds the residual's dual norm over the test span
    (``mu`` the smallest positive eigenvalue of the test stiffness Gram
    matrix) and Poincare's inequality gives ``||w||_L2 <= L/pi ||w'||_L2``.
    Only the part of the residual seen by the test span is controlled.
    """
    x, w = gauss_points(test_basis.breakpoints())
    D = test_basis.derivs(x)
    gram = D.T @ (w[:, None] * D)
    eig = np.linalg.eigvalsh(gram)
    positive = eig[eig > 1e-10 * eig.max()]
    return test_basis.interval.length / (math.pi * math.sqrt(positive.min()))


def l2_distance(g: Callable, h: Callable, breakpoints, refine: int = 1) -> float:
    """L2 distance of two functions, with each subinterval split ``refine`` times."""
    bp = np.asarray(breakpoints, dtype=float)
    if refine > 1:
        t = np.linspace(0.0, 1.0, refine + 1)[:-1]
        bp = np.concatenate([(bp[:-1, None] + np.diff(bp)[:, None] * t).ravel(), bp[-1:]])
    x, w = gauss_points(bp)
    d = _evaluate(g, x) - _evaluate(h, x)
    return float(np.sqrt(w @ (d * d)))

