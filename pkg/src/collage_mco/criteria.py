"""Entropy, sparsity and recovery-error criteria for coefficient vectors.

Exact criteria are used for reporting.  The optimizer works with smoothed
variants in which ``|t|`` is replaced by ``sqrt(t**2 + eps**2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .assembly import CollageSystem, collage_distance, l2_distance
from .basis import HatBasis
from .errors import ConfigError, UnsupportedGradientError

L0 = "l0"
L1 = "l1"
EXP_STAR = "exp_star"
EXP_STAR_SQUARED = "exp_star_squared"
SPARSITY_KINDS = (L0, L1, EXP_STAR, EXP_STAR_SQUARED)

DEFAULT_EPS_SMOOTH = 1e-8


@dataclass(frozen=True)
class SparsityMode:
    kind: str = L1
    alpha: float = 1.0
    tau: float | None = None  # None -> 1e-6 * max(1, ||lam||_inf)

    def __post_init__(self):
        if self.kind not in SPARSITY_KINDS:
            raise ConfigError(f"unknown sparsity kind {self.kind!r}; expected one of {SPARSITY_KINDS}")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError("tau must be positive")


@dataclass(frozen=True)
class CriteriaValues:
    cd: float
    ent: float
    sp: int
    er: float | None = None

    def as_triple(self) -> tuple[float, float, float]:
        """Criteria oriented for minimisation: (CD, -ENT, SP)."""
        return (self.cd, -self.ent, float(self.sp))


def entropy(lam) -> float:
    """Shannon entropy of the normalised magnitudes ``|lam_i| / sum |lam|``.

    Zero entries contribute nothing and the zero vector has entropy 0.
    """
    a = np.abs(np.asarray(lam, dtype=float))
    total = a.sum()
    if total == 0.0:
        return 0.0
    p = a / total
    p = p[p > 0]  # subnormal entries can underflow to 0 here
    return float(max(0.0, -(p @ np.log(p))))


def neg_entropy_smooth(lam, eps_smooth: float = DEFAULT_EPS_SMOOTH):
    """Smoothed neg-entropy and its exact gradient.

    At ``lam = 0`` every smoothed magnitude equals ``eps_smooth`` so the value
    is ``-ln n`` rather than the exact convention's 0.
    """
    lam = np.asarray(lam, dtype=float)
    s = np.sqrt(lam * lam + eps_smooth * eps_smooth)
    total = s.sum()
    p = s / total
    logp = np.log(p)
    value = float(p @ logp)
    grad = (logp - value) / total * (lam / s)
    return value, grad


def default_tau(lam) -> float:
    return 1e-6 * max(1.0, float(np.max(np.abs(lam), initial=0.0)))


def sparsity(lam, mode: SparsityMode = SparsityMode()) -> float:
    a = np.abs(np.asarray(lam, dtype=float))
    if mode.kind == L0:
        tau = default_tau(a) if mode.tau is None else mode.tau
        return int(np.count_nonzero(a > tau))
    if mode.kind == L1:
        return float(a.sum())
    if mode.kind == EXP_STAR:
        return float(np.exp(mode.alpha * a).sum())
    return float(np.square(np.exp(mode.alpha * a)).sum())


def sparsity_smooth(lam, mode: SparsityMode, eps_smooth: float = DEFAULT_EPS_SMOOTH):
    """Smoothed sparsity value and gradient (``l0`` has no gradient)."""
    if mode.kind == L0:
        raise UnsupportedGradientError("the l0 count has no gradient; use l1 or an exponential surrogate")
    lam = np.asarray(lam, dtype=float)
    s = np.sqrt(lam * lam + eps_smooth * eps_smooth)
    ds = lam / s
    if mode.kind == L1:
        return float(s.sum()), ds
    e = np.exp(mode.alpha * s)
    if mode.kind == EXP_STAR:
        return float(e.sum()), mode.alpha * e * ds
    e2 = e * e
    return float(e2.sum()), 2.0 * mode.alpha * e2 * ds


def sparsity_smooth_grad(lam, mode: SparsityMode, eps_smooth: float = DEFAULT_EPS_SMOOTH) -> np.ndarray:
    return sparsity_smooth(lam, mode, eps_smooth)[1]


def l2_error(basis: HatBasis, lam, k_true: Callable, refine: int = 8) -> float:
    """L2 distance between ``k_true`` and the expansion of ``lam``."""
    lam = basis._coeffs(lam)
    return l2_distance(lambda x: basis.values(x) @ lam, k_true, basis.breakpoints(), refine=refine)


def evaluate_criteria(system: CollageSystem, basis: HatBasis, lam,
                      k_true: Callable | None = None, tau: float | None = None) -> CriteriaValues:
    """Reported criteria: unsquared CD, exact entropy, l0 count and (optionally) ER."""
    lam = np.asarray(lam, dtype=float)
    return CriteriaValues(
        cd=collage_distance(system, lam),
        ent=entropy(lam),
        sp=sparsity(lam, SparsityMode(L0, tau=tau)),
        er=None if k_true is None else l2_error(basis, lam, k_true),
    )
