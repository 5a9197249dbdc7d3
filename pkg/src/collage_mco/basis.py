"""Multiresolution piecewise-linear hat bases on an interval.

A basis is a flat, ordered list of hat functions built level by level
(coarse first).  Each level with ``n`` interior hats spaced uniformly at
``h = (x_b - x_a) / (n + 1)`` optionally carries two truncated "half hats"
peaked at the endpoints, so a single level is a partition of unity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError

INTERIOR = "interior"
LEFT_HALF = "left_half"
RIGHT_HALF = "right_half"


@dataclass(frozen=True)
class Interval:
    x_a: float = 0.0
    x_b: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.x_a) and np.isfinite(self.x_b)) or self.x_a >= self.x_b:
            raise ConfigError(f"invalid interval [{self.x_a}, {self.x_b}]")

    @property
    def length(self) -> float:
        return self.x_b - self.x_a


@dataclass(frozen=True)
class HatFunction:
    left: float
    peak: float
    right: float
    kind: str = INTERIOR

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        if self.peak > self.left:
            m = (x >= self.left) & (x <= self.peak)
            out[m] = (x[m] - self.left) / (self.peak - self.left)
        if self.right > self.peak:
            m = (x >= self.peak) & (x <= self.right)
            out[m] = (self.right - x[m]) / (self.right - self.peak)
        out[x == self.peak] = 1.0
        return out

    def deriv(self, x, x_end: float | None = None):
        """Slope of the hat, using the right-hand slope at breakpoints.

        At ``x_end`` (the right end of the domain) the left-hand slope is
        used instead, so a right half hat has a nonzero slope there.
        """
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        right_end = np.zeros(x.shape, dtype=bool) if x_end is None else (x == x_end)
        inner = ~right_end
        if self.peak > self.left:
            up = 1.0 / (self.peak - self.left)
            out[inner & (x >= self.left) & (x < self.peak)] = up
            out[right_end & (x > self.left) & (x <= self.peak)] = up
        if self.right > self.peak:
            down = -1.0 / (self.right - self.peak)
            out[inner & (x >= self.peak) & (x < self.right)] = down
            out[right_end & (x > self.peak) & (x <= self.right)] = down
        return out


@dataclass(frozen=True)
class HatBasis:
    interval: Interval
    levels: tuple[int, ...]
    functions: tuple[HatFunction, ...]
    include_half_hats: bool = True
    _lefts: np.ndarray = field(init=False, repr=False, compare=False)
    _peaks: np.ndarray = field(init=False, repr=False, compare=False)
    _rights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name, attr in (("_lefts", "left"), ("_peaks", "peak"), ("_rights", "right")):
            arr = np.array([getattr(fn, attr) for fn in self.functions], dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.functions)

    @property
    def peaks(self) -> np.ndarray:
        return self._peaks

    def level_slices(self) -> list[slice]:
        """Index ranges of each level inside the flat coefficient vector."""
        extra = 2 if self.include_half_hats else 0
        out, start = [], 0
        for n in self.levels:
            out.append(slice(start, start + n + extra))
            start += n + extra
        return out

    def breakpoints(self) -> np.ndarray:
        """Sorted union of every hat's left/peak/right node."""
        pts = np.concatenate([self._lefts, self._peaks, self._rights,
                              [self.interval.x_a, self.interval.x_b]])
        return merge_breakpoints(pts)

    def _check_index(self, i: int):
        if not 0 <= i < len(self.functions):
            raise IndexError(f"basis index {i} out of range for {len(self.functions)} functions")

    def eval(self, i: int, x):
        self._check_index(i)
        return _maybe_scalar(self.functions[i](x), x)

    def eval_deriv(self, i: int, x):
        self._check_index(i)
        return _maybe_scalar(self.functions[i].deriv(x, self.interval.x_b), x)

    def values(self, x) -> np.ndarray:
        """Matrix ``V[k, i] = phi_i(x_k)``."""
        x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
        lefts, peaks, rights = self._lefts, self._peaks, self._rights
        with np.errstate(divide="ignore", invalid="ignore"):
            up = np.where(peaks > lefts, (x - lefts) / (peaks - lefts), 1.0)
            down = np.where(rights > peaks, (rights - x) / (rights - peaks), 1.0)
        out = np.where(x <= peaks, up, down)
        out[(x < lefts) | (x > rights)] = 0.0
        return out

    def derivs(self, x) -> np.ndarray:
        """Matrix ``D[k, i] = phi_i'(x_k)`` with the breakpoint convention of :meth:`HatFunction.deriv`."""
        x = np.atleast_1d(np.asarray(x, dtype=float))[:, None]
        lefts, peaks, rights = self._lefts, self._peaks, self._rights
        with np.errstate(divide="ignore"):
            up = np.where(peaks > lefts, 1.0 / np.where(peaks > lefts, peaks - lefts, 1.0), 0.0)
            down = np.where(rights > peaks, -1.0 / np.where(rights > peaks, rights - peaks, 1.0), 0.0)
        at_end = x == self.interval.x_b
        in_up = np.where(at_end, (x > lefts) & (x <= peaks), (x >= lefts) & (x < peaks))
        in_down = np.where(at_end, (x > peaks) & (x <= rights), (x >= peaks) & (x < rights))
        return in_up * up + in_down * down

    def expand(self, lam, x):
        lam = self._coeffs(lam)
        return _maybe_scalar(self.values(x) @ lam, x)

    def expand_deriv(self, lam, x):
        lam = self._coeffs(lam)
        return _maybe_scalar(self.derivs(x) @ lam, x)

    def _coeffs(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        if lam.shape != (len(self.functions),):
            raise ValueError(f"coefficient vector has shape {lam.shape}, expected ({len(self.functions)},)")
        return lam

    def interpolant(self, g: Callable, level: int = -1) -> np.ndarray:
        """Coefficients reproducing the nodal interpolant of ``g`` on one level.

        All other levels get zero coefficients.  With half hats present the
        result is exact whenever ``g`` is linear.
        """
        lam = np.zeros(len(self.functions))
        sl = self.level_slices()[level]
        lam[sl] = np.asarray(g(self._peaks[sl]), dtype=float) * np.ones(sl.stop - sl.start)
        return lam

    def interior_only(self) -> "HatBasis":
        """Same levels without half hats; every member vanishes at both ends."""
        return build_multiresolution_basis(self.interval, self.levels, include_half_hats=False)


def build_multiresolution_basis(interval: Interval, interior_counts: Sequence[int],
                                include_half_hats: bool = True) -> HatBasis:
    counts = tuple(int(n) for n in interior_counts)
    if not counts:
        raise ConfigError("interior_counts must be nonempty")
    if any(n < 1 for n in counts):
        raise ConfigError(f"interior counts must be >= 1, got {counts}")
    a, b = interval.x_a, interval.x_b
    functions = []
    for n in counts:
        nodes = np.linspace(a, b, n + 2)
        if include_half_hats:
            functions.append(HatFunction(a, a, nodes[1], LEFT_HALF))
        for k in range(1, n + 1):
            functions.append(HatFunction(nodes[k - 1], nodes[k], nodes[k + 1], INTERIOR))
        if include_half_hats:
            functions.append(HatFunction(nodes[-2], b, b, RIGHT_HALF))
    return HatBasis(interval, counts, tuple(functions), include_half_hats)


def merge_breakpoints(*arrays, tol: float = 1e-13) -> np.ndarray:
    """Sorted union of breakpoint arrays, collapsing points closer than ``tol``."""
    pts = np.sort(np.concatenate([np.ravel(np.asarray(a, dtype=float)) for a in arrays]))
    if pts.size == 0:
        return pts
    scale = max(1.0, float(np.max(np.abs(pts))))
    keep = np.concatenate([[True], np.diff(pts) > tol * scale])
    return pts[keep]


def _maybe_scalar(values, x):
    values = np.asarray(values)
    if np.ndim(x) == 0:
        return float(values.reshape(-1)[0])
    return values
