"""Synthetic observations of a steady state, multiplicative noise, and the
``x,u`` observation file format."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .assembly import DirichletBC, PiecewiseLinearFn
from .basis import Interval
from .errors import (
    ConfigError,
    ObservationFormatError,
    ObservationOutOfIntervalError,
    UnsortedObservationsError,
)

HEADER = "x,u"


@dataclass(frozen=True, eq=False)
class ObservationSet:
    x: np.ndarray
    u: np.ndarray
    interval: Interval = Interval()
    bc: DirichletBC = DirichletBC()

    def __post_init__(self):
        x = np.array(self.x, dtype=float).ravel()
        u = np.array(self.u, dtype=float).ravel()
        if x.shape != u.shape:
            raise ValueError("x and u must have the same length")
        if np.any(np.diff(x) <= 0):
            raise UnsortedObservationsError("observation x values must be strictly increasing")
        if x.size and (x[0] <= self.interval.x_a or x[-1] >= self.interval.x_b):
            raise ObservationOutOfIntervalError(
                f"observations must lie strictly inside ({self.interval.x_a}, {self.interval.x_b})")
        x.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)

    def __len__(self):
        return self.x.size

    def __eq__(self, other):
        if not isinstance(other, ObservationSet):
            return NotImplemented
        return (self.interval == other.interval and self.bc == other.bc
                and np.array_equal(self.x, other.x) and np.array_equal(self.u, other.u))

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.u.tolist()))


@dataclass(frozen=True)
class NoiseSpec:
    relative_level: float = 0.0
    seed: int = 0
    distribution: str = "uniform"

    def __post_init__(self):
        if not self.relative_level >= 0:
            raise ConfigError("noise level must be >= 0")
        if self.distribution != "uniform":
            raise ConfigError(f"unsupported noise distribution {self.distribution!r}")


def sample_solution(u_true: Callable, n_interior: int, interval: Interval = Interval(),
                    bc: DirichletBC = DirichletBC()) -> ObservationSet:
    """Sample ``u_true`` at ``n_interior`` equispaced interior points."""
    if n_interior < 1:
        raise ConfigError("n_interior must be >= 1")
    x = np.linspace(interval.x_a, interval.x_b, n_interior + 2)[1:-1]
    u = np.broadcast_to(np.asarray(u_true(x), dtype=float), x.shape)
    return ObservationSet(x, u, interval, bc)


def add_noise(obs: ObservationSet, spec: NoiseSpec) -> ObservationSet:
    """``u_k * (1 + level * xi_k)`` with ``xi_k ~ U[-1, 1]``; boundary data untouched."""
    if spec.relative_level == 0:
        return obs
    rng = np.random.default_rng(spec.seed)
    xi = rng.uniform(-1.0, 1.0, size=len(obs))
    return ObservationSet(obs.x, obs.u * (1.0 + spec.relative_level * xi), obs.interval, obs.bc)


def interpolate_target(obs: ObservationSet) -> PiecewiseLinearFn:
    """Piecewise-linear interpolant through the boundary values and all observations."""
    if len(obs) == 0:
        raise ConfigError("need at least one observation")
    iv = obs.interval
    x = np.concatenate([[iv.x_a], obs.x, [iv.x_b]])
    u = np.concatenate([[obs.bc.value_left], obs.u, [obs.bc.value_right]])
    return PiecewiseLinearFn(x, u)


def _fmt(v: float) -> str:
    return np.format_float_positional(v, unique=True, trim="-")


def format_observations(obs: ObservationSet) -> str:
    lines = [HEADER] + [f"{_fmt(x)},{_fmt(u)}" for x, u in zip(obs.x, obs.u)]
    return "\n".join(lines) + "\n"


def save_observations(obs: ObservationSet, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_observations(obs))
    return path


def parse_observations(text: str, interval: Interval = Interval(),
                       bc: DirichletBC = DirichletBC()) -> ObservationSet:
    lines = text.splitlines()
    if not lines or lines[0].strip() != HEADER:
        raise ObservationFormatError(f"missing '{HEADER}' header line")
    xs, us = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ObservationFormatError(f"line {lineno}: expected 2 fields, got {len(parts)}")
        try:
            x, u = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ObservationFormatError(f"line {lineno}: {exc}") from None
        if not (np.isfinite(x) and np.isfinite(u)):
            raise ObservationFormatError(f"line {lineno}: non-finite value")
        xs.append(x)
        us.append(u)
    return ObservationSet(np.array(xs), np.array(us), interval, bc)


def load_observations(path, interval: Interval = Interval(), bc: DirichletBC = DirichletBC()) -> ObservationSet:
    """Read an observation file; the interval and boundary data are not stored in it."""
    with open(path, encoding="utf-8") as fh:
        return parse_observations(fh.read(), interval, bc)
