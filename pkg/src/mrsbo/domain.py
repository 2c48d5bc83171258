"""Bounded box domains for search and sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower_i, upper_i]`` per dimension."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("lower and upper must be 1-d vectors of equal length")
        if not np.all(hi > lo):
            raise ValueError("upper bounds must exceed lower bounds")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, X: np.ndarray, atol: float = 0.0) -> bool:
        X = np.atleast_2d(X)
        return bool(
            np.all(X >= self.lower - atol) and np.all(X <= self.upper + atol)
        )

    def clip(self, X: np.ndarray) -> np.ndarray:
        return np.clip(X, self.lower, self.upper)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` i.i.d. uniform points, shape ``(n, dim)``."""
        return self.lower + rng.random((n, self.dim)) * self.width


def unit_box(dim: int) -> Box:
    return Box(np.zeros(dim), np.ones(dim))


def sobol_points(box: Box, n: int, seed: int) -> np.ndarray:
    """``n`` scrambled-Sobol points inside ``box`` (deterministic per seed)."""
    if n <= 0:
        return np.empty((0, box.dim))
    sampler = qmc.Sobol(d=box.dim, scramble=True, seed=seed)
    u = sampler.random(n)
    return box.lower + u * box.width


def joint_box(a: Box, b: Box) -> Box:
    """Concatenate two boxes into one over the stacked coordinates."""
    return Box(
        np.concatenate([a.lower, b.lower]), np.concatenate([a.upper, b.upper])
    )
