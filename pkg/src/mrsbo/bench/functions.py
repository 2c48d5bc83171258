"""Generative synthetic test functions for the benchmark experiments.

A test function is built by sampling function values jointly from a GP prior
at uniform support points, fitting a noise-free GP to them, and using its
posterior mean as the (smooth, cheap, exactly known) objective. The true
maximum is located once by dense-grid evaluation plus pattern-search polish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..domain import Box, unit_box
from ..gp import Dataset, GaussianProcess, _chol_with_jitter, gp_fit, gp_predict
from ..kernels import Kernel, kernel_eval
from ..optimize import _pattern_search

_CHUNK = 8192


@dataclass(frozen=True)
class TestFunction:
    """Posterior-mean objective with its known optimum."""

    gp: GaussianProcess
    domain: Box
    true_max: float
    true_argmax: np.ndarray

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[0] <= _CHUNK:
            return gp_predict(self.gp, X)[0]
        out = np.empty(X.shape[0])
        for i in range(0, X.shape[0], _CHUNK):
            out[i : i + _CHUNK] = gp_predict(self.gp, X[i : i + _CHUNK])[0]
        return out


def _dense_grid(domain: Box, resolution: int) -> np.ndarray:
    axes = [
        np.linspace(domain.lower[d], domain.upper[d], resolution)
        for d in range(domain.dim)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def generate_test_function(
    kernel: Kernel,
    rng: np.random.Generator,
    domain: Box | None = None,
    n_support: int = 250,
    grid_resolution: int = 500,
    polish_starts: int = 20,
    polish_iters: int = 200,
) -> TestFunction:
    """Draw one objective from the generative model on ``domain``.

    The returned callable interpolates the jointly sampled support values
    (noise-free fit); ``true_max`` comes from a ``grid_resolution`` per-axis
    sweep refined by pattern search from the best grid cells.
    """
    if n_support < 2:
        raise ValueError("need at least 2 support points")
    if domain is None:
        domain = unit_box(2)
    if grid_resolution**domain.dim > 4_000_000:
        raise ValueError("dense grid too large; lower grid_resolution")
    support = domain.sample_uniform(n_support, rng)
    K = kernel_eval(kernel, support, support)
    L, _ = _chol_with_jitter(K)
    values = L @ rng.standard_normal(n_support)
    gp = gp_fit(Dataset(support, values), kernel, noise_variance=0.0)
    probe = TestFunction(gp=gp, domain=domain, true_max=0.0, true_argmax=support[0])

    grid = _dense_grid(domain, grid_resolution)
    grid_values = probe(grid)
    order = np.argsort(grid_values)[::-1]
    best_x = grid[order[0]].copy()
    best_v = float(grid_values[order[0]])
    for i in order[:polish_starts]:
        x, v = _pattern_search(
            probe, domain, grid[i], float(grid_values[i]), polish_iters
        )
        if v > best_v:
            best_x, best_v = x, v
    return TestFunction(gp=gp, domain=domain, true_max=best_v, true_argmax=best_x)
