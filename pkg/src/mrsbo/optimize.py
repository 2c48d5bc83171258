"""Derivative-free maximization of acquisition functions over a box.

Closed-form acquisitions get a scrambled low-discrepancy sweep followed by
pattern-search refinement of the best candidates. Sampling-based acquisitions
are maximized over an explicit candidate set (their estimates are only
comparable under a shared seed), with optional coordinate polish.

Acquisition callables are batched: they take an ``(m, d)`` array and return
an ``(m,)`` vector.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domain import Box, sobol_points

Objective = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SearchBudget:
    n_global_candidates: int = 1024
    n_local_restarts: int = 5
    local_max_iters: int = 40

    def __post_init__(self) -> None:
        if self.n_global_candidates < 1:
            raise ValueError("need at least one global candidate")
        if self.n_local_restarts < 0 or self.local_max_iters < 0:
            raise ValueError("counts must be nonnegative")


def _pattern_search(
    acq: Objective,
    domain: Box,
    x0: np.ndarray,
    v0: float,
    max_iters: int,
) -> tuple[np.ndarray, float]:
    """Compass search with step halving; only accepts improvements."""
    x, v = x0.copy(), v0
    step = domain.width / 8.0
    d = domain.dim
    eye = np.eye(d)
    for _ in range(max_iters):
        trial = np.vstack([x + eye * step, x - eye * step])
        trial = domain.clip(trial)
        vals = np.asarray(acq(trial))
        i = int(np.argmax(vals))
        if vals[i] > v:
            x, v = trial[i], float(vals[i])
        else:
            step = step / 2.0
            if np.all(step < 1e-9 * domain.width):
                break
    return x, v


def maximize_closed_form(
    acq: Objective,
    domain: Box,
    budget: SearchBudget = SearchBudget(),
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, float]:
    """Global sweep + local refinement maximizer for cheap acquisitions.

    The returned value is never below the best of the global candidate
    sweep; the returned point lies inside the box.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    seed = int(rng.integers(2**31 - 1))
    candidates = sobol_points(domain, budget.n_global_candidates, seed)
    values = np.asarray(acq(candidates))
    if not np.all(np.isfinite(values)):
        raise ValueError("acquisition returned non-finite values on the sweep")
    order = np.argsort(values)[::-1]
    best_x = candidates[order[0]].copy()
    best_v = float(values[order[0]])
    for i in order[: budget.n_local_restarts]:
        x, v = _pattern_search(
            acq, domain, candidates[i], float(values[i]), budget.local_max_iters
        )
        if v > best_v:
            best_x, best_v = x, v
    return best_x, best_v


def maximize_mc_acq(
    acq: Objective,
    domain: Box,
    candidates: np.ndarray,
    budget: SearchBudget = SearchBudget(),
) -> tuple[np.ndarray, float]:
    """Candidate-sweep maximizer for sampling-based acquisitions.

    ``acq`` must be seed-fixed so estimates at different points are
    comparable. The best candidate is optionally polished by coordinate
    search with re-evaluation, accepting a move only if the (re-estimated)
    value improves. Ties break toward the lowest candidate index.
    """
    candidates = np.atleast_2d(np.asarray(candidates, dtype=float))
    if candidates.shape[0] == 0:
        raise ValueError("candidate set must be nonempty")
    values = np.asarray(acq(candidates))
    i = int(np.argmax(values))
    best_x, best_v = candidates[i].copy(), float(values[i])
    if budget.local_max_iters > 0:
        best_x, best_v = _pattern_search(
            acq, domain, best_x, best_v, budget.local_max_iters
        )
    return best_x, best_v
