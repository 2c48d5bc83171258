"""Contextual Bayesian optimization over a joint parameter-context space.

Each episode a context is sampled externally (uniformly); the policy picks
parameters by maximizing the acquisition over the parameter box with the
context coordinates clamped, observes the episode return, and refits an
anisotropic Matern surrogate over the joint space with marginal-likelihood
point estimates. Experience at one context generalizes to nearby contexts
through the joint kernel. Improvement-based acquisitions (PI/EI) are
excluded: with a continuum of contexts no incumbent is well defined.

The physical ball-throwing setup is replaced by an analytic toy landing
model with the same parameter/context boxes and return structure (squared
distance to target plus a small action penalty).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .acquisitions.closed_form import acq_ucb
from .acquisitions.monte_carlo import RepresenterSet, make_mc_evaluator
from .domain import Box, joint_box, sobol_points
from .gp import (
    Dataset,
    GaussianProcess,
    HyperBounds,
    empty_dataset,
    fit_mle,
    gp_fit,
    gp_predict,
    gp_sample_joint,
)
from .kernels import Kernel, KernelFamily, matern52
from .loop import _MEAN_OPT_SEED, normalize_strategy
from .optimize import SearchBudget, maximize_closed_form, maximize_mc_acq

CONTEXT_STRATEGIES = ("random", "greedy", "ucb", "es", "mrs", "mrs-point")

TAU_BOUNDS = (0.4, 2.0)
GAIN_BOUND = math.pi / 2.0
TARGET_AREA = Box(np.array([1.0, -1.0]), np.array([2.5, 1.0]))


@dataclass(frozen=True)
class ContextualProblem:
    """A return function over parameters x contexts, both box-bounded."""

    parameter_box: Box
    context_box: Box
    return_fn: Callable[[np.ndarray, np.ndarray], float]

    @property
    def joint_box(self) -> Box:
        return joint_box(self.parameter_box, self.context_box)

    def sample_context(self, rng: np.random.Generator) -> np.ndarray:
        return self.context_box.sample_uniform(1, rng)[0]


def toy_throw(theta: np.ndarray, s: np.ndarray) -> float:
    """Episode return of the analytic throwing model.

    ``theta = (tau, g_1..g_k)``: execution time scales throw distance,
    joint angles steer direction and modulate distance. The landing point is

        r   = 1.75 / tau * (1 + 0.3 * mean_i sin(g_i))
        phi = 0.5 * g_1
        b   = (r cos(phi), r sin(phi))

    and the return is ``-||s - b||^2 - 0.01 * (sum_i g_i^2 + (tau - 1)^2)``,
    so it is always <= 0 and the default throw (tau=1, gains 0) lands at the
    center of the target area.
    """
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    if theta.ndim != 1 or theta.size < 2:
        raise ValueError("theta must be (tau, g_1..g_k) with k >= 1")
    tau, gains = theta[0], theta[1:]
    if not (TAU_BOUNDS[0] <= tau <= TAU_BOUNDS[1]):
        raise ValueError(f"execution time {tau} outside {TAU_BOUNDS}")
    if np.any(np.abs(gains) > GAIN_BOUND):
        raise ValueError(f"joint gains must lie in [-pi/2, pi/2], got {gains}")
    r = 1.75 / tau * (1.0 + 0.3 * np.mean(np.sin(gains)))
    phi = 0.5 * gains[0]
    landing = np.array([r * np.cos(phi), r * np.sin(phi)])
    penalty = float(np.sum(gains**2) + (tau - 1.0) ** 2)
    return -float(np.sum((s - landing) ** 2)) - 0.01 * penalty


def toy_throw_problem(n_joints: int = 1) -> ContextualProblem:
    """Throwing task with ``n_joints`` controllable joints (1..4)."""
    if not 1 <= n_joints <= 4:
        raise ValueError("n_joints must be in 1..4")
    lower = np.r_[TAU_BOUNDS[0], np.full(n_joints, -GAIN_BOUND)]
    upper = np.r_[TAU_BOUNDS[1], np.full(n_joints, GAIN_BOUND)]
    return ContextualProblem(
        parameter_box=Box(lower, upper),
        context_box=TARGET_AREA,
        return_fn=toy_throw,
    )


def context_grid(box: Box, per_dim: int = 4) -> np.ndarray:
    """Grid of cell midpoints (the 16 test contexts for the default 4x4)."""
    axes = [
        box.lower[d]
        + box.width[d] * (2 * np.arange(per_dim) + 1) / (2 * per_dim)
        for d in range(box.dim)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class CPSConfig:
    """Settings of a contextual run."""

    strategy: str
    n_episodes: int
    n_seed_episodes: int = 5
    noise_std: float = 0.0
    noise_variance: float = 1e-6
    n_f: int = 1000
    n_r: int = 25
    n_y: int = 51
    n_candidates: int = 100
    n_thompson_candidates: int = 250
    mc_polish_iters: int = 0
    ucb_kappa: float = 5.0
    mle_bounds: HyperBounds = HyperBounds(
        length_scale=(0.05, 10.0), signal_variance=(0.01, 100.0)
    )
    mle_restarts: int = 3
    budget: SearchBudget = field(default_factory=SearchBudget)

    def __post_init__(self) -> None:
        strategy = normalize_strategy(self.strategy)
        if strategy not in CONTEXT_STRATEGIES:
            raise ValueError(
                f"strategy {strategy!r} is not applicable to contextual runs "
                "(no incumbent exists over a continuum of contexts)"
            )
        object.__setattr__(self, "strategy", strategy)


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    context: np.ndarray
    theta: np.ndarray
    episode_return: float
    wall_time: float


@dataclass
class CPSState:
    config: CPSConfig
    problem: ContextualProblem
    data: Dataset
    gp: GaussianProcess
    kernel: Kernel
    rng: np.random.Generator
    episode: int = 0


def init_cps_state(
    config: CPSConfig, problem: ContextualProblem, rng: np.random.Generator
) -> CPSState:
    dim = problem.joint_box.dim
    kernel = matern52(np.ones(dim))
    data = empty_dataset(dim)
    gp = gp_fit(data, kernel, config.noise_variance)
    return CPSState(
        config=config, problem=problem, data=data, gp=gp, kernel=kernel, rng=rng
    )


def _joint(theta: np.ndarray, s: np.ndarray) -> np.ndarray:
    theta = np.atleast_2d(theta)
    return np.hstack([theta, np.tile(s, (theta.shape[0], 1))])


def _context_representers(
    gp: GaussianProcess,
    theta_box: Box,
    s: np.ndarray,
    n_r: int,
    n_candidates: int,
    rng: np.random.Generator,
) -> RepresenterSet:
    """Thompson-sampled representer points in parameter space at a fixed context."""
    points = np.empty((n_r, theta_box.dim + s.size))
    for i in range(n_r):
        thetas = theta_box.sample_uniform(n_candidates, rng)
        draw = gp_sample_joint(gp, _joint(thetas, s), 1, rng).values[0]
        points[i] = _joint(thetas[np.argmax(draw)], s)[0]
    return RepresenterSet(points, np.full(n_r, 1.0 / n_r))


def select_parameters(state: CPSState, s: np.ndarray) -> np.ndarray:
    """Maximize the acquisition over parameters with the context clamped."""
    cfg, gp, rng = state.config, state.gp, state.rng
    theta_box = state.problem.parameter_box
    kind = cfg.strategy
    if kind == "random":
        return theta_box.sample_uniform(1, rng)[0]
    if kind in ("greedy", "ucb"):
        kappa = 0.0 if kind == "greedy" else cfg.ucb_kappa

        def acq(thetas: np.ndarray) -> np.ndarray:
            return acq_ucb(gp, _joint(thetas, s), kappa)

        theta, _ = maximize_closed_form(
            acq, theta_box, cfg.budget, np.random.default_rng(_MEAN_OPT_SEED)
        )
        return theta
    reps = _context_representers(
        gp, theta_box, s, cfg.n_r, cfg.n_thompson_candidates, rng
    )
    base_draws = rng.standard_normal((cfg.n_f, cfg.n_r))
    evaluate = make_mc_evaluator(
        gp, reps, kind, n_f=cfg.n_f, n_y=cfg.n_y, base_draws=base_draws
    )

    def acq(thetas: np.ndarray) -> np.ndarray:
        return evaluate(_joint(thetas, s))

    n_fresh = max(cfg.n_candidates - cfg.n_r, 0)
    fresh = sobol_points(theta_box, n_fresh, seed=int(rng.integers(2**31 - 1)))
    theta_candidates = np.vstack([reps.points[:, : theta_box.dim], fresh])
    mc_budget = replace(cfg.budget, local_max_iters=cfg.mc_polish_iters)
    theta, _ = maximize_mc_acq(acq, theta_box, theta_candidates, mc_budget)
    return theta


def _refit_mle(state: CPSState) -> None:
    """Marginal-likelihood point estimate of the joint kernel, warm-started."""
    cfg = state.config
    if len(state.data) >= 2:
        state.kernel = fit_mle(
            state.data,
            KernelFamily.MATERN52,
            bounds=cfg.mle_bounds,
            n_restarts=cfg.mle_restarts,
            rng=state.rng,
            noise_variance=cfg.noise_variance,
            anisotropic=True,
            warm_start=state.kernel,
        )
    state.gp = gp_fit(state.data, state.kernel, cfg.noise_variance)


def cps_step(state: CPSState) -> EpisodeRecord:
    """One episode: sample context, act, observe return, refit (MLE each step)."""
    t0 = time.perf_counter()
    state.episode += 1
    cfg = state.config
    s = state.problem.sample_context(state.rng)
    if state.episode <= cfg.n_seed_episodes:
        theta = state.problem.parameter_box.sample_uniform(1, state.rng)[0]
    else:
        theta = select_parameters(state, s)
    ret = state.problem.return_fn(theta, s)
    ret += cfg.noise_std * state.rng.standard_normal()
    state.data = state.data.append(_joint(theta, s)[0], ret)
    _refit_mle(state)
    return EpisodeRecord(
        episode=state.episode,
        context=s,
        theta=theta,
        episode_return=float(ret),
        wall_time=time.perf_counter() - t0,
    )


def evaluate_policy(
    gp: GaussianProcess,
    problem: ContextualProblem,
    grid: np.ndarray | None = None,
    budget: SearchBudget = SearchBudget(),
) -> float:
    """Mean true return of the greedy posterior-mean policy on test contexts.

    Deterministic given the GP: for each grid context the policy picks the
    parameters maximizing the posterior mean, and the true return function is
    evaluated there.
    """
    if grid is None:
        grid = context_grid(problem.context_box)
    total = 0.0
    for s in grid:
        def mean(thetas: np.ndarray) -> np.ndarray:
            return gp_predict(gp, _joint(thetas, s))[0]

        theta, _ = maximize_closed_form(
            mean, problem.parameter_box, budget, np.random.default_rng(_MEAN_OPT_SEED)
        )
        total += problem.return_fn(theta, s)
    return total / len(grid)


def run_cps(
    config: CPSConfig,
    problem: ContextualProblem,
    rng: np.random.Generator,
    eval_episodes: tuple[int, ...] = (),
) -> tuple[list[EpisodeRecord], dict[int, float]]:
    """Full contextual run with policy evaluations at chosen episodes."""
    state = init_cps_state(config, problem, rng)
    records: list[EpisodeRecord] = []
    evals: dict[int, float] = {}
    for _ in range(config.n_episodes):
        records.append(cps_step(state))
        if state.episode in eval_episodes:
            evals[state.episode] = evaluate_policy(
                state.gp, problem, budget=config.budget
            )
    return records, evals
