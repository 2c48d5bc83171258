"""Single-task Bayesian-optimization driver.

One run = a handful of uniform seed queries (no records) followed by
``n_trials`` acquisition-driven steps. After every step the surrogate is
refit, a recommendation (the posterior-mean maximizer) is computed, and the
simple regret of that recommendation against the known true optimum is
recorded. The recommendation rule is identical for every strategy so regret
curves isolate acquisition behavior.

A run is sequential; independent runs are safe to execute in parallel with
isolated RNG streams.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .acquisitions.closed_form import acq_ei, acq_pi, acq_ucb, gp_ucb_kappa, incumbent
from .acquisitions.monte_carlo import make_mc_evaluator, sample_representers
from .domain import Box, sobol_points
from .gp import Dataset, GaussianProcess, empty_dataset, gp_fit, gp_predict
from .kernels import Kernel
from .optimize import SearchBudget, maximize_closed_form, maximize_mc_acq

# strategies eligible for single-task runs, with canonical ids used to derive
# per-(repetition, strategy) RNG streams; ids are append-only
STRATEGY_IDS = {
    "random": 0,
    "greedy": 1,
    "pi": 2,
    "ei": 3,
    "gp-ucb": 4,
    "ucb": 5,
    "es": 6,
    "mrs": 7,
    "mrs-point": 8,
}

_ALIASES = {
    "mrs_point": "mrs-point",
    "mrspoint": "mrs-point",
    "gp_ucb": "gp-ucb",
    "gpucb": "gp-ucb",
}

# fixed seed for the deterministic posterior-mean maximizer, shared by the
# recommendation and the greedy strategy so the two coincide exactly
_MEAN_OPT_SEED = 7


def normalize_strategy(name: str) -> str:
    key = name.strip().lower()
    key = _ALIASES.get(key, key)
    if key not in STRATEGY_IDS:
        raise ValueError(
            f"unknown strategy {name!r}; choose from {sorted(STRATEGY_IDS)}"
        )
    return key


@dataclass(frozen=True)
class RunRecord:
    """Per-trial log entry of one BO run."""

    trial_index: int
    query: np.ndarray
    observation: float
    recommendation: np.ndarray
    simple_regret: float
    wall_time: float


@dataclass(frozen=True)
class LoopConfig:
    """Everything a single-task run needs besides the objective itself."""

    domain: Box
    kernel: Kernel
    strategy: str
    n_trials: int
    noise_variance: float = 1e-6
    noise_std: float = 1e-3
    n_seed_queries: int = 1
    n_f: int = 1000
    n_r: int = 25
    n_y: int = 51
    n_candidates: int = 100
    n_thompson_candidates: int = 250
    mc_polish_iters: int = 0
    ucb_kappa: float = 5.0
    gp_ucb_delta: float = 0.1
    budget: SearchBudget = field(default_factory=SearchBudget)

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategy", normalize_strategy(self.strategy))
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.n_seed_queries < 0:
            raise ValueError("n_seed_queries must be >= 0")


@dataclass
class LoopState:
    """Mutable run state threaded through :func:`bo_step`."""

    config: LoopConfig
    data: Dataset
    gp: GaussianProcess
    rng: np.random.Generator
    trial_index: int = 0


def init_state(config: LoopConfig, rng: np.random.Generator) -> LoopState:
    data = empty_dataset(config.domain.dim)
    gp = gp_fit(data, config.kernel, config.noise_variance)
    return LoopState(config=config, data=data, gp=gp, rng=rng)


def recommend(
    gp: GaussianProcess, domain: Box, budget: SearchBudget = SearchBudget()
) -> np.ndarray:
    """Posterior-mean maximizer; the recommendation rule for all strategies."""

    def mean(X: np.ndarray) -> np.ndarray:
        return gp_predict(gp, X)[0]

    x, _ = maximize_closed_form(
        mean, domain, budget, np.random.default_rng(_MEAN_OPT_SEED)
    )
    return x


def select_query(state: LoopState) -> np.ndarray:
    """Choose the next query point with the configured strategy."""
    cfg, gp, rng = state.config, state.gp, state.rng
    kind = cfg.strategy
    if kind == "random":
        return cfg.domain.sample_uniform(1, rng)[0]
    if kind in ("greedy", "pi", "ei", "gp-ucb", "ucb"):
        if kind == "greedy":
            def acq(X):
                return gp_predict(gp, X)[0]
        elif kind == "pi":
            tau = incumbent(state.data)
            def acq(X):
                return acq_pi(gp, X, tau)
        elif kind == "ei":
            tau = incumbent(state.data)
            def acq(X):
                return acq_ei(gp, X, tau)
        else:
            if kind == "gp-ucb":
                kappa = gp_ucb_kappa(
                    state.trial_index + 1,
                    cfg.budget.n_global_candidates,
                    cfg.gp_ucb_delta,
                )
            else:
                kappa = cfg.ucb_kappa
            def acq(X):
                return acq_ucb(gp, X, kappa)
        x, _ = maximize_closed_form(
            acq, cfg.domain, cfg.budget, np.random.default_rng(_MEAN_OPT_SEED)
        )
        return x
    # sampling-based acquisitions: representer discretization + candidate sweep
    reps = sample_representers(
        gp, cfg.domain, cfg.n_r, cfg.n_thompson_candidates, rng
    )
    base_draws = rng.standard_normal((cfg.n_f, cfg.n_r))
    n_fresh = max(cfg.n_candidates - cfg.n_r, 0)
    fresh = sobol_points(cfg.domain, n_fresh, seed=int(rng.integers(2**31 - 1)))
    candidates = np.vstack([reps.points, fresh])
    evaluate = make_mc_evaluator(
        gp, reps, kind, n_f=cfg.n_f, n_y=cfg.n_y, base_draws=base_draws
    )
    mc_budget = replace(cfg.budget, local_max_iters=cfg.mc_polish_iters)
    x, _ = maximize_mc_acq(evaluate, cfg.domain, candidates, mc_budget)
    return x


def _observe(state: LoopState, objective: Callable, x: np.ndarray) -> float:
    noise = state.config.noise_std * state.rng.standard_normal()
    return float(objective(x[None, :])[0]) + noise


def _refit(state: LoopState, x: np.ndarray, y: float) -> None:
    state.data = state.data.append(x, y)
    state.gp = gp_fit(state.data, state.config.kernel, state.config.noise_variance)


def seed_queries(state: LoopState, objective: Callable) -> None:
    """Uniform-random initial queries; they produce no run records."""
    for _ in range(state.config.n_seed_queries):
        x = state.config.domain.sample_uniform(1, state.rng)[0]
        _refit(state, x, _observe(state, objective, x))


def bo_step(
    state: LoopState, objective: Callable, true_max: float
) -> RunRecord:
    """One acquisition-driven trial: query, observe, refit, recommend.

    ``objective`` is the noiseless truth (batched ``(m, d) -> (m,)``);
    observation noise is added here. The state is updated in place.
    """
    t0 = time.perf_counter()
    state.trial_index += 1
    x = select_query(state)
    y = _observe(state, objective, x)
    _refit(state, x, y)
    rec = recommend(state.gp, state.config.domain, state.config.budget)
    regret = true_max - float(objective(rec[None, :])[0])
    if regret < -1e-9:
        raise ValueError(
            f"negative simple regret {regret:.3e}: the supplied true_max is not "
            "the maximum of the objective"
        )
    return RunRecord(
        trial_index=state.trial_index,
        query=x,
        observation=y,
        recommendation=rec,
        simple_regret=max(regret, 0.0),
        wall_time=time.perf_counter() - t0,
    )


def run_bo(
    config: LoopConfig,
    objective: Callable,
    true_max: float,
    rng: np.random.Generator,
) -> list[RunRecord]:
    """Full run: seed queries, then ``n_trials`` recorded steps."""
    state = init_state(config, rng)
    seed_queries(state, objective)
    return [bo_step(state, objective, true_max) for _ in range(config.n_trials)]
