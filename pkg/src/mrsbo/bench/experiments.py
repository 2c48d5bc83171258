"""Experiment orchestration: repetitions x strategies, seeding, reporting.

Three experiments are provided:

* ``single_task``: objectives drawn from the same RBF model the surrogate
  uses (no model mismatch), regret of the posterior-mean recommendation.
* ``mismatch``: identical protocol but objectives drawn from a rational
  quadratic model while the surrogate keeps the RBF kernel.
* ``multitask``: contextual policy search on the toy throwing task, scored
  by the mean true return of the greedy policy on a 4x4 test-context grid.

Seeding: test functions are derived from (master_seed, repetition) only, so
every strategy sees the identical function sequence and adding strategies
never changes it; per-run streams are derived from (master_seed, repetition,
canonical strategy id), so they are mutually independent and stable under
reordering of the strategy list. Repetition tasks are self-contained and may
run in parallel processes; results are reduced in deterministic order.
"""

from __future__ import annotations

import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..contextual import (
    CPSConfig,
    EpisodeRecord,
    toy_throw_problem,
    run_cps,
)
from ..domain import unit_box
from ..gp import HyperBounds
from ..kernels import rational_quadratic, rbf
from ..loop import STRATEGY_IDS, LoopConfig, RunRecord, normalize_strategy, run_bo
from .aggregate import (
    AggregateReport,
    aggregate,
    report_to_dict,
    write_episode_csv,
    write_policy_eval_csv,
    write_report_json,
    write_run_csv,
)
from .functions import generate_test_function

EXPERIMENTS = ("single_task", "mismatch", "multitask")

SINGLE_TASK_STRATEGIES = ("pi", "ei", "gp-ucb", "es", "mrs", "mrs-point")
MULTITASK_STRATEGIES = ("mrs", "es", "ucb", "greedy", "random")


@dataclass(frozen=True)
class ExperimentConfig:
    """Desk-scale defaults; ``paper_scale=True`` restores the full protocol."""

    experiment: str
    n_repetitions: int
    n_trials: int
    n_f: int
    n_r: int = 25
    n_y: int = 51
    noise_std: float = 1e-3
    master_seed: int = 0
    strategies: tuple[str, ...] = ()
    out_dir: str | None = None
    threads: int = 1
    failure_budget: float = 0.05
    n_joints: int = 1
    eval_every: int = 20
    mc_polish_iters: int = 0

    def __post_init__(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        for name in ("n_repetitions", "n_trials", "n_f", "n_r", "n_y"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.noise_std < 0:
            raise ValueError("noise_std must be nonnegative")
        if not 0 <= self.failure_budget <= 1:
            raise ValueError("failure_budget must be in [0, 1]")
        strategies = tuple(normalize_strategy(s) for s in self.strategies)
        if not strategies:
            raise ValueError("at least one strategy is required")
        if len(set(strategies)) != len(strategies):
            raise ValueError("duplicate strategies in list")
        object.__setattr__(self, "strategies", strategies)


def default_config(experiment: str, paper_scale: bool = False, **overrides) -> ExperimentConfig:
    """Spec defaults per experiment at desk scale (or paper scale)."""
    if experiment in ("single_task", "mismatch"):
        base = dict(
            experiment=experiment,
            n_repetitions=250 if paper_scale else 50,
            n_trials=100,
            n_f=1000 if paper_scale else 500,
            n_r=25,
            n_y=51,
            noise_std=1e-3,
            strategies=SINGLE_TASK_STRATEGIES,
        )
    elif experiment == "multitask":
        base = dict(
            experiment=experiment,
            n_repetitions=30 if paper_scale else 10,
            n_trials=200,
            n_f=1000 if paper_scale else 500,
            n_r=25,
            n_y=51,
            noise_std=0.0,
            strategies=MULTITASK_STRATEGIES,
        )
    else:
        raise ValueError(f"unknown experiment {experiment!r}")
    base.update(overrides)
    return ExperimentConfig(**base)


def function_rng(master_seed: int, repetition: int) -> np.random.Generator:
    """Stream that generates the test function of one repetition."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(0, repetition))
    )


def run_rng(master_seed: int, repetition: int, strategy: str) -> np.random.Generator:
    """Independent stream for one (repetition, strategy) run."""
    return np.random.default_rng(
        np.random.SeedSequence(
            entropy=master_seed,
            spawn_key=(1, repetition, STRATEGY_IDS[normalize_strategy(strategy)]),
        )
    )


@dataclass
class ExperimentResult:
    report: object
    records: dict[str, dict[int, object]]
    failures: list[tuple[int, str, str]]
    n_tasks: int
    timings: dict[str, float] = field(default_factory=dict)
    out_dir: Path | None = None

    @property
    def failure_fraction(self) -> float:
        return len(self.failures) / self.n_tasks if self.n_tasks else 0.0


def _generative_kernel(experiment: str):
    if experiment == "mismatch":
        return rational_quadratic(0.1, alpha=1.0, signal_variance=1.0)
    return rbf(0.1, signal_variance=1.0)


def _regret_repetition(args: tuple) -> tuple[int, dict[str, object], dict[str, str]]:
    """Run every strategy of one repetition on its shared test function."""
    config, repetition = args
    fn = generate_test_function(
        _generative_kernel(config.experiment), function_rng(config.master_seed, repetition)
    )
    loop_template = LoopConfig(
        domain=fn.domain,
        kernel=rbf(0.1, signal_variance=1.0),
        strategy="random",
        n_trials=config.n_trials,
        noise_variance=config.noise_std**2,
        noise_std=config.noise_std,
        n_f=config.n_f,
        n_r=config.n_r,
        n_y=config.n_y,
        mc_polish_iters=config.mc_polish_iters,
    )
    results: dict[str, object] = {}
    errors: dict[str, str] = {}
    for strategy in config.strategies:
        try:
            records = run_bo(
                replace(loop_template, strategy=strategy),
                fn,
                fn.true_max,
                run_rng(config.master_seed, repetition, strategy),
            )
            results[strategy] = records
        except Exception:
            errors[strategy] = traceback.format_exc(limit=8)
    return repetition, results, errors


def _multitask_repetition(args: tuple) -> tuple[int, dict[str, object], dict[str, str]]:
    config, repetition = args
    problem = toy_throw_problem(config.n_joints)
    eval_episodes = tuple(
        sorted(set(range(config.eval_every, config.n_trials + 1, config.eval_every))
               | {config.n_trials})
    )
    results: dict[str, object] = {}
    errors: dict[str, str] = {}
    for strategy in config.strategies:
        cps = CPSConfig(
            strategy=strategy,
            n_episodes=config.n_trials,
            noise_std=config.noise_std,
            n_f=config.n_f,
            n_r=config.n_r,
            n_y=config.n_y,
            mc_polish_iters=config.mc_polish_iters,
            mle_bounds=HyperBounds(
                length_scale=(0.05, 10.0), signal_variance=(0.01, 100.0)
            ),
        )
        try:
            records, evals = run_cps(
                cps, problem, run_rng(config.master_seed, repetition, strategy),
                eval_episodes,
            )
            results[strategy] = (records, evals)
        except Exception:
            errors[strategy] = traceback.format_exc(limit=8)
    return repetition, results, errors


def _run_tasks(config: ExperimentConfig, worker) -> list[tuple]:
    args = [(config, rep) for rep in range(config.n_repetitions)]
    if config.threads > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            outputs = list(pool.map(worker, args))
    else:
        outputs = [worker(a) for a in args]
    return sorted(outputs, key=lambda item: item[0])


@dataclass(frozen=True)
class MultitaskSummary:
    eval_episodes: tuple[int, ...]
    mean_curve: np.ndarray
    median_curve: np.ndarray
    final_mean_return: float
    n_runs: int


@dataclass(frozen=True)
class MultitaskReport:
    experiment: str
    n_episodes: int
    per_strategy: dict[str, MultitaskSummary]
    n_failures: int
    n_tasks: int

    @property
    def complete(self) -> bool:
        return self.n_failures == 0


def _multitask_report(
    evals: dict[str, dict[int, dict[int, float]]],
    n_episodes: int,
    n_failures: int,
    n_tasks: int,
) -> MultitaskReport:
    per_strategy = {}
    for strategy, by_rep in evals.items():
        reps = sorted(by_rep)
        episodes = tuple(sorted(by_rep[reps[0]]))
        matrix = np.array([[by_rep[r][e] for e in episodes] for r in reps])
        per_strategy[strategy] = MultitaskSummary(
            eval_episodes=episodes,
            mean_curve=matrix.mean(axis=0),
            median_curve=np.median(matrix, axis=0),
            final_mean_return=float(matrix[:, -1].mean()),
            n_runs=len(reps),
        )
    return MultitaskReport(
        experiment="multitask",
        n_episodes=n_episodes,
        per_strategy=per_strategy,
        n_failures=n_failures,
        n_tasks=n_tasks,
    )


def _multitask_report_dict(report: MultitaskReport) -> dict:
    return {
        "experiment": report.experiment,
        "n_episodes": report.n_episodes,
        "n_failures": report.n_failures,
        "n_tasks": report.n_tasks,
        "complete": report.complete,
        "strategies": {
            name: {
                "eval_episodes": list(s.eval_episodes),
                "mean_curve": [float(v) for v in s.mean_curve],
                "median_curve": [float(v) for v in s.median_curve],
                "final_mean_return": s.final_mean_return,
                "n_runs": s.n_runs,
            }
            for name, s in report.per_strategy.items()
        },
    }


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute the configured experiment; write raw CSVs and the JSON report.

    Partial failures are recorded per (repetition, strategy) and aggregation
    proceeds over the completed runs; the report carries the counts.
    """
    if config.experiment == "multitask":
        return _run_multitask(config)
    outputs = _run_tasks(config, _regret_repetition)
    by_strategy: dict[str, dict[int, list[RunRecord]]] = {
        s: {} for s in config.strategies
    }
    failures: list[tuple[int, str, str]] = []
    for repetition, results, errors in outputs:
        for strategy, records in results.items():
            by_strategy[strategy][repetition] = records
        for strategy, message in errors.items():
            failures.append((repetition, strategy, message))
    completed = {s: runs for s, runs in by_strategy.items() if runs}
    n_tasks = config.n_repetitions * len(config.strategies)
    report = aggregate(
        completed,
        config.n_trials,
        experiment=config.experiment,
        n_failures=len(failures),
        n_tasks=n_tasks,
    )
    timings = {
        s: float(sum(r.wall_time for runs in by_strategy[s].values() for r in runs))
        for s in completed
    }
    result = ExperimentResult(
        report=report,
        records=completed,
        failures=failures,
        n_tasks=n_tasks,
        timings=timings,
    )
    if config.out_dir is not None:
        out = Path(config.out_dir)
        for strategy, runs in completed.items():
            write_run_csv(out / f"{config.experiment}_{strategy}.csv", runs, dim=2)
        write_report_json(
            out / f"{config.experiment}_report.json", report_to_dict(report)
        )
        result.out_dir = out
    return result


def _run_multitask(config: ExperimentConfig) -> ExperimentResult:
    outputs = _run_tasks(config, _multitask_repetition)
    records: dict[str, dict[int, list[EpisodeRecord]]] = {
        s: {} for s in config.strategies
    }
    evals: dict[str, dict[int, dict[int, float]]] = {s: {} for s in config.strategies}
    failures: list[tuple[int, str, str]] = []
    for repetition, results, errors in outputs:
        for strategy, (episode_records, policy_evals) in results.items():
            records[strategy][repetition] = episode_records
            evals[strategy][repetition] = policy_evals
        for strategy, message in errors.items():
            failures.append((repetition, strategy, message))
    completed_evals = {s: ev for s, ev in evals.items() if ev}
    n_tasks = config.n_repetitions * len(config.strategies)
    report = _multitask_report(
        completed_evals, config.n_trials, len(failures), n_tasks
    )
    timings = {
        s: float(
            sum(r.wall_time for runs in records[s].values() for r in runs)
        )
        for s in records
        if records[s]
    }
    result = ExperimentResult(
        report=report,
        records={s: r for s, r in records.items() if r},
        failures=failures,
        n_tasks=n_tasks,
        timings=timings,
    )
    if config.out_dir is not None:
        out = Path(config.out_dir)
        theta_dim = 1 + config.n_joints
        for strategy, runs in result.records.items():
            write_episode_csv(
                out / f"multitask_{strategy}.csv", runs, theta_dim=theta_dim
            )
        for strategy, ev in completed_evals.items():
            write_policy_eval_csv(
                out / f"multitask_{strategy}_policy.csv", ev
            )
        write_report_json(
            out / "multitask_report.json", _multitask_report_dict(report)
        )
        result.out_dir = out
    return result
