"""Aggregation of run records into regret curves, histograms and files.

Raw per-trial records go to one CSV per (experiment, strategy); summary
statistics go to a single JSON report. All files are written atomically
(write to a temp file in the target directory, then rename) and all numbers
are formatted with ``repr``, so identical configurations produce byte-identical
raw CSVs. Wall-clock timings stay out of the raw CSVs for that reason; they
are summarized separately.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..contextual import EpisodeRecord
from ..loop import RunRecord

# final-regret histogram: one log10 bin per decade from 1e-8 to 1; values are
# clipped into the range so the counts always sum to the repetition count
HIST_EDGES = np.logspace(-8.0, 0.0, 9)
OUTLIER_THRESHOLD = 1e-2


@dataclass(frozen=True)
class StrategySummary:
    median_curve: np.ndarray
    mean_curve: np.ndarray
    histogram: np.ndarray
    outliers: int
    n_runs: int


@dataclass(frozen=True)
class AggregateReport:
    experiment: str
    n_trials: int
    per_strategy: dict[str, StrategySummary]
    n_failures: int
    n_tasks: int

    @property
    def complete(self) -> bool:
        return self.n_failures == 0


def regret_matrix(runs: dict[int, list[RunRecord]], n_trials: int) -> np.ndarray:
    """Rows = repetitions (sorted), columns = trials."""
    reps = sorted(runs)
    out = np.empty((len(reps), n_trials))
    for i, rep in enumerate(reps):
        records = runs[rep]
        if len(records) != n_trials:
            raise ValueError(
                f"repetition {rep} has {len(records)} records, expected {n_trials}"
            )
        out[i] = [r.simple_regret for r in records]
    return out


def aggregate(
    records: dict[str, dict[int, list[RunRecord]]],
    n_trials: int,
    experiment: str = "single_task",
    n_failures: int = 0,
    n_tasks: int | None = None,
) -> AggregateReport:
    """Median/mean regret curves, final-regret histogram and outlier counts."""
    if not records:
        raise ValueError("no records to aggregate")
    per_strategy = {}
    for strategy, runs in records.items():
        regrets = regret_matrix(runs, n_trials)
        final = regrets[:, -1]
        clipped = np.clip(final, HIST_EDGES[0], HIST_EDGES[-1])
        hist, _ = np.histogram(clipped, bins=HIST_EDGES)
        # np.histogram puts values equal to the last edge in the last bin
        per_strategy[strategy] = StrategySummary(
            median_curve=np.median(regrets, axis=0),
            mean_curve=np.mean(regrets, axis=0),
            histogram=hist,
            outliers=int(np.sum(final > OUTLIER_THRESHOLD)),
            n_runs=regrets.shape[0],
        )
    if n_tasks is None:
        n_tasks = sum(len(runs) for runs in records.values())
    return AggregateReport(
        experiment=experiment,
        n_trials=n_trials,
        per_strategy=per_strategy,
        n_failures=n_failures,
        n_tasks=n_tasks,
    )


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value: float) -> str:
    return repr(float(value))


def write_run_csv(
    path: Path, runs: dict[int, list[RunRecord]], dim: int
) -> None:
    """Raw per-trial dump for one strategy (deterministic byte content)."""
    header = (
        ["repetition", "trial"]
        + [f"query_{d}" for d in range(dim)]
        + ["observation"]
        + [f"recommendation_{d}" for d in range(dim)]
        + ["simple_regret"]
    )
    lines = [",".join(header)]
    for rep in sorted(runs):
        for r in runs[rep]:
            row = (
                [str(rep), str(r.trial_index)]
                + [_fmt(v) for v in r.query]
                + [_fmt(r.observation)]
                + [_fmt(v) for v in r.recommendation]
                + [_fmt(r.simple_regret)]
            )
            lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_episode_csv(
    path: Path, runs: dict[int, list[EpisodeRecord]], theta_dim: int
) -> None:
    """Raw per-episode dump for one contextual strategy."""
    header = (
        ["repetition", "episode"]
        + [f"context_{d}" for d in range(2)]
        + [f"theta_{d}" for d in range(theta_dim)]
        + ["episode_return"]
    )
    lines = [",".join(header)]
    for rep in sorted(runs):
        for r in runs[rep]:
            row = (
                [str(rep), str(r.episode)]
                + [_fmt(v) for v in r.context]
                + [_fmt(v) for v in r.theta]
                + [_fmt(r.episode_return)]
            )
            lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_policy_eval_csv(
    path: Path, evals: dict[int, dict[int, float]]
) -> None:
    """Test-grid mean returns at checkpoint episodes, one row per repetition."""
    lines = ["repetition,episode,mean_return"]
    for rep in sorted(evals):
        for episode in sorted(evals[rep]):
            lines.append(f"{rep},{episode},{_fmt(evals[rep][episode])}")
    _atomic_write(path, "\n".join(lines) + "\n")


def report_to_dict(report: AggregateReport) -> dict:
    return {
        "experiment": report.experiment,
        "n_trials": report.n_trials,
        "n_failures": report.n_failures,
        "n_tasks": report.n_tasks,
        "complete": report.complete,
        "histogram_edges": [float(e) for e in HIST_EDGES],
        "outlier_threshold": OUTLIER_THRESHOLD,
        "strategies": {
            name: {
                "median_curve": [float(v) for v in s.median_curve],
                "mean_curve": [float(v) for v in s.mean_curve],
                "histogram": [int(c) for c in s.histogram],
                "outliers": s.outliers,
                "n_runs": s.n_runs,
            }
            for name, s in report.per_strategy.items()
        },
    }


def write_report_json(path: Path, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
