"""Command-line benchmark harness.

Subcommands mirror the experiments (``single-task``, ``mismatch``,
``multitask``) plus the 1-d acquisition comparison (``demo-1d``). Every flag
can also be supplied through a JSON config file (underscored keys, e.g.
``{"reps": 50, "noise_std": 0.001}``); explicit flags override the file.

Exit codes: 0 success, 1 configuration error, 2 numerical failures exceeding
the per-repetition failure budget (default 5%).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .demo import DemoConfig, demo1d
from .experiments import default_config, run_experiment


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.UsageError(f"cannot read config file {path}: {exc}")
    if not isinstance(payload, dict):
        raise click.UsageError("config file must hold a JSON object")
    return payload


def _merged(ctx: click.Context, file_values: dict, **flag_names) -> dict:
    """Flag > config file > default, resolved per parameter."""
    out = {}
    for param, file_key in flag_names.items():
        source = ctx.get_parameter_source(param)
        if source is not None and source.name == "COMMANDLINE":
            out[param] = ctx.params[param]
        elif file_key in file_values:
            out[param] = file_values[file_key]
        else:
            out[param] = ctx.params[param]
    return out


_EXPERIMENT_OPTIONS = [
    click.option("--reps", type=int, default=None, help="Number of repetitions."),
    click.option("--trials", type=int, default=None,
                 help="Trials per run (episodes for multitask)."),
    click.option("--nf", type=int, default=None, help="Posterior draws per sample block."),
    click.option("--nr", type=int, default=None, help="Representer points."),
    click.option("--ny", type=int, default=None, help="Fantasy observations per query."),
    click.option("--noise-std", type=float, default=None,
                 help="Observation noise standard deviation."),
    click.option("--seed", type=int, default=None, help="Master seed."),
    click.option("--strategies", type=str, default=None,
                 help="Comma-separated strategy list (e.g. 'ES,MRS,MRS-point')."),
    click.option("--out", type=click.Path(file_okay=False), default=None,
                 help="Output directory for raw CSVs and the JSON report."),
    click.option("--paper-scale", is_flag=True, default=False,
                 help="Restore full-scale repetition counts and sample sizes."),
    click.option("--threads", type=int, default=None, help="Parallel worker processes."),
    click.option("--config", "config_path", type=click.Path(exists=False), default=None,
                 help="JSON config file mirroring the flags."),
]


def _experiment_options(fn):
    for option in reversed(_EXPERIMENT_OPTIONS):
        fn = option(fn)
    return fn


def _run(ctx: click.Context, experiment: str, **extra_overrides) -> None:
    params = ctx.params
    file_values = _load_config_file(params["config_path"])
    merged = _merged(
        ctx,
        file_values,
        reps="reps",
        trials="trials",
        nf="nf",
        nr="nr",
        ny="ny",
        noise_std="noise_std",
        seed="seed",
        strategies="strategies",
        out="out",
        paper_scale="paper_scale",
        threads="threads",
    )
    overrides = dict(extra_overrides)
    mapping = {
        "reps": "n_repetitions",
        "trials": "n_trials",
        "nf": "n_f",
        "nr": "n_r",
        "ny": "n_y",
        "noise_std": "noise_std",
        "seed": "master_seed",
        "out": "out_dir",
        "threads": "threads",
    }
    for flag, key in mapping.items():
        if merged[flag] is not None:
            overrides[key] = merged[flag]
    if merged["strategies"] is not None:
        raw = merged["strategies"]
        names = raw.split(",") if isinstance(raw, str) else list(raw)
        overrides["strategies"] = tuple(n for n in (s.strip() for s in names) if n)
    try:
        config = default_config(
            experiment, paper_scale=bool(merged["paper_scale"]), **overrides
        )
    except (ValueError, TypeError) as exc:
        raise click.UsageError(str(exc))

    click.echo(
        f"{experiment}: {config.n_repetitions} repetitions x "
        f"{config.n_trials} trials, strategies {', '.join(config.strategies)}"
    )
    result = run_experiment(config)
    _print_summary(result)
    if result.failures:
        click.echo(f"{len(result.failures)}/{result.n_tasks} runs failed", err=True)
        for repetition, strategy, message in result.failures[:5]:
            click.echo(
                f"  rep {repetition} [{strategy}]: {message.strip().splitlines()[-1]}",
                err=True,
            )
    if result.failure_fraction > config.failure_budget:
        click.echo(
            f"failure fraction {result.failure_fraction:.1%} exceeds budget "
            f"{config.failure_budget:.0%}",
            err=True,
        )
        sys.exit(2)


def _print_summary(result) -> None:
    report = result.report
    for name, summary in report.per_strategy.items():
        if hasattr(summary, "final_mean_return"):
            click.echo(
                f"  {name:>10}: final mean test return "
                f"{summary.final_mean_return:+.4f} over {summary.n_runs} runs"
            )
        else:
            click.echo(
                f"  {name:>10}: final regret median {summary.median_curve[-1]:.3e} "
                f"mean {summary.mean_curve[-1]:.3e} outliers {summary.outliers}"
                f" ({summary.n_runs} runs)"
            )
        if name in result.timings:
            click.echo(f"  {'':>10}  total step time {result.timings[name]:.1f}s")
    if result.out_dir is not None:
        click.echo(f"wrote raw CSVs and report to {result.out_dir}")


@click.group()
def cli() -> None:
    """Bayesian-optimization benchmarks for regret-based acquisitions."""


@cli.command("single-task")
@_experiment_options
@click.pass_context
def single_task(ctx: click.Context, **_params) -> None:
    """Generative RBF objectives, surrogate matched (no model mismatch)."""
    _run(ctx, "single_task")


@cli.command("mismatch")
@_experiment_options
@click.pass_context
def mismatch(ctx: click.Context, **_params) -> None:
    """Rational-quadratic objectives against the RBF surrogate."""
    _run(ctx, "mismatch")


@cli.command("multitask")
@_experiment_options
@click.option("--joints", type=click.IntRange(1, 4), default=None,
              help="Controllable joints of the toy throwing task.")
@click.option("--eval-every", type=int, default=None,
              help="Policy-evaluation checkpoint spacing in episodes.")
@click.pass_context
def multitask(ctx: click.Context, joints, eval_every, **_params) -> None:
    """Contextual policy search on the toy throwing task."""
    file_values = _load_config_file(ctx.params["config_path"])
    extra = {}
    merged = _merged(ctx, file_values, joints="joints", eval_every="eval_every")
    if merged["joints"] is not None:
        extra["n_joints"] = merged["joints"]
    if merged["eval_every"] is not None:
        extra["eval_every"] = merged["eval_every"]
    _run(ctx, "multitask", **extra)


@cli.command("demo-1d")
@click.option("--nf", type=int, default=None, help="Posterior draws per sample block.")
@click.option("--nr", type=int, default=None, help="Representer points.")
@click.option("--ny", type=int, default=None, help="Fantasy observations per query.")
@click.option("--seed", type=int, default=None, help="Seed for draws and representers.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Output directory for demo1d.csv.")
@click.option("--config", "config_path", type=click.Path(exists=False), default=None,
              help="JSON config file mirroring the flags.")
@click.pass_context
def demo_1d(ctx: click.Context, **_params) -> None:
    """Acquisition surfaces on the 1-d illustration fixture."""
    file_values = _load_config_file(ctx.params["config_path"])
    merged = _merged(
        ctx, file_values, nf="nf", nr="nr", ny="ny", seed="seed", out="out"
    )
    overrides = {
        key: merged[flag]
        for flag, key in (("nf", "n_f"), ("nr", "n_r"), ("ny", "n_y"),
                          ("seed", "seed"), ("out", "out_dir"))
        if merged[flag] is not None
    }
    try:
        config = DemoConfig(**overrides)
    except (ValueError, TypeError) as exc:
        raise click.UsageError(str(exc))
    table = demo1d(config)
    click.echo(
        f"demo grid of {len(table['x'])} points; columns: {', '.join(table)}"
    )
    if config.out_dir is not None:
        click.echo(f"wrote {Path(config.out_dir) / 'demo1d.csv'}")


def main() -> None:
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        click.echo(f"config error: {exc.format_message()}", err=True)
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(1)
    except click.exceptions.Abort:
        sys.exit(1)


if __name__ == "__main__":
    main()
