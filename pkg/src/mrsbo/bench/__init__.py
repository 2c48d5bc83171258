from .aggregate import AggregateReport, StrategySummary, aggregate
from .demo import DemoConfig, demo1d
from .experiments import (
    ExperimentConfig,
    ExperimentResult,
    default_config,
    run_experiment,
)
from .functions import TestFunction, generate_test_function

__all__ = [
    "AggregateReport",
    "DemoConfig",
    "ExperimentConfig",
    "ExperimentResult",
    "StrategySummary",
    "TestFunction",
    "aggregate",
    "default_config",
    "demo1d",
    "generate_test_function",
    "run_experiment",
]
