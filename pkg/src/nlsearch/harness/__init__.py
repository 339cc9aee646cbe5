"""Experiment runner behind the command-line interface."""

from .config import ExperimentConfig
from .runners import ResultRecord, run_algo1, run_algo2, run_sweep
from .verify import Check, run_verify

__all__ = [
    "Check",
    "ExperimentConfig",
    "ResultRecord",
    "run_algo1",
    "run_algo2",
    "run_sweep",
    "run_verify",
]
