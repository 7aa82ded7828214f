"""Experiment registry, configuration and output writers."""

from .config import ExperimentConfig, Series, Sweep, read_config_file
from .registry import PRESETS, get_preset, list_experiments
from .runner import COLUMNS, ResultRow, run_experiment

__all__ = ["ExperimentConfig", "Series", "Sweep", "read_config_file", "PRESETS",
           "get_preset", "list_experiments", "COLUMNS", "ResultRow", "run_experiment"]
