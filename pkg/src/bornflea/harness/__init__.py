"""Configs, experiment dispatch, deterministic CSV output and the command line."""
from ..rng import substream
from .config import EXPERIMENTS, ExperimentConfig, load_config, validate_config
from .runner import ResultTable, read_csv, run

__all__ = ["EXPERIMENTS", "ExperimentConfig", "ResultTable", "load_config", "read_csv", "run",
           "substream", "validate_config"]
