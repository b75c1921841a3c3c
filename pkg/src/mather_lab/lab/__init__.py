"""Experiment orchestration, reports and the command-line interface."""

from .config import ExperimentConfig
from .experiments import ScalingReport, recompute_verdicts, run

__all__ = ["ExperimentConfig", "ScalingReport", "recompute_verdicts", "run"]
