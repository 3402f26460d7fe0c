"""Experiment orchestration: runtime sweeps, parameter landscapes, bound checks."""

from .landscape import LandscapeConfig, run_landscape
from .stats import SummaryStat, summarize
from .sweep import SweepConfig, parse_policy, run_sweep
from .verify import GridPoint, run_verify

__all__ = [
    "GridPoint",
    "LandscapeConfig",
    "SummaryStat",
    "SweepConfig",
    "parse_policy",
    "run_landscape",
    "run_sweep",
    "run_verify",
    "summarize",
]
