"""
CLI module for spikedpca.

Provides the ``spca`` command: Monte Carlo sweeps, bound coverage and
moment studies, and the asymptotic calculators.
"""

from .main import main
from .parser import _expand_abbreviations, build_parser, print_overview
from .commands import (
    cmd_coverage,
    cmd_moments,
    cmd_phase,
    cmd_sweep_n,
    cmd_sweep_sigma,
    HAS_RICH,
)

__all__ = [
    "build_parser",
    "main",
    "cmd_coverage",
    "cmd_moments",
    "cmd_phase",
    "cmd_sweep_n",
    "cmd_sweep_sigma",
    "_expand_abbreviations",
    "print_overview",
    "HAS_RICH",
]
