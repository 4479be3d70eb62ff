"""Greedy and Greedy-Power selection of ad creatives over a keyword x creative score matrix."""

from .core import (
    CoverageCache,
    InfeasibleError,
    InvalidSelectionError,
    MatrixFormatError,
    ScoreMatrix,
    add_to_cache,
    build_cache,
    goal,
    marginal_gain,
)
from .greedy import GreedyStep, GreedyTrace, greedy_select
from .oracle import BudgetExceededError, OracleBudget, compare_to_exact, exact_select, greedy_optimality_rate
from .power import (
    PowerParams,
    RefinementResult,
    greedy_power,
    refine_once,
    sample_removal_subsets,
    split_frequency,
    split_probability,
)
from .sim import PRESETS, ExperimentConfig, ExperimentReport, generate_matrix, preset, run_experiment, run_trajectory

__version__ = "0.1.0"
