"""Randomized data-driven stabilization of stochastic linear systems.

Implements the stochastic feedback (SF) and stochastic parameter (SP)
episode algorithms, the Riccati machinery they rely on, closed-loop
least-squares identification, and a Monte Carlo harness for studying
stabilization speed and failure probability.
"""

from .algorithms import (
    AlgoConfig,
    RunResult,
    draw_feedback,
    draw_parameter,
    run_sf,
    run_sp,
    split_streams,
)
from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyInput,
    EmptyTrajectory,
    NoConvergence,
    NonFinite,
    RandstabError,
    RankDeficientBasis,
    RedrawBudgetExhausted,
    SingularInnerMatrix,
)
from .estimation import (
    ClosedLoopEstimate,
    GainBasis,
    closed_loop_ls,
    estimation_error,
    recover_theta,
)
from .harness import (
    ExperimentConfig,
    ScatterRecord,
    SummaryRow,
    TrialRecord,
    derive_seed,
    lemma1_scatter,
    run_experiment,
    run_trial,
    summarize,
)
from .riccati import (
    CostPair,
    RiccatiSolution,
    SolverOptions,
    feedback_gain,
    solve_dare,
    spectral_radius,
)
from .system import (
    DynamicsParameter,
    NoiseModel,
    TrajectoryLog,
    load_system,
    preset_benchmark,
    simulate_episode,
    step,
)

__all__ = [
    "AlgoConfig",
    "ClosedLoopEstimate",
    "ConfigError",
    "CostPair",
    "DimensionMismatch",
    "DynamicsParameter",
    "EmptyInput",
    "EmptyTrajectory",
    "ExperimentConfig",
    "GainBasis",
    "NoConvergence",
    "NoiseModel",
    "NonFinite",
    "RandstabError",
    "RankDeficientBasis",
    "RedrawBudgetExhausted",
    "RiccatiSolution",
    "RunResult",
    "ScatterRecord",
    "SingularInnerMatrix",
    "SolverOptions",
    "SummaryRow",
    "TrajectoryLog",
    "TrialRecord",
    "closed_loop_ls",
    "derive_seed",
    "draw_feedback",
    "draw_parameter",
    "estimation_error",
    "feedback_gain",
    "lemma1_scatter",
    "load_system",
    "preset_benchmark",
    "recover_theta",
    "run_experiment",
    "run_sf",
    "run_sp",
    "run_trial",
    "simulate_episode",
    "solve_dare",
    "spectral_radius",
    "split_streams",
    "step",
    "summarize",
]
__version__ = "0.1.0"
