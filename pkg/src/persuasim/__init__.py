"""Belief-diffusion simulation and optimal-stopping persuasion design.

A sender releases information about a binary state over time; the
receiver's posterior diffuses in (0, 1) and a threshold rule decides the
outcome when the sender stops.  This package simulates the (possibly
garbled) posterior via a natural-scale time change, evaluates exit-time
closed forms and embedding costs, and solves the sender's reduced
one-dimensional design problem under convex delay costs.
"""

from .closed_forms import (
    embedding_time_via_potential,
    expected_exit_time,
    gamma_of_s,
    laplace_exit_transform,
    potential,
)
from .costs import (
    CostEstimate,
    CostModelError,
    LaplaceMixtureCost,
    LinearCost,
    PowerCost,
    SumCost,
    TabulatedCost,
    eval_cost,
    expected_cost,
    icx_dominates,
)
from .dynamics import (
    CoupledComparison,
    PathOutcome,
    SimConfig,
    SimulationError,
    coupled_no_garbling_comparison,
    direct_euler_check,
    residual_curve,
    sigma0,
    simulate_exit,
    stats_from_outcomes,
    write_outcomes_csv,
)
from .model import (
    GarblingPolicy,
    HittingStats,
    InvalidModelError,
    ModelParams,
    TerminalLaw,
    make_two_atom_law,
    success_probability,
    validate_law,
)
from .solver import SolveResult, objective, solve_sender, sweep_convexity, sweep_snr

__version__ = "0.1.0"

__all__ = [
    "CostEstimate",
    "CostModelError",
    "CoupledComparison",
    "GarblingPolicy",
    "HittingStats",
    "InvalidModelError",
    "LaplaceMixtureCost",
    "LinearCost",
    "ModelParams",
    "PathOutcome",
    "PowerCost",
    "SimConfig",
    "SimulationError",
    "SolveResult",
    "SumCost",
    "TabulatedCost",
    "TerminalLaw",
    "coupled_no_garbling_comparison",
    "direct_euler_check",
    "embedding_time_via_potential",
    "eval_cost",
    "expected_cost",
    "expected_exit_time",
    "gamma_of_s",
    "icx_dominates",
    "laplace_exit_transform",
    "make_two_atom_law",
    "objective",
    "potential",
    "residual_curve",
    "sigma0",
    "simulate_exit",
    "solve_sender",
    "stats_from_outcomes",
    "success_probability",
    "sweep_convexity",
    "sweep_snr",
    "validate_law",
    "write_outcomes_csv",
]
