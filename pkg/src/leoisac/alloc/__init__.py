"""Satellite-to-cell matching and resource allocation."""

from .dmrab import best_rate_matching, dmrab, waterfill
from .jmra import initial_weights, jmra
from .oracle import brute_force_p1, count_candidates
from .problem import (
    AllocationInfeasible,
    AllocationResult,
    RateInput,
    SolverParams,
    adjust_allocation,
    check_feasible,
    drop_nonpositive,
    objective_p1,
    per_user_throughput,
    round_half_away,
)
from .subproblem import SubproblemError, SubproblemResult, penalised_objective, solve_subproblem

FRAMEWORKS = {"jmra": jmra, "dmrab": dmrab}

__all__ = [
    "AllocationInfeasible",
    "AllocationResult",
    "FRAMEWORKS",
    "RateInput",
    "SolverParams",
    "SubproblemError",
    "SubproblemResult",
    "adjust_allocation",
    "best_rate_matching",
    "brute_force_p1",
    "check_feasible",
    "count_candidates",
    "dmrab",
    "drop_nonpositive",
    "initial_weights",
    "jmra",
    "objective_p1",
    "penalised_objective",
    "per_user_throughput",
    "round_half_away",
    "solve_subproblem",
    "waterfill",
]
