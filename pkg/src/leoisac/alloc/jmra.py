"""Joint matching and resource allocation by successive convex approximation
and the method of multipliers."""

from __future__ import annotations

import logging

import numpy as np

from .problem import (
    AllocationResult,
    RateInput,
    SolverParams,
    adjust_allocation,
    drop_nonpositive,
    objective_p1,
    round_half_away,
)
from .subproblem import SubproblemError, solve_subproblem

__all__ = ["jmra", "initial_weights"]

log = logging.getLogger(__name__)


def initial_weights(inp: RateInput) -> np.ndarray:
    """Uniform weights corresponding to an even split of all resources over the cells."""
    S, C = inp.shape
    cells = int(np.count_nonzero(inp.active_pairs.any(axis=0)))
    if S == 0 or cells == 0:
        return np.zeros((S, C))
    return np.full((S, C), cells / (inp.n_comm * inp.n_beams * S))


def jmra(inp: RateInput, params: SolverParams = SolverParams()) -> AllocationResult:
    """Allocate one frame jointly over all satellites in view.

    Returns the repaired integer allocation together with the last relaxed
    solution; ``info`` carries the per-iteration trace (penalised objective,
    worst matching violation, largest allocation change).
    """
    S, C = inp.shape
    w = initial_weights(inp)
    lam = np.zeros(C)
    p = np.full(C, params.p_init)
    x_prev = np.zeros((S, C))
    trace = []
    ipm_iters = 0
    converged = False
    sol = None
    n = 0
    stopped = ""
    for n in range(1, params.n_iter + 1):
        try:
            new = solve_subproblem(inp, w, lam, p, tol=params.kkt_tol, max_iter=params.max_ipm_iter)
        except SubproblemError as exc:
            if sol is None:
                raise
            # the penalties have grown past what double precision can resolve;
            # fall back on the last relaxed solution, as at the iteration cap
            log.warning("subproblem failed at outer iteration %d (%s); rounding the previous iterate", n, exc)
            stopped = "subproblem"
            n -= 1
            break
        sol = new
        ipm_iters += sol.iterations
        xh = sol.x
        excess = (w * xh).sum(axis=0) - 1.0
        change = float(np.abs(xh - x_prev).max()) if xh.size else 0.0
        trace.append((sol.objective, float(excess.max(initial=-1.0)), change))
        if np.all(excess <= params.theta) and change < params.theta:
            converged = True
            break
        w = 1.0 / (params.tau + xh)
        x_prev = xh
        excess = (w * xh).sum(axis=0) - 1.0
        p = np.where(excess > params.theta, params.delta * p, p)
        lam = np.maximum(0.0, lam + p * excess)
    if not converged and not stopped:
        stopped = "iteration cap"
        log.warning("allocation loop stopped at the iteration cap (%d) before converging", params.n_iter)

    xh = sol.x if sol is not None else np.zeros((S, C))
    X0 = round_half_away(xh)
    multi = int(np.count_nonzero((X0 > 0).sum(axis=0) > 1))
    X = drop_nonpositive(adjust_allocation(X0, xh, inp), inp)
    return AllocationResult(
        X=X,
        X_relaxed=xh,
        objective=objective_p1(X, inp),
        relaxed_objective=sol.objective if sol is not None else 0.0,
        iterations=n,
        converged=converged,
        framework="jmra",
        info={"trace": trace, "ipm_iterations": ipm_iters, "multi_matched_cells": multi,
              "stopped": stopped},
    )
