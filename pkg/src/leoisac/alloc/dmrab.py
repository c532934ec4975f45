"""Disjoint benchmark: best-rate matching followed by per-satellite allocation."""

from __future__ import annotations

import numpy as np

from .problem import (
    AllocationInfeasible,
    AllocationResult,
    RateInput,
    drop_nonpositive,
    objective_p1,
    round_half_away,
)

__all__ = ["best_rate_matching", "waterfill", "dmrab"]


def best_rate_matching(inp: RateInput) -> np.ndarray:
    """Row index of the highest-rate satellite per cell (lowest row on ties), -1 if none."""
    S, C = inp.shape
    act = inp.active_pairs
    if S == 0:
        return np.full(C, -1)
    best = np.argmax(np.where(act, inp.rho, -1.0), axis=0)
    return np.where(act.any(axis=0), best, -1)


def waterfill(users, gain, offset, cap, budget):
    """Maximise ``sum M log(offset + gain x)`` over ``0 <= x <= cap``, ``sum x <= budget``.

    The optimum is ``x = clip(M t - offset/gain, lo, cap)`` with the level
    ``t`` found exactly from the piecewise-linear total allocation.
    Raises ``AllocationInfeasible`` when the log domain cannot be reached.
    """
    M = np.asarray(users, dtype=float)
    b = np.asarray(gain, dtype=float)
    u = np.asarray(offset, dtype=float)
    base = -u / b
    lo = np.maximum(base, 0.0)
    if np.any(base >= cap) or lo.sum() >= budget:
        raise AllocationInfeasible("handover interruptions leave no room for a positive rate")
    if cap * len(M) <= budget:
        return np.full(len(M), float(cap))

    def total(t):
        return np.clip(M * t + base, lo, cap).sum()

    # breakpoints of the piecewise-linear total
    knots = np.unique(np.concatenate([(lo - base) / M, (cap - base) / M]))
    vals = np.array([total(t) for t in knots])
    k = int(np.searchsorted(vals, budget))
    if k == 0:
        t = knots[0]
    else:
        t0, t1 = knots[k - 1], knots[min(k, len(knots) - 1)]
        f0, f1 = vals[k - 1], vals[min(k, len(knots) - 1)]
        t = t1 if f1 == f0 else t0 + (budget - f0) * (t1 - t0) / (f1 - f0)
    return np.clip(M * t + base, lo, cap)


def dmrab(inp: RateInput, params=None) -> AllocationResult:
    S, C = inp.shape
    match = best_rate_matching(inp)
    coeff = inp.rate_coeff()
    Xr = np.zeros((S, C))
    X = np.zeros((S, C), dtype=np.int64)
    for s in range(S):
        cells = np.flatnonzero(match == s)
        if not len(cells):
            continue
        b = inp.ofdma_s * coeff[s, cells]
        u = 1.0 - inp.handover_s[s, cells] * coeff[s, cells]
        try:
            xs = waterfill(inp.users[cells], b, u, inp.n_comm, inp.budget)
        except AllocationInfeasible as exc:
            raise AllocationInfeasible(f"satellite {int(inp.sat_ids[s])}: {exc}") from None
        Xr[s, cells] = xs
        row = round_half_away(xs)
        surplus = row - xs
        for _ in range(int(row.sum() - inp.budget)):
            c = int(np.argmax(np.where(row > 0, surplus, -np.inf)))
            row[c] -= 1
            surplus[c] -= 1.0
        X[s, cells] = row
    X = drop_nonpositive(X, inp)
    return AllocationResult(
        X=X,
        X_relaxed=Xr,
        objective=objective_p1(X, inp),
        relaxed_objective=float("nan"),
        iterations=1,
        converged=True,
        framework="dmrab",
        info={"matched_cells": int(np.count_nonzero(match >= 0))},
    )
