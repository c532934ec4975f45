"""Random toy allocation instances and their comparison against exhaustive search."""

from __future__ import annotations

import numpy as np

from ..alloc import AllocationInfeasible, RateInput, SolverParams, brute_force_p1, dmrab, jmra
from .seeds import stream

__all__ = ["toy_instance", "compare_with_oracle"]


def toy_instance(rng, n_sats=2, cells=(3, 4), n_comm=4, n_beams=1, ofdma_s=0.01, users=(1, 100),
                 rate_range=(1e6, 1e8)) -> RateInput:
    """Instance with log-uniform rates, uniform integer users and no handover cost."""
    C = int(rng.integers(cells[0], cells[1] + 1))
    rho = np.exp(rng.uniform(np.log(rate_range[0]), np.log(rate_range[1]), size=(n_sats, C)))
    M = rng.integers(users[0], users[1] + 1, size=C).astype(float)
    return RateInput(rho, M, np.zeros((n_sats, C)), n_comm, n_beams, ofdma_s, n_comm * ofdma_s)


def compare_with_oracle(n_instances=20, seed=0, params: SolverParams = SolverParams(), **kw) -> list:
    """Objective of jmra, dmrab and the exhaustive optimum on ``n_instances`` toy instances.

    Each row holds ``optimum``, ``jmra``, ``dmrab`` (``None`` when infeasible)
    and ``ratio = jmra / optimum``.
    """
    rows = []
    for i in range(n_instances):
        inp = toy_instance(stream(seed, "toy", i), **kw)
        _, best = brute_force_p1(inp)
        j = jmra(inp, params).objective
        try:
            d = dmrab(inp).objective
        except AllocationInfeasible:
            d = None
        rows.append({"instance": i, "cells": inp.shape[1], "optimum": best, "jmra": j, "dmrab": d,
                     "ratio": j / best if best > 0 else 1.0})
    return rows
