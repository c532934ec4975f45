"""Exhaustive search over integer allocations, for checking the solvers on tiny instances."""

from __future__ import annotations

import math

import numpy as np

from .problem import RateInput

__all__ = ["brute_force_p1", "count_candidates"]

MAX_CANDIDATES = 10_000_000
_CHUNK = 200_000


def _options(inp: RateInput):
    """Per-cell option lists: (sat row, frames) with (-1, 0) meaning unserved.

    Pairs with zero rate and cells without users can only lose utility, so
    they are left out; the optimum is unaffected.
    """
    act = inp.active_pairs
    opts = []
    for c in range(inp.shape[1]):
        o = [(-1, 0)]
        for s in np.flatnonzero(act[:, c]):
            o.extend((int(s), x) for x in range(1, inp.n_comm + 1))
        opts.append(o)
    return opts


def count_candidates(inp: RateInput) -> int:
    return math.prod(len(o) for o in _options(inp))


def brute_force_p1(inp: RateInput, max_candidates: int = MAX_CANDIDATES):
    """Enumerate every feasible integer allocation and return ``(X*, objective)``.

    Raises ``ValueError`` with the enumeration size when it exceeds
    ``max_candidates``. Ties keep the first maximiser in enumeration order.
    """
    S, C = inp.shape
    opts = _options(inp)
    sizes = np.array([len(o) for o in opts], dtype=np.int64)
    total = math.prod(int(n) for n in sizes)
    if total > max_candidates:
        raise ValueError(f"instance needs {total} candidates, above the limit of {max_candidates}")

    coeff = inp.rate_coeff()
    width = int(sizes.max()) if C else 1
    util = np.zeros((C, width))
    frames = np.zeros((S, C, width))
    for c, o in enumerate(opts):
        for k, (s, x) in enumerate(o):
            if s < 0:
                continue
            r = (inp.ofdma_s * x - inp.handover_s[s, c]) * coeff[s, c]
            util[c, k] = inp.users[c] * math.log1p(r) if r > -1 else -np.inf
            frames[s, c, k] = x

    best_val, best_idx = -np.inf, 0
    radix = np.cumprod(np.concatenate([[1], sizes[:-1]])) if C else np.zeros(0, dtype=np.int64)
    cols = np.arange(C)
    for start in range(0, total, _CHUNK):
        idx = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        digits = (idx[:, None] // radix[None, :]) % sizes[None, :]
        val = util[cols, digits].sum(axis=1)
        load = frames[:, cols, digits].sum(axis=2)  # (S, chunk)
        val = np.where((load <= inp.budget).all(axis=0), val, -np.inf)
        k = int(np.argmax(val))
        if val[k] > best_val:
            best_val, best_idx = float(val[k]), int(idx[k])

    X = np.zeros((S, C), dtype=np.int64)
    for c in range(C):
        s, x = opts[c][(best_idx // int(radix[c])) % int(sizes[c])]
        if s >= 0:
            X[s, c] = x
    return X, best_val
