"""Problem data, per-user throughput, the integer objective and feasibility repair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RateInput",
    "SolverParams",
    "AllocationResult",
    "AllocationInfeasible",
    "per_user_throughput",
    "objective_p1",
    "round_half_away",
    "adjust_allocation",
    "drop_nonpositive",
    "check_feasible",
]


class AllocationInfeasible(RuntimeError):
    """The allocation framework could not produce a valid allocation for the frame."""


@dataclass(frozen=True)
class SolverParams:
    tau: float = 0.5
    theta: float = 0.01
    delta: float = 10.0
    p_init: float = 1.0
    n_iter: int = 50
    kkt_tol: float = 1e-9
    max_ipm_iter: int = 200

    def __post_init__(self):
        if not (self.tau > 0 and self.theta > 0 and self.delta > 1 and self.p_init > 0):
            raise ValueError("need tau > 0, theta > 0, delta > 1 and p_init > 0")
        if self.n_iter < 1:
            raise ValueError("n_iter must be at least 1")


@dataclass(frozen=True)
class RateInput:
    """Inputs of one frame's allocation problem.

    ``rho`` and ``handover_s`` are (S, C), rows following ``sat_ids``.
    Cells with no active users take no part in the problem.
    """

    rho: np.ndarray
    users: np.ndarray
    handover_s: np.ndarray
    n_comm: int
    n_beams: int
    ofdma_s: float
    frame_s: float
    sat_ids: np.ndarray = None

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim != 2:
            raise ValueError("rho must be a (satellites, cells) matrix")
        if np.any(rho < 0) or not np.all(np.isfinite(rho)):
            raise ValueError("rates must be finite and non-negative")
        users = np.asarray(self.users, dtype=float)
        if users.shape != (rho.shape[1],) or np.any(users < 0):
            raise ValueError("users must hold one non-negative count per cell")
        H = np.broadcast_to(np.asarray(self.handover_s, dtype=float), rho.shape).copy()
        if np.any(H < 0):
            raise ValueError("handover times must be non-negative")
        if self.n_comm < 1 or self.n_beams < 1:
            raise ValueError("need at least one communication frame and one beam")
        ids = np.arange(rho.shape[0]) if self.sat_ids is None else np.asarray(self.sat_ids, dtype=int)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "handover_s", H)
        object.__setattr__(self, "sat_ids", ids)

    @property
    def shape(self):
        return self.rho.shape

    @property
    def budget(self) -> int:
        return self.n_comm * self.n_beams

    @property
    def active_pairs(self) -> np.ndarray:
        return (self.rho > 0) & (self.users > 0)[None, :]

    def rate_coeff(self) -> np.ndarray:
        """``rho / (T_F M_c)``, zero for empty cells."""
        m = np.where(self.users > 0, self.users, 1.0)
        return np.where(self.users > 0, self.rho / (self.frame_s * m), 0.0)


@dataclass
class AllocationResult:
    X: np.ndarray
    X_relaxed: np.ndarray
    objective: float
    relaxed_objective: float
    iterations: int
    converged: bool
    framework: str
    info: dict


def per_user_throughput(x, rho, handover_s, users, ofdma_s, frame_s, alpha=None):
    """Per-user throughput ``(T x - H alpha) rho / (T_F M)`` in bit/s.

    ``alpha`` defaults to ``x > 0``. Cells without users yield 0.
    """
    x = np.asarray(x, dtype=float)
    a = (x > 0) if alpha is None else np.asarray(alpha)
    m = np.asarray(users, dtype=float)
    safe = np.where(m > 0, m, 1.0)
    r = (ofdma_s * x - np.asarray(handover_s) * a) * np.asarray(rho) / (frame_s * safe)
    return np.where(m > 0, r, 0.0)


def _rates(X, inp: RateInput):
    return per_user_throughput(X, inp.rho, inp.handover_s, inp.users, inp.ofdma_s, inp.frame_s)


def objective_p1(X, inp: RateInput) -> float:
    """Proportional-fair utility ``sum_c M_c log(1 + sum_s R_sc)``; ``-inf`` off the log domain."""
    r = _rates(X, inp).sum(axis=0)
    m = inp.users
    if np.any((m > 0) & (r <= -1)):
        return -np.inf
    return float(np.sum(np.where(m > 0, m * np.log1p(np.where(m > 0, r, 0.0)), 0.0)))


def round_half_away(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return (np.sign(x) * np.floor(np.abs(x) + 0.5)).astype(np.int64)


def adjust_allocation(X, X_relaxed, inp: RateInput) -> np.ndarray:
    """Map a rounded allocation into the feasible set.

    Cells matched to several satellites keep only the one with the highest
    throughput (lowest row on ties). Satellites above their budget then give
    up one frame at a time from the cell with the largest rounding surplus.
    """
    X = np.array(X, dtype=np.int64)
    Xr = np.asarray(X_relaxed, dtype=float)
    X = np.clip(X, 0, inp.n_comm)
    multi = np.flatnonzero((X > 0).sum(axis=0) > 1)
    if len(multi):
        R = _rates(X, inp)
        for c in multi:
            served = X[:, c] > 0
            best = np.argmax(np.where(served, R[:, c], -np.inf))
            keep = X[best, c]
            X[:, c] = 0
            X[best, c] = keep
    for s in np.flatnonzero(X.sum(axis=1) > inp.budget):
        row = X[s]
        surplus = row - Xr[s]
        excess = int(row.sum() - inp.budget)
        for _ in range(excess):
            c = int(np.argmax(np.where(row > 0, surplus, -np.inf)))
            row[c] -= 1
            surplus[c] -= 1.0
    return X


def drop_nonpositive(X, inp: RateInput) -> np.ndarray:
    """Release pairs whose allocation does not outlast the handover interruption."""
    X = np.array(X, dtype=np.int64)
    bad = (X > 0) & (inp.ofdma_s * X <= inp.handover_s + 1e-12) & (inp.handover_s > 0)
    X[bad] = 0
    return X


def check_feasible(X, inp: RateInput) -> list:
    """List of violated constraints (empty when ``X`` is feasible)."""
    X = np.asarray(X)
    problems = []
    if not np.issubdtype(X.dtype, np.integer) and np.any(X != np.round(X)):
        problems.append("non-integer entries")
    if np.any(X < 0) or np.any(X > inp.n_comm):
        problems.append("entries outside [0, N_C]")
    if np.any(X.sum(axis=1) > inp.budget):
        problems.append("satellite budget exceeded")
    if np.any((X > 0).sum(axis=0) > 1):
        problems.append("cell served by several satellites")
    return problems
