"""Key performance indicators: fairness, throughput, estimation error, handovers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "KpiRecord",
    "jain_index",
    "mean_throughput",
    "per_user_mean",
    "nmse",
    "serving_satellite",
    "handover_count",
    "handovers_per_second",
]


@dataclass(frozen=True)
class KpiRecord:
    """KPIs of one framework in one frame.

    ``throughput_bps`` is the plain sum over cells of the per-user rates;
    ``per_user_bps`` weights each cell by its active users.
    """

    frame: int
    framework: str
    csi: str
    pilot_len: int
    throughput_bps: float
    per_user_bps: float
    jain: float
    handovers: int
    nmse_gamma: Optional[float]
    nmse_att: Optional[float]
    solver_s: float
    ts_s: float


def jain_index(rates, users) -> float:
    """User-weighted Jain index over cells; 0 when every rate is zero."""
    r = np.asarray(rates, dtype=float)
    m = np.asarray(users, dtype=float)
    keep = m > 0
    if not keep.any():
        raise ValueError("Jain index needs at least one cell with users")
    r, m = r[keep], m[keep]
    num = (m * r).sum() ** 2
    den = m.sum() * (m * r * r).sum()
    if den == 0:
        return 0.0
    return float(min(1.0, num / den))


def mean_throughput(per_frame) -> float:
    """Average over frames of the per-frame sum of per-user rates."""
    v = np.asarray(per_frame, dtype=float)
    if v.size == 0:
        raise ValueError("mean throughput needs at least one frame")
    return float(v.mean())


def per_user_mean(rates, users) -> float:
    """User-weighted mean per-user rate ``sum M R / sum M`` of one frame."""
    r = np.asarray(rates, dtype=float)
    m = np.asarray(users, dtype=float)
    tot = m.sum()
    return float((m * r).sum() / tot) if tot > 0 else 0.0


def nmse(truth, estimate) -> float:
    """``sum (truth - est)^2 / sum truth^2``."""
    t = np.asarray(truth, dtype=float).ravel()
    e = np.asarray(estimate, dtype=float).ravel()
    if t.shape != e.shape:
        raise ValueError("truth and estimate must be aligned")
    den = float(np.sum(t * t))
    if den == 0:
        raise ValueError("NMSE undefined for an all-zero truth")
    return float(np.sum((t - e) ** 2) / den)


def serving_satellite(X, sat_ids) -> np.ndarray:
    """Global id of each cell's serving satellite, -1 when unserved."""
    X = np.asarray(X)
    ids = np.asarray(sat_ids)
    if X.shape[0] == 0:
        return np.full(X.shape[1], -1)
    served = X > 0
    return np.where(served.any(axis=0), ids[np.argmax(served, axis=0)], -1)


def handover_count(serving_prev, serving_now) -> int:
    """Cells whose serving satellite changed, including gaining or losing service."""
    a = np.asarray(serving_prev)
    b = np.asarray(serving_now)
    return int(np.count_nonzero(a != b))


def handovers_per_second(serving_prev, serving_now, frame_s: float) -> float:
    return handover_count(serving_prev, serving_now) / frame_s
