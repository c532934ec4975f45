"""System-frame bookkeeping: sensing/communication split, handover and RA deadline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FrameBudget",
    "ConfigurationError",
    "make_budget",
    "min_handover_time",
    "handover_penalty",
    "ra_deadline_check",
]


class ConfigurationError(ValueError):
    pass


def _frames(duration_s, ofdma_s):
    q = duration_s / ofdma_s
    n = int(round(q))
    if abs(q - n) > 1e-6:
        raise ConfigurationError(f"{duration_s} s is not a whole number of {ofdma_s} s OFDMA frames")
    return n


@dataclass(frozen=True)
class FrameBudget:
    """Partition of one system frame into OFDMA frames.

    Times in seconds. ``n_rtt`` is the number of round trips a handover
    needs; ``t_ra`` holds the three resource-allocation delay components
    (upload, solve, distribution).
    """

    ofdma_s: float
    frame_s: float
    sensing_s: float
    handover_s: float
    n_rtt: int = 2
    t_ra: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.ofdma_s <= 0 or self.frame_s <= 0:
            raise ConfigurationError("frame durations must be positive")
        if self.sensing_s < 0 or self.handover_s < 0:
            raise ConfigurationError("sensing and handover times must be non-negative")
        n_t, n_s = _frames(self.frame_s, self.ofdma_s), _frames(self.sensing_s, self.ofdma_s)
        _frames(self.handover_s, self.ofdma_s)
        if n_t - n_s < 1:
            raise ConfigurationError(f"sensing takes {n_s} of {n_t} OFDMA frames, none left to communicate")

    @property
    def n_total(self) -> int:
        return _frames(self.frame_s, self.ofdma_s)

    @property
    def n_sensing(self) -> int:
        return _frames(self.sensing_s, self.ofdma_s)

    @property
    def n_comm(self) -> int:
        return self.n_total - self.n_sensing

    @property
    def n_handover(self) -> int:
        return _frames(self.handover_s, self.ofdma_s)

    @property
    def t_ra_total(self) -> float:
        return float(sum(self.t_ra))

    @property
    def ra_budget_s(self) -> float:
        return self.frame_s - self.sensing_s - self.handover_s


def make_budget(ofdma_s, frame_s, sensing_s, handover_s, n_rtt=2, t_ra=(0.0, 0.0, 0.0)) -> FrameBudget:
    return FrameBudget(ofdma_s, frame_s, sensing_s, handover_s, n_rtt, tuple(t_ra))


def min_handover_time(prop_time_s: float, ofdma_s: float, n_rtt: int) -> float:
    """Smallest whole number of OFDMA frames covering ``n_rtt`` round trips."""
    if prop_time_s < 0 or ofdma_s <= 0 or n_rtt < 0:
        raise ValueError("invalid handover timing inputs")
    return ofdma_s * math.ceil(n_rtt * 2 * prop_time_s / ofdma_s - 1e-9)


def handover_penalty(alpha_prev, handover_s):
    """Handover interruption per pair: ``T_HO`` unless the pair was already associated."""
    a = np.asarray(alpha_prev)
    if np.any((a != 0) & (a != 1)):
        raise ValueError("previous association must be binary")
    return handover_s * (1 - a.astype(float))


def ra_deadline_check(t_ra_s: float, budget: FrameBudget) -> bool:
    """Whether a resource allocation taking ``t_ra_s`` fits the remainder of the frame."""
    return t_ra_s <= budget.ra_budget_s + 1e-12
