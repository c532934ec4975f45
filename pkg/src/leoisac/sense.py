"""Pilot-based SNR sensing, rain-attenuation estimators and sensing-frame timing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PilotConfig",
    "SensingReport",
    "SensingTiming",
    "bpsk_pilots",
    "simulate_pilot_rx",
    "sample_pilot_statistics",
    "mle_snr",
    "mle_snr_from_stats",
    "crb",
    "attenuation_naive",
    "attenuation_corrected",
    "sensing_timing",
    "run_sensing_phase",
    "SENSING_MODES",
]

SNR_CAP = 1e9
_DEN_REL_EPS = 1e-12

SENSING_MODES = ("sensed", "perfect", "none")


@dataclass(frozen=True)
class PilotConfig:
    pilot_len: int = 4096
    feedback_len: int = 64
    modulation: str = "bpsk"

    def __post_init__(self):
        if self.pilot_len < 4:
            raise ValueError("pilot length must be at least 4 symbols")
        if self.feedback_len < 1:
            raise ValueError("feedback length must be positive")
        if self.modulation != "bpsk":
            raise ValueError(f"unsupported pilot modulation {self.modulation!r}")


def bpsk_pilots(length: int, rng=None) -> np.ndarray:
    """Unit-modulus +/-1 pilot sequence (all ones when ``rng`` is None)."""
    if rng is None:
        return np.ones(length, dtype=complex)
    return np.where(np.random.default_rng(rng).random(length) < 0.5, -1.0, 1.0).astype(complex)


def simulate_pilot_rx(gamma, pilots, rng) -> np.ndarray:
    """Received pilot symbols ``m_i sqrt(gamma) + z_i`` with unit-variance complex noise.

    ``gamma`` may be a scalar or a vector; the output has shape
    ``gamma.shape + (L_p,)``.
    """
    rng = np.random.default_rng(rng)
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0):
        raise ValueError("SNR must be non-negative")
    m = np.asarray(pilots)
    shape = g.shape + m.shape
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    return m * np.sqrt(g)[..., None] + z


def sample_pilot_statistics(gamma, pilot_len: int, rng):
    """Draw ``(sum Re{y* m}, sum |y|^2)`` directly, without materialising symbols.

    With unit-modulus pilots the pair is distributed exactly as
    ``S = L sqrt(gamma) + N(0, L/2)`` and
    ``Q = S^2 / L + chi2(2L - 1) / 2`` with the two parts independent.
    """
    rng = np.random.default_rng(rng)
    g = np.asarray(gamma, dtype=float)
    L = int(pilot_len)
    s = L * np.sqrt(g) + rng.normal(0.0, math.sqrt(L / 2.0), size=g.shape)
    q = s**2 / L + 0.5 * rng.chisquare(2 * L - 1, size=g.shape)
    return s, q


def mle_snr_from_stats(sum_re, sum_sq, pilot_len):
    """Closed-form SNR estimate from the pilot statistics.

    Returns ``(gamma_hat, valid)``; the estimate is capped at ``SNR_CAP`` and
    flagged invalid when the noise-power denominator collapses.
    """
    L = float(pilot_len)
    s = np.asarray(sum_re, dtype=float)
    q = np.asarray(sum_sq, dtype=float)
    num = (L - 1.5) * (s / L) ** 2
    den = q - s**2 / L
    valid = den > _DEN_REL_EPS * np.maximum(q, np.finfo(float).tiny)
    est = np.where(valid, num / np.where(valid, den, 1.0), SNR_CAP)
    return np.minimum(est, SNR_CAP), valid


def mle_snr(y, pilots):
    """SNR estimate from received symbols ``y`` and the known pilots (last axis is time)."""
    y = np.asarray(y)
    m = np.asarray(pilots)
    if y.shape[-1] != m.shape[-1]:
        raise ValueError("received block and pilot sequence differ in length")
    re = np.real(np.conj(y) * m).sum(axis=-1)
    sq = (np.abs(y) ** 2).sum(axis=-1)
    est, valid = mle_snr_from_stats(re, sq, y.shape[-1])
    if np.ndim(est) == 0:
        return float(est), bool(valid)
    return est, valid


def crb(gamma, pilot_len):
    """Variance bound ``3 gamma / L_p`` on the SNR estimate."""
    if np.any(np.asarray(pilot_len) <= 0):
        raise ValueError("pilot length must be positive")
    return 3.0 * np.asarray(gamma, dtype=float) / pilot_len


def attenuation_naive(gamma_hat, clear_sky_snr):
    g = np.asarray(gamma_hat, dtype=float)
    if np.any(g <= 0):
        raise ValueError("SNR estimate must be positive to invert")
    return np.asarray(clear_sky_snr, dtype=float) / g


def attenuation_corrected(gamma_hat, clear_sky_snr, pilot_len):
    """Bias-corrected attenuation ``gamma0 / (gamma_hat + 3 / L_p)``."""
    g = np.asarray(gamma_hat, dtype=float)
    if np.any(g < 0):
        raise ValueError("SNR estimate must be non-negative")
    return np.asarray(clear_sky_snr, dtype=float) / (g + 3.0 / pilot_len)


@dataclass(frozen=True)
class SensingTiming:
    pilot_s: float
    feedback_s: float
    total_s: float
    n_frames: int


def _quantize(x, T):
    # ceil to whole OFDMA frames, tolerant to float noise at exact multiples
    return T * math.ceil(x / T - 1e-9)


def sensing_timing(footprint_cells, n_beams, pilot_len, feedback_len, bandwidth_hz, prop_time_s, ofdma_s):
    """Duration of the pilot and feedback phases of the sensing sub-frame."""
    if min(footprint_cells, n_beams, pilot_len, feedback_len, bandwidth_hz, ofdma_s) <= 0 or prop_time_s < 0:
        raise ValueError("sensing timing inputs must be positive")
    rounds = math.ceil(footprint_cells / n_beams)
    t_p = _quantize(prop_time_s + rounds * pilot_len / bandwidth_hz, ofdma_s)
    t_fb = _quantize(rounds * feedback_len / bandwidth_hz + prop_time_s, ofdma_s)
    total = t_p + t_fb
    return SensingTiming(t_p, t_fb, total, int(round(total / ofdma_s)))


@dataclass
class SensingReport:
    """Per-pair sensing outcome for one frame, as (S_k, C) arrays.

    ``sensed`` marks the pairs for which pilots were actually processed
    (sensing-capable satellite, cell within range).
    """

    frame: int
    mode: str
    snr_hat: np.ndarray
    atten_hat: np.ndarray
    valid: np.ndarray
    sensed: np.ndarray

    def believed_snr(self) -> np.ndarray:
        return self.snr_hat


def run_sensing_phase(links, mode: str, pilot: PilotConfig, rng) -> SensingReport:
    """Produce the allocator's view of every link's SNR.

    ``sensed`` runs pilots over each (sensing-capable satellite, in-range
    cell) pair; other satellites are assumed rain-free. ``perfect`` hands
    over the true SNR and ``none`` assumes clear sky everywhere.
    """
    if mode not in SENSING_MODES:
        raise ValueError(f"unknown sensing mode {mode!r}")
    shape = links.snr.shape
    sensed = links.in_range & links.sensing_capable[:, None]
    valid = np.ones(shape, dtype=bool)
    if mode == "perfect":
        gamma_hat = links.snr.copy()
        a_hat = links.attenuation.copy()
    elif mode == "none":
        gamma_hat = links.clear_sky_snr.copy()
        a_hat = np.ones(shape)
    else:
        gamma_hat = links.clear_sky_snr.copy()
        a_hat = np.ones(shape)
        idx = np.nonzero(sensed)
        if len(idx[0]):
            s, q = sample_pilot_statistics(links.snr[idx], pilot.pilot_len, rng)
            est, ok = mle_snr_from_stats(s, q, pilot.pilot_len)
            gamma0 = links.clear_sky_snr[idx]
            gamma_hat[idx] = np.where(ok, est, gamma0)
            a_hat[idx] = np.where(ok, attenuation_corrected(np.maximum(est, 0.0), gamma0, pilot.pilot_len), 1.0)
            valid[idx] = ok
    return SensingReport(links.frame, mode, gamma_hat, a_hat, valid, sensed)
