"""Downlink budget per satellite-cell pair: path loss, SNR and gated rate.

Everything is carried in dB until the final conversion to linear SNR.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import SPEED_OF_LIGHT
from .orbit import ConstellationState, cell_distance, elevation_deg, slant_range_max
from .rain import rain_attenuation_db, wet_path_km

__all__ = [
    "NoiseModel",
    "LinkTable",
    "path_loss_db",
    "path_loss",
    "snr_db",
    "snr",
    "achievable_rate",
    "build_link_table",
]


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class NoiseModel:
    n0_dbm_hz: float = -176.31
    pointing_loss_db: float = 0.3
    user_gain_dbi: float = 0.0

    def noise_power_dbm(self, bandwidth_hz):
        return self.n0_dbm_hz + 10.0 * np.log10(bandwidth_hz)


def path_loss_db(distance_m, freq_hz):
    """Free-space path loss ``(4 pi d f / c)^2`` in dB."""
    d = np.asarray(distance_m, dtype=float)
    if np.any(d <= 0) or np.any(np.asarray(freq_hz) <= 0):
        raise ValueError("distance and frequency must be positive")
    return 20.0 * np.log10(4.0 * np.pi * d * freq_hz / SPEED_OF_LIGHT)


def path_loss(distance_m, freq_hz):
    return db2lin(path_loss_db(distance_m, freq_hz))


def snr_db(shell, distance_m, atten_db=0.0, noise: NoiseModel = NoiseModel()):
    tx_dbm = 10.0 * np.log10(shell.tx_power_w * 1e3)
    return (
        tx_dbm
        + shell.antenna_gain_dbi
        + noise.user_gain_dbi
        - path_loss_db(distance_m, shell.carrier_hz)
        - np.asarray(atten_db, dtype=float)
        - noise.pointing_loss_db
        - noise.noise_power_dbm(shell.bandwidth_hz)
    )


def snr(shell, distance_m, attenuation=1.0, noise: NoiseModel = NoiseModel()):
    """Linear SNR for a link of length ``distance_m`` with linear rain attenuation ``attenuation``."""
    return db2lin(snr_db(shell, distance_m, lin2db(attenuation), noise))


def achievable_rate(gamma, bandwidth_hz, d_max=None, max_range=None):
    """Shannon rate in bit/s, forced to zero for pairs that leave range within the frame."""
    rate = np.asarray(bandwidth_hz, dtype=float) * np.log2(1.0 + np.asarray(gamma, dtype=float))
    if d_max is not None:
        rate = np.where(np.asarray(d_max) <= max_range, rate, 0.0)
    return rate


@dataclass(frozen=True)
class LinkTable:
    """True link state for the visible satellites of one frame.

    Arrays are (S_k, C) with rows following ``sat_ids`` (sorted global ids)
    and columns following the grid's cell order.
    """

    frame: int
    sat_ids: np.ndarray
    shell_index: np.ndarray
    distance_m: np.ndarray
    d_max_m: np.ndarray
    elevation_deg: np.ndarray
    in_range: np.ndarray
    path_loss_db: np.ndarray
    atten_db: np.ndarray
    clear_sky_snr: np.ndarray
    snr: np.ndarray
    rate: np.ndarray
    bandwidth_hz: np.ndarray  # (S_k,)
    sensing_capable: np.ndarray  # (S_k,)

    @property
    def attenuation(self):
        return db2lin(self.atten_db)

    @property
    def shape(self):
        return self.snr.shape

    def rates_from_snr(self, gamma) -> np.ndarray:
        return np.where(self.in_range, self.bandwidth_hz[:, None] * np.log2(1.0 + np.maximum(gamma, 0.0)), 0.0)

    def footprint_cells(self) -> np.ndarray:
        return self.in_range.sum(axis=1)


def build_link_table(
    state_k: ConstellationState,
    state_next: ConstellationState,
    sat_ids,
    grid,
    rain_rate_mm_h: Optional[np.ndarray],
    min_elevation_deg: float,
    noise: NoiseModel = NoiseModel(),
    rain_height_km: float = 6.0,
) -> LinkTable:
    sat_ids = np.asarray(sat_ids, dtype=int)
    shells = state_k.shells
    sidx = state_k.shell_index[sat_ids]
    pts = grid.sample_points_ecef()
    d_k = cell_distance(state_k.positions[sat_ids], pts)
    d_max = np.maximum(d_k, cell_distance(state_next.positions[sat_ids], pts))
    el = elevation_deg(state_k.positions[sat_ids], grid.centroids_ecef())
    ranges = np.array([slant_range_max(shells[i].altitude_m, min_elevation_deg) for i in sidx])
    in_range = d_max <= ranges[:, None] if len(sat_ids) else np.zeros((0, len(grid)), dtype=bool)

    S, C = d_k.shape
    pl = np.empty((S, C))
    att = np.zeros((S, C))
    gamma0 = np.empty((S, C))
    bw = np.empty(S)
    sensing = np.empty(S, dtype=bool)
    rain = np.zeros(C) if rain_rate_mm_h is None else np.asarray(rain_rate_mm_h, dtype=float)
    for si in np.unique(sidx):
        rows = sidx == si
        sh = shells[si]
        pl[rows] = path_loss_db(d_k[rows], sh.carrier_hz)
        gamma0[rows] = db2lin(snr_db(sh, d_k[rows], 0.0, noise))
        bw[rows] = sh.bandwidth_hz
        sensing[rows] = sh.sensing_capable
        if rain.any():
            wet = rain > 0
            mask = rows[:, None] & wet[None, :] & in_range
            if mask.any():
                if sh.rain_k is None or sh.rain_alpha is None:
                    raise ValueError(f"shell {sh.id} has no power-law rain coefficients")
                r, c = np.nonzero(mask)
                path = wet_path_km(np.maximum(el[r, c], 1e-3), rain_height_km, d_k[r, c] / 1e3)
                att[r, c] = rain_attenuation_db(sh.rain_k, sh.rain_alpha, rain[c], path)
    gamma = gamma0 / db2lin(att)
    rate = np.where(in_range, bw[:, None] * np.log2(1.0 + gamma), 0.0)
    return LinkTable(
        frame=state_k.frame,
        sat_ids=sat_ids,
        shell_index=sidx,
        distance_m=d_k,
        d_max_m=d_max,
        elevation_deg=el,
        in_range=in_range,
        path_loss_db=pl,
        atten_db=att,
        clear_sky_snr=gamma0,
        snr=gamma,
        rate=rate,
        bandwidth_hz=bw,
        sensing_capable=sensing,
    )
