"""Circular-orbit propagation of a multi-shell constellation and link geometry.

Satellites sit on Walker-style circular orbits over a spherical Earth. All
positions are returned in the Earth-fixed frame (the frame in which the
ground cells live), so Earth rotation is folded in as a longitude drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .constants import CONSTANTS, R_E, SPEED_OF_LIGHT

__all__ = [
    "ShellConfig",
    "SatelliteState",
    "ConstellationState",
    "orbital_velocity",
    "orbital_radius",
    "propagate",
    "slant_range_max",
    "max_propagation_time",
    "cell_distance",
    "elevation_deg",
    "visible_satellites",
]

SENSING_MIN_CARRIER_HZ = 12e9


@dataclass(frozen=True)
class ShellConfig:
    """One orbital shell of the heterogeneous constellation.

    ``rain_k`` and ``rain_alpha`` are the power-law rain coefficients for the
    shell's carrier; they may be left unset for shells that are never
    exposed to rain attenuation computations.
    """

    id: str
    altitude_m: float
    inclination_deg: float
    plane_count: int
    sats_per_plane: int
    carrier_hz: float
    bandwidth_hz: float
    antenna_gain_dbi: float
    tx_power_w: float
    rain_k: Optional[float] = None
    rain_alpha: Optional[float] = None
    raan_offset_deg: float = 0.0
    walker_phasing: int = 0

    def __post_init__(self):
        if not 400e3 <= self.altitude_m <= 2000e3:
            raise ValueError(f"shell {self.id}: altitude {self.altitude_m} m outside [400 km, 2000 km]")
        if self.plane_count < 1 or self.sats_per_plane < 1:
            raise ValueError(f"shell {self.id}: plane_count and sats_per_plane must be >= 1")
        for name in ("carrier_hz", "bandwidth_hz", "tx_power_w"):
            if getattr(self, name) <= 0:
                raise ValueError(f"shell {self.id}: {name} must be positive")

    @property
    def sensing_capable(self) -> bool:
        # K-band and above are the bands sensitive to water
        return self.carrier_hz >= SENSING_MIN_CARRIER_HZ

    @property
    def total(self) -> int:
        return self.plane_count * self.sats_per_plane


@dataclass(frozen=True)
class SatelliteState:
    sat_id: int
    shell_id: str
    position: np.ndarray
    frame: int


@dataclass(frozen=True)
class ConstellationState:
    """Vectorised snapshot of every satellite at one frame.

    ``shell_index[i]`` indexes into ``shells``; satellite ids are the row
    numbers, assigned shell by shell in configuration order.
    """

    shells: tuple
    positions: np.ndarray  # (N, 3) Earth-fixed, metres
    shell_index: np.ndarray  # (N,)
    frame: int
    time_s: float = 0.0
    plane_anomaly: np.ndarray = field(default=None, repr=False)  # (N,) rad, in-plane argument of latitude

    def __len__(self):
        return len(self.positions)

    @property
    def sat_ids(self) -> np.ndarray:
        return np.arange(len(self.positions))

    def altitudes(self) -> np.ndarray:
        return np.array([self.shells[i].altitude_m for i in self.shell_index], dtype=float)

    def satellites(self) -> list:
        return [
            SatelliteState(int(i), self.shells[s].id, self.positions[i].copy(), self.frame)
            for i, s in enumerate(self.shell_index)
        ]


def orbital_radius(altitude_m):
    return R_E + np.asarray(altitude_m, dtype=float)


def orbital_velocity(shell_or_altitude) -> float:
    """Circular orbital speed in m/s for a shell (or a bare altitude in metres)."""
    h = getattr(shell_or_altitude, "altitude_m", shell_or_altitude)
    return np.sqrt(CONSTANTS.mu / orbital_radius(h))


def _initial_angles(shell: ShellConfig):
    p = np.repeat(np.arange(shell.plane_count), shell.sats_per_plane)
    j = np.tile(np.arange(shell.sats_per_plane), shell.plane_count)
    raan = 2 * np.pi * p / shell.plane_count + np.deg2rad(shell.raan_offset_deg)
    u0 = 2 * np.pi * j / shell.sats_per_plane
    if shell.walker_phasing:
        u0 = u0 + 2 * np.pi * shell.walker_phasing * p / shell.total
    return raan, u0


def propagate(shells: Sequence[ShellConfig], k: int, frame_s: float) -> ConstellationState:
    """Positions of all satellites at the start of frame ``k``.

    Each satellite advances ``v_s * k * frame_s / (R_E + h_s)`` radians along
    its orbit, and the whole picture is rotated by ``-omega_E * t`` to stay
    in the Earth-fixed frame.
    """
    if k < 0:
        raise ValueError("frame index must be non-negative")
    shells = tuple(shells)
    t = k * frame_s
    blocks, idx, anomalies = [], [], []
    for si, shell in enumerate(shells):
        r = float(orbital_radius(shell.altitude_m))
        n = orbital_velocity(shell) / r
        raan, u0 = _initial_angles(shell)
        u = u0 + n * t
        inc = np.deg2rad(shell.inclination_deg)
        cu, su = np.cos(u), np.sin(u)
        co, so = np.cos(raan), np.sin(raan)
        x = r * (co * cu - so * su * np.cos(inc))
        y = r * (so * cu + co * su * np.cos(inc))
        z = r * su * np.sin(inc)
        blocks.append(np.column_stack([x, y, z]))
        idx.append(np.full(shell.total, si))
        anomalies.append(np.mod(u, 2 * np.pi))
    if not blocks:
        return ConstellationState(shells, np.zeros((0, 3)), np.zeros(0, dtype=int), k, t, np.zeros(0))
    pos = np.vstack(blocks)
    theta = -CONSTANTS.omega_E * t
    c, s = np.cos(theta), np.sin(theta)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    pos = pos @ rot.T
    return ConstellationState(shells, pos, np.concatenate(idx), k, t, np.concatenate(anomalies))


def slant_range_max(altitude_m, min_elevation_deg):
    """Longest ground-to-satellite range at the minimum elevation angle (metres)."""
    eta = np.deg2rad(min_elevation_deg)
    if np.any(eta <= 0) or np.any(eta > np.pi / 2 + 1e-12):
        raise ValueError("elevation must lie in (0, 90] degrees")
    h = np.asarray(altitude_m, dtype=float)
    s = np.sin(eta)
    return np.sqrt(R_E**2 * s**2 + 2 * R_E * h + h**2) - R_E * s


def max_propagation_time(shells: Sequence[ShellConfig], min_elevation_deg: float) -> float:
    if not shells:
        raise ValueError("need at least one shell")
    return max(float(slant_range_max(sh.altitude_m, min_elevation_deg)) for sh in shells) / SPEED_OF_LIGHT


def cell_distance(sat_positions, cell_points) -> np.ndarray:
    """Worst-case distance from each satellite to each cell.

    Parameters
    ----------
    sat_positions : (S, 3) array
    cell_points : (C, P, 3) array
        Sample points per cell (corners plus centroid); a degenerate cell may
        carry the same point P times.

    Returns
    -------
    (S, C) array of the maximum Euclidean distance over each cell's points.
    """
    sat = np.atleast_2d(np.asarray(sat_positions, dtype=float))
    pts = np.asarray(cell_points, dtype=float)
    if pts.ndim == 2:
        pts = pts[:, None, :]
    out = np.empty((sat.shape[0], pts.shape[0]))
    # chunk over satellites to bound memory at continental scale
    step = max(1, int(4e6 // max(1, pts.shape[0] * pts.shape[1])))
    for a in range(0, sat.shape[0], step):
        diff = sat[a : a + step, None, None, :] - pts[None, :, :, :]
        out[a : a + step] = np.sqrt(np.einsum("scpk,scpk->scp", diff, diff)).max(axis=2)
    return out


def elevation_deg(sat_positions, ground_points) -> np.ndarray:
    """Elevation angle (degrees) of each satellite seen from each ground point, shape (S, C)."""
    sat = np.atleast_2d(np.asarray(sat_positions, dtype=float))
    g = np.atleast_2d(np.asarray(ground_points, dtype=float))
    up = g / np.linalg.norm(g, axis=1, keepdims=True)
    los = sat[:, None, :] - g[None, :, :]
    rng = np.linalg.norm(los, axis=2)
    sin_el = np.einsum("sck,ck->sc", los, up) / np.where(rng > 0, rng, 1.0)
    return np.rad2deg(np.arcsin(np.clip(sin_el, -1.0, 1.0)))


def visible_satellites(
    state_k: ConstellationState,
    state_next: ConstellationState,
    cell_points,
    min_elevation_deg: float,
) -> np.ndarray:
    """Ids of satellites that keep at least one cell within range over the whole frame."""
    if len(state_k) == 0:
        return np.zeros(0, dtype=int)
    ranges = slant_range_max(state_k.altitudes(), min_elevation_deg)
    d = np.maximum(cell_distance(state_k.positions, cell_points), cell_distance(state_next.positions, cell_points))
    ok = (d <= ranges[:, None]).any(axis=1)
    return np.flatnonzero(ok)
