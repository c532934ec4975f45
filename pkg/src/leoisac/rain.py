"""Clustered rain field and power-law rain attenuation.

Rain cells are Poisson-distributed discs with exponential radius and rain
rate marks. Each disc switches on and off as a two-state Markov chain with
one transition opportunity per system frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.spatial.distance import cdist

__all__ = [
    "RainParams",
    "RainCell",
    "RainField",
    "dtmc_probs",
    "init_field",
    "step",
    "rain_rate",
    "wet_path_km",
    "rain_attenuation_db",
    "invert_power_law",
    "itu_p838_coefficients",
]

HOUR = 3600.0


@dataclass(frozen=True)
class RainParams:
    intensity_per_km2: float = 8.4e-4
    mean_radius_km: float = 22.6
    mean_rate_mm_h: float = 8.77
    mean_on_h: float = 1.886
    mean_off_h: float = 5.376
    rain_height_km: float = 6.0
    # treat the exponential size mark as a diameter instead of a radius
    mark_is_diameter: bool = False
    guard_factor: float = 3.0

    def __post_init__(self):
        for name in ("intensity_per_km2", "mean_radius_km", "mean_rate_mm_h", "mean_on_h", "mean_off_h",
                     "rain_height_km"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class RainCell:
    center_km: tuple
    radius_km: float
    rate_mm_h: float
    active: bool


@dataclass(frozen=True)
class RainField:
    centers_km: np.ndarray  # (N, 2)
    radius_km: np.ndarray  # (N,) coverage radius
    rate_mm_h: np.ndarray  # (N,)
    active: np.ndarray  # (N,) bool
    coverage: np.ndarray  # (N, C) bool, rain cell r covers user cell c
    frame: int = 0

    def __len__(self):
        return len(self.radius_km)

    def cells(self) -> list:
        return [
            RainCell(tuple(self.centers_km[i]), float(self.radius_km[i]), float(self.rate_mm_h[i]),
                     bool(self.active[i]))
            for i in range(len(self))
        ]


def dtmc_probs(params: RainParams, frame_s: float):
    """Per-frame switching probabilities and the stationary on-probability.

    Returns ``(p_on, p_off, pi_on)``.
    """
    if frame_s <= 0:
        raise ValueError("frame length must be positive")
    p_off = -math.expm1(-frame_s / (params.mean_on_h * HOUR))
    p_on = -math.expm1(-frame_s / (params.mean_off_h * HOUR))
    return p_on, p_off, p_on / (p_on + p_off)


def _coverage(centers, radius, user_xy):
    if len(centers) == 0:
        return np.zeros((0, len(user_xy)), dtype=bool)
    return cdist(centers, user_xy) <= radius[:, None]


def init_field(grid, params: RainParams, frame_s: float, rng) -> RainField:
    """Draw a stationary rain field over ``grid``'s region plus a guard band."""
    rng = np.random.default_rng(rng)
    xy = grid.planar_km()
    guard = params.guard_factor * params.mean_radius_km
    half = np.abs(xy).max(axis=0) if len(xy) else np.zeros(2)
    # extend to the outer cell edges, then add the guard band
    cell_half = 0.5 * grid.region.cell_step * math.pi / 180 * 6371.0
    lo = -half - cell_half - guard
    hi = half + cell_half + guard
    area = float(np.prod(hi - lo))
    n = rng.poisson(params.intensity_per_km2 * area)
    centers = rng.uniform(lo, hi, size=(n, 2))
    mark = rng.exponential(params.mean_radius_km, size=n)
    radius = mark / 2 if params.mark_is_diameter else mark
    rate = rng.exponential(params.mean_rate_mm_h, size=n)
    _, _, pi_on = dtmc_probs(params, frame_s)
    active = rng.random(n) < pi_on
    return RainField(centers, radius, rate, active, _coverage(centers, radius, xy), 0)


def step(field: RainField, params: RainParams, frame_s: float, rng) -> RainField:
    """Advance every rain cell's on/off chain by one frame."""
    rng = np.random.default_rng(rng)
    p_on, p_off, _ = dtmc_probs(params, frame_s)
    u = rng.random(len(field))
    active = np.where(field.active, u >= p_off, u < p_on)
    return replace(field, active=active, frame=field.frame + 1)


def rain_rate(field: RainField) -> np.ndarray:
    """Rain rate (mm/h) over each user cell: sum of the active covering rain cells."""
    if len(field) == 0:
        return np.zeros(field.coverage.shape[1])
    return (field.active * field.rate_mm_h) @ field.coverage


def wet_path_km(elevation_deg, rain_height_km, slant_km=None):
    el = np.deg2rad(np.asarray(elevation_deg, dtype=float))
    if np.any(el <= 0):
        raise ValueError("elevation must be positive")
    d = rain_height_km / np.sin(el)
    if slant_km is not None:
        d = np.minimum(d, slant_km)
    return d


def rain_attenuation_db(k, alpha, rate_mm_h, path_km):
    """Power-law rain attenuation ``k * R**alpha * d`` in dB (0 dB without rain)."""
    if k is None or alpha is None:
        raise ValueError("power-law coefficients are required for rain attenuation")
    rate = np.asarray(rate_mm_h, dtype=float)
    if np.any(rate < 0):
        raise ValueError("rain rate must be non-negative")
    safe = np.where(rate > 0, rate, 1.0)
    return np.where(rate > 0, k * safe**alpha * np.asarray(path_km, dtype=float), 0.0)


def invert_power_law(atten_db, k, alpha, path_km):
    """Rain rate (mm/h) that produces ``atten_db`` over a wet path of ``path_km``."""
    a = np.asarray(atten_db, dtype=float)
    if np.any(a < 0) or np.any(np.asarray(path_km) <= 0):
        raise ValueError("need non-negative attenuation and positive path length")
    return (a / (k * np.asarray(path_km, dtype=float))) ** (1.0 / alpha)


# ITU-R P.838-3 regression tables: (a_j, b_j, c_j), m, c
_P838 = {
    "kh": ([-5.33980, -0.35351, -0.23789, -0.94158], [-0.10008, 1.26970, 0.86036, 0.64552],
           [1.13098, 0.45400, 0.15354, 0.16817], -0.18961, 0.71147),
    "kv": ([-3.80595, -3.44965, -0.39902, 0.50167], [0.56934, -0.22911, 0.73042, 1.07319],
           [0.81061, 0.51059, 0.11899, 0.27195], -0.16398, 0.63297),
    "ah": ([-0.14318, 0.29591, 0.32177, -5.37610, 16.1721], [1.82442, 0.77564, 0.63773, -0.96230, -3.29980],
           [-0.55187, 0.19822, 0.13164, 1.47828, 3.43990], 0.67849, -1.95537),
    "av": ([-0.07771, 0.56727, -0.20238, -48.2991, 48.5833], [2.33840, 0.95545, 1.14520, 0.791669, 0.791459],
           [-0.76284, 0.54039, 0.26809, 0.116226, 0.116479], -0.053739, 0.83433),
}


def _p838_term(name, lf):
    a, b, c, m, k = (np.asarray(v, dtype=float) if isinstance(v, list) else v for v in _P838[name])
    return float(np.sum(a * np.exp(-(((lf - b) / c) ** 2))) + m * lf + k)


def itu_p838_coefficients(freq_hz: float, polarization: str = "circular", elevation_deg: float = 0.0):
    """Rain specific-attenuation coefficients ``(k, alpha)`` from ITU-R P.838-3.

    ``polarization`` is ``"horizontal"``, ``"vertical"`` or ``"circular"``.
    """
    lf = math.log10(freq_hz / 1e9)
    kh, kv = 10 ** _p838_term("kh", lf), 10 ** _p838_term("kv", lf)
    ah, av = _p838_term("ah", lf), _p838_term("av", lf)
    tau = {"horizontal": 0.0, "vertical": math.pi / 2, "circular": math.pi / 4}[polarization]
    g = math.cos(math.radians(elevation_deg)) ** 2 * math.cos(2 * tau)
    k = (kh + kv + (kh - kv) * g) / 2
    alpha = (kh * ah + kv * av + (kh * ah - kv * av) * g) / (2 * k)
    return k, alpha
