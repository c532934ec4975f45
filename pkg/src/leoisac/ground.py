"""Geographic cell grid, population ingestion and active-user counts."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Union

import numpy as np

from .constants import R_E

__all__ = ["Region", "Cell", "CellGrid", "build_grid", "load_population", "synth_population", "latlon_to_ecef"]

log = logging.getLogger(__name__)

_SPAN_TOL = 1e-9


@dataclass(frozen=True)
class Region:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    cell_step: float

    def __post_init__(self):
        if not (self.lat_min < self.lat_max and self.lon_min < self.lon_max):
            raise ValueError("region bounds must satisfy min < max")
        if self.cell_step <= 0:
            raise ValueError("cell_step must be positive")
        for span in (self.lat_max - self.lat_min, self.lon_max - self.lon_min):
            q = span / self.cell_step
            if abs(q - round(q)) > _SPAN_TOL * max(1.0, q):
                raise ValueError(f"span {span} is not an integer multiple of cell_step {self.cell_step}")

    @property
    def n_lat(self) -> int:
        return int(round((self.lat_max - self.lat_min) / self.cell_step))

    @property
    def n_lon(self) -> int:
        return int(round((self.lon_max - self.lon_min) / self.cell_step))

    @property
    def center(self):
        return 0.5 * (self.lat_min + self.lat_max), 0.5 * (self.lon_min + self.lon_max)


@dataclass(frozen=True)
class Cell:
    cell_id: int
    lat_bounds: tuple
    lon_bounds: tuple
    centroid: tuple
    population: int
    active_fraction: float
    active_users: int
    anchor: tuple


def latlon_to_ecef(lat_deg, lon_deg, radius=R_E) -> np.ndarray:
    lat = np.deg2rad(np.asarray(lat_deg, dtype=float))
    lon = np.deg2rad(np.asarray(lon_deg, dtype=float))
    return np.stack(
        [radius * np.cos(lat) * np.cos(lon), radius * np.cos(lat) * np.sin(lon), radius * np.sin(lat)], axis=-1
    )


def _active(population, fraction):
    # the epsilon guards against 0.001 * 1000 landing a hair above 1.0
    m = np.ceil(np.asarray(fraction, dtype=float) * np.asarray(population, dtype=float) - 1e-9)
    return np.maximum(m, 0).astype(np.int64)


@dataclass(frozen=True)
class CellGrid:
    """Row-major grid of quasi-Earth-fixed cells.

    Cell ``i`` sits at latitude row ``i // n_lon`` (counted from ``lat_min``)
    and longitude column ``i % n_lon``. The anchor node of every cell is its
    centroid.
    """

    region: Region
    lat_lo: np.ndarray
    lat_hi: np.ndarray
    lon_lo: np.ndarray
    lon_hi: np.ndarray
    population: np.ndarray
    active_fraction: np.ndarray
    dropped_records: int = 0
    dropped_count: int = 0

    def __len__(self):
        return len(self.lat_lo)

    @property
    def centroid_lat(self):
        return 0.5 * (self.lat_lo + self.lat_hi)

    @property
    def centroid_lon(self):
        return 0.5 * (self.lon_lo + self.lon_hi)

    @property
    def active_users(self) -> np.ndarray:
        return _active(self.population, self.active_fraction)

    @property
    def populated(self) -> np.ndarray:
        return np.flatnonzero(self.active_users > 0)

    def centroids_ecef(self) -> np.ndarray:
        return latlon_to_ecef(self.centroid_lat, self.centroid_lon)

    def sample_points_ecef(self) -> np.ndarray:
        """(C, 5, 3) array: four corners followed by the centroid."""
        lats = np.stack([self.lat_lo, self.lat_lo, self.lat_hi, self.lat_hi, self.centroid_lat], axis=1)
        lons = np.stack([self.lon_lo, self.lon_hi, self.lon_lo, self.lon_hi, self.centroid_lon], axis=1)
        return latlon_to_ecef(lats, lons)

    def planar_km(self) -> np.ndarray:
        """Centroids on an equirectangular plane centred on the region, in km."""
        lat0, lon0 = self.region.center
        r_km = R_E / 1e3
        x = r_km * np.deg2rad(self.centroid_lon - lon0) * math.cos(math.radians(lat0))
        y = r_km * np.deg2rad(self.centroid_lat - lat0)
        return np.column_stack([x, y])

    def cell(self, i: int) -> Cell:
        c = (float(self.centroid_lat[i]), float(self.centroid_lon[i]))
        return Cell(
            cell_id=int(i),
            lat_bounds=(float(self.lat_lo[i]), float(self.lat_hi[i])),
            lon_bounds=(float(self.lon_lo[i]), float(self.lon_hi[i])),
            centroid=c,
            population=int(self.population[i]),
            active_fraction=float(self.active_fraction[i]),
            active_users=int(self.active_users[i]),
            anchor=c,
        )

    def with_population(self, population, active_fraction=None, **kw) -> "CellGrid":
        pop = np.asarray(population, dtype=np.int64)
        if pop.shape != self.lat_lo.shape or np.any(pop < 0):
            raise ValueError("population must be a non-negative vector with one entry per cell")
        frac = self.active_fraction if active_fraction is None else np.broadcast_to(
            np.asarray(active_fraction, dtype=float), pop.shape
        ).copy()
        if np.any((frac < 0) | (frac > 1)):
            raise ValueError("active fraction must lie in [0, 1]")
        return replace(self, population=pop, active_fraction=frac, **kw)


def build_grid(region: Region, active_fraction: float = 0.001) -> CellGrid:
    i_lat, i_lon = np.divmod(np.arange(region.n_lat * region.n_lon), region.n_lon)
    step = region.cell_step
    lat_lo = region.lat_min + i_lat * step
    lon_lo = region.lon_min + i_lon * step
    n = len(lat_lo)
    return CellGrid(
        region=region,
        lat_lo=lat_lo,
        lat_hi=lat_lo + step,
        lon_lo=lon_lo,
        lon_hi=lon_lo + step,
        population=np.zeros(n, dtype=np.int64),
        active_fraction=np.full(n, float(active_fraction)),
    )


def _read_rows(source) -> Iterable[tuple]:
    if isinstance(source, (str, Path)):
        with open(source, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = {"lat", "lon", "count"} - set(reader.fieldnames or [])
            if missing:
                raise ValueError(f"population file lacks columns {sorted(missing)}")
            for row in reader:
                yield float(row["lat"]), float(row["lon"]), int(row["count"])
    else:
        for lat, lon, count in source:
            yield float(lat), float(lon), int(count)


def load_population(grid: CellGrid, source: Union[str, Path, Iterable]) -> CellGrid:
    """Accumulate ``(lat, lon, count)`` records into the cells that contain them.

    ``source`` is either a path to a ``lat,lon,count`` CSV file or an iterable
    of triples. Records outside the region are tallied in
    ``dropped_records``/``dropped_count`` rather than raising.
    """
    reg = grid.region
    pop = np.zeros(len(grid), dtype=np.int64)
    dropped_n = dropped_c = 0
    for lat, lon, count in _read_rows(source):
        if count < 0:
            raise ValueError("population counts must be non-negative")
        if not (reg.lat_min <= lat <= reg.lat_max and reg.lon_min <= lon <= reg.lon_max):
            dropped_n += 1
            dropped_c += count
            continue
        r = min(int((lat - reg.lat_min) // reg.cell_step), reg.n_lat - 1)
        c = min(int((lon - reg.lon_min) // reg.cell_step), reg.n_lon - 1)
        pop[r * reg.n_lon + c] += count
    if dropped_n:
        log.warning("%d population records (%d people) fall outside the region", dropped_n, dropped_c)
    return grid.with_population(pop, dropped_records=dropped_n, dropped_count=dropped_c)


def synth_population(
    grid: CellGrid,
    seed,
    mean: float,
    dispersion: float,
    zero_fraction: float = 0.0,
) -> CellGrid:
    """Log-normal per-cell population with a fixed share of empty cells.

    ``dispersion`` is the log-space standard deviation; the distribution is
    shifted so that its mean equals ``mean``. Exactly
    ``round(zero_fraction * C)`` cells, chosen at random, are set to zero.
    """
    if mean <= 0:
        raise ValueError("mean population must be positive")
    if not 0 <= zero_fraction <= 1:
        raise ValueError("zero_fraction must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    n = len(grid)
    if dispersion > 0:
        mu = math.log(mean) - 0.5 * dispersion**2
        draws = rng.lognormal(mu, dispersion, size=n)
    else:
        draws = np.full(n, float(mean))
    pop = np.ceil(draws).astype(np.int64)
    n_zero = int(round(zero_fraction * n))
    if n_zero:
        pop[rng.choice(n, size=n_zero, replace=False)] = 0
    return grid.with_population(pop)
