"""Scenario configuration: YAML loading, defaults, validation and digest."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import yaml

from ..alloc import FRAMEWORKS, SolverParams
from ..frame import ConfigurationError, min_handover_time
from ..ground import CellGrid, Region, build_grid, load_population, synth_population
from ..link import NoiseModel
from ..orbit import ShellConfig, max_propagation_time
from ..rain import RainParams, itu_p838_coefficients
from ..sense import SENSING_MODES, PilotConfig
from .seeds import stream_seed

__all__ = [
    "Scenario",
    "DEFAULTS",
    "REALISATION_MODES",
    "load_config",
    "build_scenario",
    "config_digest",
    "set_option",
    "preset_path",
    "PRESETS",
]

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"
PRESETS = ("table2_full", "desk_small")
REALISATION_MODES = ("outage", "capped")

DEFAULTS = {
    "name": "scenario",
    "constellation": {"min_elevation_deg": 25.0, "shells": []},
    "link": {"noise_psd_dbm_hz": -176.31, "pointing_loss_db": 0.3, "user_gain_dbi": 0.0},
    "ground": {
        "region": {"lat_min": 40.0, "lat_max": 55.0, "lon_min": 5.0, "lon_max": 30.0, "step_deg": 0.25},
        "active_fraction": 0.001,
        "population": {"source": "synthetic", "mean": 60000.0, "dispersion": 1.0, "zero_fraction": 0.1,
                       "seed": 0, "path": None},
    },
    "rain": {
        "enabled": True,
        "intensity_per_km2": 8.4e-4,
        "mean_radius_km": 22.6,
        "mean_rate_mm_h": 8.77,
        "mean_on_h": 1.886,
        "mean_off_h": 5.376,
        "rain_height_km": 6.0,
        "mark_is_diameter": False,
        "guard_factor": 3.0,
    },
    "frame": {"ofdma_ms": 10.0, "frame_s": 10.0, "handover_ms": 50.0, "n_rtt": 2, "n_beams": 19},
    "sensing": {"csi": "sensed", "pilot_len": 4096, "feedback_len": 64},
    "solver": {"tau": 0.5, "theta": 0.01, "delta": 10.0, "p_init": 1.0, "n_iter": 50, "kkt_tol": 1e-9,
               "max_ipm_iter": 200},
    "run": {"seed": 1, "frames": 50, "frameworks": ["jmra", "dmrab"], "realisation": "capped",
            "record_solver_ms": False},
}

_SHELL_KEYS = {"id", "altitude_km", "inclination_deg", "planes", "sats_per_plane", "carrier_ghz", "bandwidth_mhz",
               "antenna_gain_dbi", "tx_power_w", "raan_offset_deg", "walker_phasing", "rain_k", "rain_alpha"}


def preset_path(name: str) -> Path:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    return PRESET_DIR / f"{name}.yaml"


def _merge(base: dict, extra: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in extra.items():
        path = f"{where}.{key}" if where else key
        if key not in base:
            raise ConfigurationError(f"unknown config key {path!r}")
        if isinstance(base[key], dict) and isinstance(val, dict):
            out[key] = _merge(base[key], val, path)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(source: Union[str, Path, dict]) -> dict:
    """Read a scenario (path, preset name or dict) and fill in defaults.

    Unknown keys are rejected so that typos do not silently fall back to defaults.
    """
    if isinstance(source, dict):
        raw = source
    else:
        text = str(source)
        path = preset_path(text) if text in PRESETS else Path(text)
        if not path.is_file():
            raise ConfigurationError(f"no scenario file or preset named {text!r} (presets: {', '.join(PRESETS)})")
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ConfigurationError("scenario file must hold a mapping at top level")
    cfg = _merge(DEFAULTS, raw)
    for i, sh in enumerate(cfg["constellation"]["shells"]):
        unknown = set(sh) - _SHELL_KEYS
        if unknown:
            raise ConfigurationError(f"shell {i}: unknown keys {sorted(unknown)}")
    return cfg


def set_option(cfg: dict, dotted: str, value) -> dict:
    """Copy of ``cfg`` with ``a.b.c`` set to ``value`` (key must already exist)."""
    out = copy.deepcopy(cfg)
    node = out
    keys = dotted.split(".")
    for k in keys[:-1]:
        if k not in node or not isinstance(node[k], dict):
            raise ConfigurationError(f"unknown config key {dotted!r}")
        node = node[k]
    if keys[-1] not in node:
        raise ConfigurationError(f"unknown config key {dotted!r}")
    node[keys[-1]] = value
    return out


def config_digest(cfg: dict) -> str:
    """SHA-256 over the canonical JSON form of a defaults-filled config."""
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class Scenario:
    """Validated, typed view of a config dict."""

    name: str
    shells: tuple
    min_elevation_deg: float
    noise: NoiseModel
    grid: CellGrid
    rain: Optional[RainParams]
    ofdma_s: float
    frame_s: float
    handover_s: float
    n_rtt: int
    n_beams: int
    csi: str
    pilot: PilotConfig
    solver: SolverParams
    seed: int
    frames: int
    frameworks: tuple
    realisation: str
    record_solver_ms: bool
    handover_bound_s: float
    digest: str
    config: dict


def _shell(d: dict) -> ShellConfig:
    need = {"id", "altitude_km", "inclination_deg", "planes", "sats_per_plane", "carrier_ghz", "bandwidth_mhz",
            "antenna_gain_dbi", "tx_power_w"}
    missing = need - set(d)
    if missing:
        raise ConfigurationError(f"shell {d.get('id', '?')}: missing {sorted(missing)}")
    carrier = float(d["carrier_ghz"]) * 1e9
    k, a = d.get("rain_k"), d.get("rain_alpha")
    if k is None or a is None:
        k, a = itu_p838_coefficients(carrier, "circular")
    try:
        return ShellConfig(
            id=str(d["id"]),
            altitude_m=float(d["altitude_km"]) * 1e3,
            inclination_deg=float(d["inclination_deg"]),
            plane_count=int(d["planes"]),
            sats_per_plane=int(d["sats_per_plane"]),
            carrier_hz=carrier,
            bandwidth_hz=float(d["bandwidth_mhz"]) * 1e6,
            antenna_gain_dbi=float(d["antenna_gain_dbi"]),
            tx_power_w=float(d["tx_power_w"]),
            rain_k=float(k),
            rain_alpha=float(a),
            raan_offset_deg=float(d.get("raan_offset_deg", 0.0)),
            walker_phasing=int(d.get("walker_phasing", 0)),
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None


def _grid(g: dict) -> CellGrid:
    r = g["region"]
    try:
        region = Region(float(r["lat_min"]), float(r["lat_max"]), float(r["lon_min"]), float(r["lon_max"]),
                        float(r["step_deg"]))
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from None
    grid = build_grid(region, float(g["active_fraction"]))
    pop = g["population"]
    if pop["source"] == "synthetic":
        return synth_population(grid, stream_seed(int(pop["seed"]), "population"), float(pop["mean"]),
                                float(pop["dispersion"]), float(pop["zero_fraction"]))
    if pop["source"] == "csv":
        if not pop.get("path"):
            raise ConfigurationError("population source 'csv' needs a path")
        return load_population(grid, pop["path"])
    raise ConfigurationError(f"unknown population source {pop['source']!r}")


def build_scenario(cfg: dict) -> Scenario:
    """Validate a defaults-filled config and build the model objects it describes.

    Raises ``ConfigurationError`` on any inconsistency, before a frame is simulated.
    """
    con = cfg["constellation"]
    if not con["shells"]:
        raise ConfigurationError("the constellation needs at least one shell")
    shells = tuple(_shell(s) for s in con["shells"])
    if len({s.id for s in shells}) != len(shells):
        raise ConfigurationError("shell ids must be unique")
    eta = float(con["min_elevation_deg"])
    if not 0 < eta < 90:
        raise ConfigurationError("min_elevation_deg must lie in (0, 90)")

    run = cfg["run"]
    seed = int(run["seed"])
    if not 0 <= seed < 2**64:
        raise ConfigurationError("seed must be an unsigned 64-bit integer")
    frames = int(run["frames"])
    if frames < 0:
        raise ConfigurationError("frame count must be non-negative")
    fws = tuple(run["frameworks"])
    bad = [f for f in fws if f not in FRAMEWORKS]
    if bad or not fws:
        raise ConfigurationError(f"unknown framework(s) {bad}; choose from {sorted(FRAMEWORKS)}")
    if run["realisation"] not in REALISATION_MODES:
        raise ConfigurationError(f"realisation must be one of {REALISATION_MODES}")

    fr = cfg["frame"]
    ofdma_s, frame_s, ho_s = fr["ofdma_ms"] / 1e3, float(fr["frame_s"]), fr["handover_ms"] / 1e3
    n_beams = int(fr["n_beams"])
    if n_beams < 1:
        raise ConfigurationError("n_beams must be >= 1")
    for label, dur in (("frame_s", frame_s), ("handover_ms", ho_s)):
        q = dur / ofdma_s
        if ofdma_s <= 0 or dur < 0 or abs(q - round(q)) > 1e-6:
            raise ConfigurationError(f"{label} must be a non-negative whole number of OFDMA frames")
    if frame_s <= ofdma_s:
        raise ConfigurationError("a system frame must hold more than one OFDMA frame")

    se = cfg["sensing"]
    if se["csi"] not in SENSING_MODES:
        raise ConfigurationError(f"csi must be one of {SENSING_MODES}")
    lp = int(se["pilot_len"])
    if lp < 4 or lp > 2**16 or lp & (lp - 1):
        raise ConfigurationError("pilot_len must be a power of two between 2^2 and 2^16")
    try:
        pilot = PilotConfig(lp, int(se["feedback_len"]))
        solver = SolverParams(**cfg["solver"])
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(str(exc)) from None

    rain = None
    if cfg["rain"]["enabled"]:
        kw = {k: v for k, v in cfg["rain"].items() if k != "enabled"}
        try:
            rain = RainParams(**kw)
        except (ValueError, TypeError) as exc:
            raise ConfigurationError(str(exc)) from None

    ln = cfg["link"]
    noise = NoiseModel(float(ln["noise_psd_dbm_hz"]), float(ln["pointing_loss_db"]), float(ln["user_gain_dbi"]))
    grid = _grid(cfg["ground"])
    if not len(grid.populated):
        raise ConfigurationError("no cell has active users")
    bound = min_handover_time(max_propagation_time(shells, eta), ofdma_s, int(fr["n_rtt"]))
    return Scenario(
        name=str(cfg["name"]),
        shells=shells,
        min_elevation_deg=eta,
        noise=noise,
        grid=grid,
        rain=rain,
        ofdma_s=ofdma_s,
        frame_s=frame_s,
        handover_s=ho_s,
        n_rtt=int(fr["n_rtt"]),
        n_beams=n_beams,
        csi=se["csi"],
        pilot=pilot,
        solver=solver,
        seed=seed,
        frames=frames,
        frameworks=fws,
        realisation=run["realisation"],
        record_solver_ms=bool(run["record_solver_ms"]),
        handover_bound_s=bound,
        digest=config_digest(cfg),
        config=cfg,
    )

