"""Shared scenario builders for the tests."""

import numpy as np

from leoisac.orbit import ShellConfig

S_BAND = ShellConfig("S", 570e3, 70.0, 36, 20, 2.185e9, 30e6, 24.0, 75.0, rain_k=1.103e-4, rain_alpha=1.0239)
KA_BAND = ShellConfig("Ka", 550e3, 53.0, 72, 22, 19.95e9, 500e6, 30.5, 75.0, rain_k=0.09335, rain_alpha=1.02036)


def small_config(**over):
    """Tiny desk scenario (a 1 x 1.25 degree region) for fast harness tests."""
    cfg = {
        "name": "tiny",
        "constellation": {"shells": [
            {"id": "S", "altitude_km": 570, "inclination_deg": 70, "planes": 36, "sats_per_plane": 20,
             "carrier_ghz": 2.185, "bandwidth_mhz": 30, "antenna_gain_dbi": 24, "tx_power_w": 75},
            {"id": "Ka", "altitude_km": 550, "inclination_deg": 53, "planes": 72, "sats_per_plane": 22,
             "carrier_ghz": 19.95, "bandwidth_mhz": 500, "antenna_gain_dbi": 30.5, "tx_power_w": 75},
        ]},
        "ground": {"region": {"lat_min": 48, "lat_max": 49, "lon_min": 11, "lon_max": 12.25, "step_deg": 0.25},
                   "population": {"mean": 40000, "zero_fraction": 0.1}},
        "frame": {"n_beams": 1},
        "run": {"frames": 3},
    }
    for key, val in over.items():
        node = cfg
        parts = key.split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
        node[parts[-1]] = val
    return cfg


def zenith_position(lat_deg, lon_deg, altitude_m, R=6371e3):
    lat, lon = np.deg2rad(lat_deg), np.deg2rad(lon_deg)
    u = np.array([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)])
    return (R + altitude_m) * u
