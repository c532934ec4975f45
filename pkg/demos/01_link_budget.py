"""Geometry and link budget of the two shells over one ground cell.

Walks through orbital speed, the slant-range limit at the minimum
elevation, the clear-sky SNR and rate of both bands, and what a 10 mm/h
rain cell does to each of them.
"""

import numpy as np

from leoisac.harness import build_scenario, load_config
from leoisac.link import lin2db, path_loss_db, snr
from leoisac.orbit import max_propagation_time, orbital_velocity, slant_range_max
from leoisac.rain import rain_attenuation_db, wet_path_km

sc = build_scenario(load_config("desk_small"))
eta = sc.min_elevation_deg
print(f"minimum elevation {eta:g} deg")
for sh in sc.shells:
    d = slant_range_max(sh.altitude_m, eta)
    print(f"\nshell {sh.id}: {sh.total} satellites at {sh.altitude_m / 1e3:.0f} km, {sh.carrier_hz / 1e9:g} GHz")
    print(f"  orbital speed        {orbital_velocity(sh):8.1f} m/s")
    print(f"  max slant range      {d / 1e3:8.1f} km")
    print(f"  path loss at range   {path_loss_db(d, sh.carrier_hz):8.2f} dB")
    g0 = snr(sh, d, 1.0, sc.noise)
    print(f"  clear-sky SNR        {lin2db(g0):8.2f} dB -> {sh.bandwidth_hz * np.log2(1 + g0) / 1e6:.1f} Mbit/s")
    a_db = float(rain_attenuation_db(sh.rain_k, sh.rain_alpha, 10.0, wet_path_km(eta, 6.0, d / 1e3)))
    g = snr(sh, d, 10 ** (a_db / 10), sc.noise)
    print(f"  10 mm/h rain         {a_db:8.2f} dB -> {sh.bandwidth_hz * np.log2(1 + g) / 1e6:.1f} Mbit/s")

t = max_propagation_time(list(sc.shells), eta)
print(f"\nworst one-way propagation delay {t * 1e3:.3f} ms; handover bound {sc.handover_bound_s * 1e3:g} ms")
