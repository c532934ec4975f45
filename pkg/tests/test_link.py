import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import KA_BAND, S_BAND
from leoisac.ground import Region, build_grid
from leoisac.link import (
    NoiseModel,
    achievable_rate,
    build_link_table,
    db2lin,
    lin2db,
    path_loss,
    path_loss_db,
    snr,
)
from leoisac.orbit import propagate, slant_range_max, visible_satellites

C = 299792458.0


def _snr_linear(P_w, gain_dbi, bw, d, f, atten=1.0, n0_dbm_hz=-176.31, point_db=0.3):
    # everything in watts and plain ratios
    g = 10 ** (gain_dbi / 10)
    loss = (4 * math.pi * d * f / C) ** 2
    n0_w = 10 ** (n0_dbm_hz / 10) * 1e-3
    return P_w * g / (loss * atten * 10 ** (point_db / 10) * n0_w * bw)


def test_db_helpers():
    assert db2lin(30) == pytest.approx(1000)
    assert lin2db(100) == pytest.approx(20)


def test_path_loss_examples():
    assert path_loss_db(1000e3, 19.95e9) == pytest.approx(178.45, abs=0.01)
    assert path_loss_db(1123.25e3, 2.185e9) == pytest.approx(160.25, abs=0.01)
    assert path_loss_db(2e6, 2e9) - path_loss_db(1e6, 2e9) == pytest.approx(6.0206, abs=1e-4)
    assert path_loss(1000e3, 19.95e9) == pytest.approx((4 * math.pi * 1e6 * 19.95e9 / C) ** 2, rel=1e-12)
    with pytest.raises(ValueError):
        path_loss_db(0.0, 1e9)


def test_snr_examples():
    ka = lin2db(snr(KA_BAND, 1000e3))
    assert ka == pytest.approx(-10.2, abs=0.1)
    assert snr(KA_BAND, 1000e3) == pytest.approx(_snr_linear(75, 30.5, 500e6, 1e6, 19.95e9), rel=1e-10)
    s = lin2db(snr(S_BAND, 1123.25e3))
    assert s == pytest.approx(13.7, abs=0.1)
    assert snr(S_BAND, 1123.25e3) == pytest.approx(_snr_linear(75, 24, 30e6, 1123.25e3, 2.185e9), rel=1e-10)
    assert snr(KA_BAND, 1000e3, 2.0) == pytest.approx(snr(KA_BAND, 1000e3) / 2, rel=1e-12)


@given(st.floats(400e3, 3000e3), st.floats(1, 1e4))
def test_snr_matches_linear_chain(d, a):
    noise = NoiseModel(-170.0, 1.0, 3.0)
    got = snr(KA_BAND, d, a, noise)
    g_user = 10 ** 0.3
    want = _snr_linear(75, 30.5, 500e6, d, 19.95e9, a, -170.0, 1.0) * g_user
    assert got == pytest.approx(want, rel=1e-9)


def test_rate_examples():
    assert achievable_rate(0.0, 30e6) == 0.0
    g = db2lin(13.7)
    assert achievable_rate(g, 30e6) / 1e6 == pytest.approx(138.3, rel=0.01)
    assert achievable_rate(g, 30e6, d_max=1200e3, max_range=1159e3) == 0.0
    assert achievable_rate(g, 30e6, d_max=1100e3, max_range=1159e3) > 0


@given(st.floats(0, 1e6), st.floats(0, 1e6))
def test_rate_monotone(g1, g2):
    lo, hi = sorted((g1, g2))
    assert achievable_rate(lo, 500e6) <= achievable_rate(hi, 500e6)


@pytest.fixture(scope="module")
def table():
    grid = build_grid(Region(48, 50, 10, 12.5, 0.25))
    a, b = propagate([S_BAND, KA_BAND], 3, 10.0), propagate([S_BAND, KA_BAND], 4, 10.0)
    pts = grid.sample_points_ecef()
    vis = visible_satellites(a, b, pts, 25)
    rain = np.zeros(len(grid))
    rain[:20] = 15.0
    return grid, a, b, vis, build_link_table(a, b, vis, grid, rain, 25)


def test_link_table_invariants(table):
    grid, a, b, vis, lt = table
    assert lt.shape == (len(vis), len(grid))
    assert np.all(lt.rate[~lt.in_range] == 0)
    assert np.all(lt.rate[lt.in_range] > 0)
    assert np.all(lt.snr > 0)
    assert np.all(lt.attenuation >= 1)
    assert np.allclose(lt.snr, lt.clear_sky_snr / lt.attenuation, rtol=1e-12)
    assert np.all(lt.d_max_m >= lt.distance_m)
    assert np.array_equal(lt.rates_from_snr(lt.snr), lt.rate)
    assert np.array_equal(lt.footprint_cells(), lt.in_range.sum(1))
    # rain only where it rains, and on Ka much stronger than S
    assert np.all(lt.atten_db[:, 20:] == 0)
    ka = lt.sensing_capable
    wet_ka = lt.atten_db[ka][:, :20][lt.in_range[ka][:, :20]]
    wet_s = lt.atten_db[~ka][:, :20][lt.in_range[~ka][:, :20]]
    assert wet_ka.size and wet_s.size and wet_ka.min() > 10 * wet_s.max()


def test_link_table_gating_uses_both_frames(table):
    grid, a, b, vis, lt = table
    rng_ka = slant_range_max(550e3, 25)
    for row, sat in enumerate(vis):
        r = slant_range_max(a.altitudes()[sat], 25)
        assert np.array_equal(lt.in_range[row], lt.d_max_m[row] <= r)
    assert rng_ka > 0


def test_link_table_clear_sky(table):
    grid, a, b, vis, _ = table
    dry = build_link_table(a, b, vis, grid, None, 25)
    assert np.all(dry.atten_db == 0)
    assert np.array_equal(dry.snr, dry.clear_sky_snr)


def test_link_table_empty():
    grid = build_grid(Region(48, 49, 10, 11, 0.5))
    a = propagate([KA_BAND], 0, 10.0)
    lt = build_link_table(a, a, [], grid, None, 25)
    assert lt.shape == (0, 4)
