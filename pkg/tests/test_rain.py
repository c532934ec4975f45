import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from leoisac.ground import Region, build_grid
from leoisac.rain import (
    RainField,
    RainParams,
    dtmc_probs,
    init_field,
    invert_power_law,
    itu_p838_coefficients,
    rain_attenuation_db,
    rain_rate,
    step,
    wet_path_km,
)

PARAMS = RainParams()


def _field(active, rates, coverage):
    n = len(rates)
    return RainField(np.zeros((n, 2)), np.ones(n), np.asarray(rates, float), np.asarray(active, bool),
                     np.asarray(coverage, bool).reshape(n, -1) if n else np.zeros((0, 3), bool))


def test_params_validation():
    with pytest.raises(ValueError):
        RainParams(mean_on_h=0)


def test_dtmc_probs_table_values():
    p_on, p_off, pi_on = dtmc_probs(PARAMS, 10.0)
    assert p_on == pytest.approx(5.167e-4, rel=1e-3)
    assert p_off == pytest.approx(1.472e-3, rel=1e-3)
    assert pi_on == pytest.approx(0.2599, abs=2e-4)
    assert pi_on == pytest.approx(0.26, abs=5e-3)
    assert dtmc_probs(PARAMS, 1e-6)[2] == pytest.approx(1.886 / (1.886 + 5.376), abs=1e-4)
    assert dtmc_probs(RainParams(mean_on_h=2.0, mean_off_h=2.0), 10.0)[2] == 0.5
    with pytest.raises(ValueError):
        dtmc_probs(PARAMS, 0)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(1, 3600))
def test_dtmc_probs_closed_form(on_h, off_h, t):
    p_on, p_off, pi_on = dtmc_probs(RainParams(mean_on_h=on_h, mean_off_h=off_h), t)
    assert p_off == pytest.approx(1 - math.exp(-t / (on_h * 3600)), rel=1e-9)
    assert p_on == pytest.approx(1 - math.exp(-t / (off_h * 3600)), rel=1e-9)
    assert 0 < pi_on < 1


def test_init_field_counts_and_determinism():
    g = build_grid(Region(40, 50, 0, 20, 0.25))
    a = init_field(g, PARAMS, 10.0, np.random.default_rng(4))
    b = init_field(g, PARAMS, 10.0, np.random.default_rng(4))
    assert np.array_equal(a.centers_km, b.centers_km) and np.array_equal(a.active, b.active)
    # expected count from the sampled window area
    xy = g.planar_km()
    cell_half = 0.5 * 0.25 * math.pi / 180 * 6371.0
    span = 2 * (np.abs(xy).max(axis=0) + cell_half + 3 * PARAMS.mean_radius_km)
    lam = PARAMS.intensity_per_km2 * span.prod()
    assert abs(len(a) - lam) < 5 * math.sqrt(lam)
    assert a.coverage.shape == (len(a), len(g))
    # coverage is the disc test against the centroids
    d = np.linalg.norm(a.centers_km[:, None] - xy[None], axis=2)
    assert np.array_equal(a.coverage, d <= a.radius_km[:, None])


def test_ppp_expected_count_example():
    assert PARAMS.intensity_per_km2 * 1e6 == pytest.approx(840)


def test_init_field_marks_statistics():
    g = build_grid(Region(0, 40, 0, 40, 2.0))
    f = init_field(g, PARAMS, 10.0, np.random.default_rng(0))
    n = len(f)
    assert n > 5000
    assert f.radius_km.mean() == pytest.approx(22.6, rel=5 / math.sqrt(n))
    assert f.rate_mm_h.mean() == pytest.approx(8.77, rel=5 / math.sqrt(n))
    assert f.active.mean() == pytest.approx(0.2599, abs=5 * math.sqrt(0.26 * 0.74 / n))
    half = init_field(g, RainParams(mark_is_diameter=True), 10.0, np.random.default_rng(0))
    assert np.allclose(half.radius_km, f.radius_km / 2)


def test_step_extremes_and_persistence():
    g = build_grid(Region(40, 45, 0, 10, 0.25))
    f = init_field(g, PARAMS, 10.0, np.random.default_rng(1))
    forced = RainParams(mean_on_h=1e-9, mean_off_h=1e9)  # p_off -> 1, p_on -> 0
    nxt = step(f, forced, 3600.0, np.random.default_rng(2))
    assert not nxt.active.any()
    assert nxt.frame == f.frame + 1
    assert np.array_equal(nxt.centers_km, f.centers_km) and np.array_equal(nxt.rate_mm_h, f.rate_mm_h)
    s1 = step(f, PARAMS, 10.0, np.random.default_rng(5))
    s2 = step(f, PARAMS, 10.0, np.random.default_rng(5))
    assert np.array_equal(s1.active, s2.active)


def test_long_run_on_fraction():
    # a single chain with frame length chosen so switching is frequent enough to mix
    params = RainParams(mean_on_h=1.886, mean_off_h=5.376)
    t = 1800.0
    _, _, pi_on = dtmc_probs(params, t)
    f = _field([False], [1.0], [[True]])
    rng = np.random.default_rng(9)
    on = 0
    n = 100_000
    for _ in range(n):
        f = step(f, params, t, rng)
        on += int(f.active[0])
    assert on / n == pytest.approx(pi_on, abs=0.01)


def test_different_streams_differ():
    g = build_grid(Region(40, 50, 0, 20, 0.25))
    f = init_field(g, PARAMS, 10.0, np.random.default_rng(1))
    a = f
    b = f
    for k in range(200):
        a = step(a, PARAMS, 600.0, np.random.default_rng([1, k]))
        b = step(b, PARAMS, 600.0, np.random.default_rng([2, k]))
    assert not np.array_equal(a.active, b.active)


def test_rain_rate_examples():
    assert np.array_equal(rain_rate(_field([], [], np.zeros((0, 3)))), np.zeros(3))
    f = _field([True, True, True], [3.0, 4.5, 9.0], [[1, 0], [1, 1], [0, 0]])
    assert np.allclose(rain_rate(f), [7.5, 4.5])
    off = _field([False], [3.0], [[1]])
    assert rain_rate(off)[0] == 0


def test_attenuation_examples():
    assert rain_attenuation_db(0.075, 1.1, 0.0, 8.0) == 0.0
    d = wet_path_km(math.degrees(math.asin(6 / 8)), 6.0)
    assert d == pytest.approx(8.0)
    assert rain_attenuation_db(0.075, 1.1, 10.0, 8.0) == pytest.approx(7.553, abs=1e-3)
    assert rain_attenuation_db(0.075, 1.1, 10.0, 16.0) == pytest.approx(2 * rain_attenuation_db(0.075, 1.1, 10.0, 8.0))
    with pytest.raises(ValueError):
        rain_attenuation_db(None, 1.1, 1.0, 1.0)
    with pytest.raises(ValueError):
        rain_attenuation_db(0.075, 1.1, -1.0, 1.0)


def test_wet_path():
    assert wet_path_km(90.0, 6.0) == pytest.approx(6.0)
    assert wet_path_km(30.0, 6.0, slant_km=5.0) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        wet_path_km(0.0, 6.0)


def test_invert_power_law():
    assert invert_power_law(0.0, 0.075, 1.1, 8.0) == 0.0
    assert invert_power_law(7.553, 0.075, 1.1, 8.0) == pytest.approx(10.0, abs=1e-3)
    with pytest.raises(ValueError):
        invert_power_law(-1.0, 0.075, 1.1, 8.0)


@given(st.floats(0.001, 300), st.floats(1e-5, 1), st.floats(0.6, 1.4), st.floats(0.1, 50))
def test_power_law_round_trip(rate, k, alpha, d):
    a = rain_attenuation_db(k, alpha, rate, d)
    assert invert_power_law(a, k, alpha, d) == pytest.approx(rate, rel=1e-9)


@given(st.floats(0, 200), st.floats(0, 50), st.floats(0.1, 20), st.floats(0, 5))
def test_attenuation_monotone(rate, dr, d, dd):
    k, a = 0.09335, 1.02
    base = rain_attenuation_db(k, a, rate, d)
    assert rain_attenuation_db(k, a, rate + dr, d) >= base
    assert rain_attenuation_db(k, a, rate, d + dd) >= base
    assert base >= 0


@pytest.mark.parametrize("f_ghz, kh, ah, kv, av", [
    # published P.838-3 table entries
    (1, 0.0000259, 0.9691, 0.0000308, 0.8592),
    (2, 0.0000847, 1.0664, 0.0000998, 0.9490),
    (10, 0.01217, 1.2571, 0.01129, 1.2156),
    (20, 0.09164, 1.0568, 0.09611, 0.9847),
    (30, 0.2403, 0.9485, 0.2291, 0.9129),
])
def test_itu_coefficients_match_table(f_ghz, kh, ah, kv, av):
    k, a = itu_p838_coefficients(f_ghz * 1e9, "horizontal")
    assert k == pytest.approx(kh, rel=2e-3) and a == pytest.approx(ah, abs=2e-4)
    k, a = itu_p838_coefficients(f_ghz * 1e9, "vertical")
    assert k == pytest.approx(kv, rel=2e-3) and a == pytest.approx(av, abs=2e-4)


def test_itu_circular_is_mean_of_h_and_v():
    kh, ah = itu_p838_coefficients(19.95e9, "horizontal")
    kv, av = itu_p838_coefficients(19.95e9, "vertical")
    k, a = itu_p838_coefficients(19.95e9, "circular")
    assert k == pytest.approx((kh + kv) / 2)
    assert a == pytest.approx((kh * ah + kv * av) / (kh + kv))
