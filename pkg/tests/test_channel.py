import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risnoma import Geometry, SystemParams, effective_gain, generate_channels
from risnoma.channel import _rician, large_scale_gain
from risnoma.oracles import effective_gain_brute


def test_effective_gain_direct_only():
    k = 5
    got = effective_gain(1 + 0j, np.zeros(k, complex), np.zeros(k, complex),
                         np.linspace(0, 3, k))
    assert got == pytest.approx(1.0, abs=0)


def test_effective_gain_unit_modulus_single_element():
    got = effective_gain(0j, np.array([1 + 0j]), np.array([1 + 0j]),
                         np.array([np.pi]))
    assert got == pytest.approx(1.0, rel=1e-15)


def test_effective_gain_matches_bruteforce_oracle():
    rng = np.random.default_rng(7)
    for _ in range(20):
        inc = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        refl = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        d = complex(rng.standard_normal(), rng.standard_normal())
        theta = rng.uniform(0, 2 * np.pi, 8)
        assert effective_gain(d, inc, refl, theta) == pytest.approx(
            effective_gain_brute(d, inc, refl, theta), rel=1e-12)


def test_effective_gain_length_mismatch():
    with pytest.raises(ValueError, match="length mismatch"):
        effective_gain(0j, np.zeros(3, complex), np.zeros(3, complex),
                       np.zeros(2))


def test_zero_direct_common_phase_invariance():
    rng = np.random.default_rng(3)
    inc = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    refl = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    theta = rng.uniform(0, 2 * np.pi, 6)
    base = effective_gain(0j, inc, refl, theta)
    for c in (0.3, 1.7, 5.9):
        assert effective_gain(0j, inc, refl, theta + c) == pytest.approx(
            base, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=1, max_value=10), st.integers(min_value=0, max_value=2**31))
def test_triangle_inequality_bound(k, seed):
    rng = np.random.default_rng(seed)
    inc = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    refl = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    d = complex(rng.standard_normal(), rng.standard_normal())
    theta = rng.uniform(0, 2 * np.pi, k)
    bound = (abs(d) + np.sum(np.abs(inc) * np.abs(refl))) ** 2
    assert effective_gain(d, inc, refl, theta) <= bound * (1 + 1e-12)


def test_cophasing_attains_bound_without_direct():
    rng = np.random.default_rng(5)
    inc = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    refl = rng.standard_normal(7) + 1j * rng.standard_normal(7)
    theta = -np.angle(inc * refl)
    bound = float(np.sum(np.abs(inc) * np.abs(refl)) ** 2)
    assert effective_gain(0j, inc, refl, theta) == pytest.approx(bound, rel=1e-12)


def test_generate_deterministic_and_valid(geometry):
    params = SystemParams(k=6)
    a = generate_channels(params, geometry, 42)
    b = generate_channels(params, geometry, 42)
    assert a.direct_dt_cu == b.direct_dt_cu
    assert np.array_equal(a.ris_to_drj, b.ris_to_drj)
    c = generate_channels(params, geometry, 43)
    assert not np.array_equal(a.ris_to_drj, c.ris_to_drj)


def test_los_limit_magnitudes_exact():
    geo = Geometry(k_factor_ris=np.inf, k_factor_ground=np.inf,
                   element_spacing_m=0.0)
    params = SystemParams(k=3)
    ch = generate_channels(params, geo, 1)
    d = float(np.linalg.norm(geo.dt - geo.dr_i))
    expect = np.sqrt(large_scale_gain(d, geo.alpha_ground, geo.pl0_db))
    assert abs(ch.direct_dt_dri) == pytest.approx(expect, rel=1e-12)
    d_ris = float(np.linalg.norm(geo.ris - geo.uav))
    expect_ris = np.sqrt(large_scale_gain(d_ris, geo.alpha_ris, geo.pl0_db))
    assert np.abs(ch.uav_to_ris) == pytest.approx(expect_ris, rel=1e-12)


def test_rayleigh_mean_power_unit():
    rng = np.random.default_rng(11)
    h = _rician(rng, np.ones(10_000), np.ones(10_000), 0.0, 0.15)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, rel=0.03)


def test_pathloss_doubling_scales_mean_power():
    geo = Geometry()
    rng = np.random.default_rng(17)
    n = 4000
    d1, d2 = 25.0, 50.0
    pl1 = large_scale_gain(d1, geo.alpha_ground, geo.pl0_db)
    pl2 = large_scale_gain(d2, geo.alpha_ground, geo.pl0_db)
    h1 = _rician(rng, np.full(n, pl1), np.full(n, d1), 0.0, 0.15)
    h2 = _rician(rng, np.full(n, pl2), np.full(n, d2), 0.0, 0.15)
    ratio = np.mean(np.abs(h2) ** 2) / np.mean(np.abs(h1) ** 2)
    assert ratio == pytest.approx(2.0 ** (-geo.alpha_ground), rel=0.05)


def test_strong_weak_relabeling(geometry):
    params = SystemParams(k=5)
    for seed in range(40):
        ch = generate_channels(params, geometry, seed)
        zero = np.zeros(params.k)
        gi = effective_gain(ch.direct_dt_dri, ch.dt_to_ris, ch.ris_to_dri, zero)
        gj = effective_gain(ch.direct_dt_drj, ch.dt_to_ris, ch.ris_to_drj, zero)
        assert gi >= gj


def test_element_prefix_pairing(geometry):
    small = generate_channels(SystemParams(k=8), geometry, 9)
    large = generate_channels(SystemParams(k=12), geometry, 9)
    assert np.array_equal(large.uav_to_ris[:8], small.uav_to_ris)
    assert large.direct_uav_drj == small.direct_uav_drj


def test_unshared_drop_links_flag(geometry):
    import dataclasses
    geo = dataclasses.replace(geometry, shared_ris_drop_links=False)
    ch = generate_channels(SystemParams(k=4), geo, 2)
    assert ch.ris_to_cu_alt is not None
    assert not np.array_equal(ch.ris_to_cu_alt, ch.ris_to_cu)
    shared = generate_channels(SystemParams(k=4), geometry, 2)
    assert shared.ris_to_cu_alt is None
    assert shared.interference_ris_to_cu() is shared.ris_to_cu


def test_geometry_validation_errors():
    with pytest.raises(ValueError, match="coincident"):
        Geometry(dt=np.zeros(3), dr_i=np.zeros(3)).validate()
    with pytest.raises(ValueError, match="exponent"):
        Geometry(alpha_ground=9.0).validate()
    with pytest.raises(ValueError, match="K-factors"):
        Geometry(k_factor_ris=-1.0).validate()
