import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from risnoma import (PhaseVector, PowerAllocation, SystemParams, dbm_to_watts,
                     db_to_linear, linear_to_db, sca_coefficients, sinr_all,
                     watts_to_dbm)
from risnoma.rates import RateReport, report_from_gains, surrogate_rate
from risnoma.oracles import sinr_transcription
from conftest import make_channel, make_gains


def _report(gamma):
    rate = math.log2(1 + gamma)
    return RateReport(sinr_cu=1.0, sinr_dri=gamma, sinr_drj=gamma,
                      rate_cu=1.0, rate_dri=rate, rate_drj=rate,
                      sum_rate=2 * rate, qos_feasible=True)


def test_sca_at_gamma_one():
    sca = sca_coefficients(_report(1.0))
    assert sca.alpha_i == pytest.approx(0.5, abs=0)
    assert sca.beta_i == pytest.approx(1.0, abs=0)


def test_sca_at_gamma_three():
    sca = sca_coefficients(_report(3.0))
    assert sca.alpha_i == pytest.approx(0.75, abs=0)
    assert sca.beta_i == pytest.approx(2.0 - 0.75 * math.log2(3.0), rel=1e-15)
    assert sca.beta_i == pytest.approx(0.81128, abs=5e-6)


def test_sca_tangency_and_lower_bound_at_two():
    sca = sca_coefficients(_report(2.0))
    assert surrogate_rate(sca.alpha_i, sca.beta_i, 2.0) == pytest.approx(
        math.log2(3.0), abs=1e-15)
    for g in (0.5, 1.0, 4.0, 8.0):
        assert surrogate_rate(sca.alpha_i, sca.beta_i, g) <= math.log2(1 + g) + 1e-12


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=-3.0, max_value=3.0),
       st.floats(min_value=-3.0, max_value=3.0))
def test_sca_surrogate_global_lower_bound(log_g0, log_g):
    g0, g = 10.0 ** log_g0, 10.0 ** log_g
    sca = sca_coefficients(_report(g0))
    assert surrogate_rate(sca.alpha_i, sca.beta_i, g) <= math.log2(1 + g) + 1e-10
    assert surrogate_rate(sca.alpha_i, sca.beta_i, g0) == pytest.approx(
        math.log2(1 + g0), rel=1e-12)


def test_sca_degenerate_marker():
    sca = sca_coefficients(RateReport(1, 0.0, 2.0, 1, 0, 1, 1, True))
    assert sca.degenerate_i and not sca.degenerate_j
    assert sca.alpha_i == 0.0 and sca.beta_i == 0.0


def test_sinr_all_zero_power(small_params):
    ch = make_channel(4, np.random.default_rng(0))
    pa = PowerAllocation(0.0, 0.3, 0.7)
    rep = sinr_all(ch, pa, PhaseVector.zeros(4), small_params)
    assert rep.sinr_dri == 0.0 and rep.sinr_drj == 0.0 and rep.sum_rate == 0.0
    from risnoma import compute_gains
    gains = compute_gains(ch, PhaseVector.zeros(4), small_params)
    assert rep.sinr_cu == pytest.approx(gains.G_c / small_params.sigma2, rel=1e-12)


def test_sinr_all_strong_user_only():
    params = SystemParams(q_c=0.0 + 1e-300, p_max=1.0, sigma2=0.5,
                          gamma_min=1e-9, k=4)
    ch = make_channel(4, np.random.default_rng(1))
    pa = PowerAllocation(0.8, 1.0, 0.0)
    rep = sinr_all(ch, pa, PhaseVector.zeros(4), params)
    from risnoma import compute_gains
    gains = compute_gains(ch, PhaseVector.zeros(4), params)
    assert rep.sinr_dri == pytest.approx(0.8 * gains.H_i / (gains.G_i + 0.5),
                                         rel=1e-12)
    assert rep.sinr_drj == 0.0


def test_sinr_all_matches_transcription_oracle(small_params):
    rng = np.random.default_rng(2)
    for trial in range(10):
        ch = make_channel(8, rng, seed=trial)
        params = SystemParams(k=8, sigma2=0.3, q_c=1.3, gamma_min=1.5)
        pa = PowerAllocation(0.6, 0.45, 0.55)
        phases = PhaseVector(rng.uniform(0, 2 * np.pi, 8))
        rep = sinr_all(ch, pa, phases, params)
        gc, gi, gj = sinr_transcription(ch, pa, phases, params)
        assert rep.sinr_cu == pytest.approx(gc, rel=1e-12)
        assert rep.sinr_dri == pytest.approx(gi, rel=1e-12)
        assert rep.sinr_drj == pytest.approx(gj, rel=1e-12)


def test_sinr_monotonicity(synth_params):
    rng = np.random.default_rng(3)
    gains = make_gains(rng)
    lam_grid = np.linspace(0.05, 0.95, 12)
    prev = -1.0
    for lam in lam_grid:
        rep = report_from_gains(gains, PowerAllocation(0.5, lam, 1 - lam),
                                synth_params)
        assert rep.sinr_dri >= prev
        prev = rep.sinr_dri
    prev_i, prev_c = -1.0, math.inf
    for p in np.linspace(0.01, 1.0, 12):
        rep = report_from_gains(gains, PowerAllocation(p, 0.4, 0.6), synth_params)
        assert rep.sinr_dri >= prev_i
        assert rep.sinr_cu <= prev_c
        prev_i, prev_c = rep.sinr_dri, rep.sinr_cu


def test_report_internal_consistency(synth_params):
    gains = make_gains(np.random.default_rng(4))
    rep = report_from_gains(gains, PowerAllocation(0.7, 0.3, 0.7), synth_params)
    assert rep.rate_dri == math.log2(1 + rep.sinr_dri)
    assert rep.rate_drj == math.log2(1 + rep.sinr_drj)
    assert rep.rate_cu == math.log2(1 + rep.sinr_cu)
    assert rep.sum_rate == rep.rate_dri + rep.rate_drj
    assert rep.qos_feasible == (rep.sinr_cu >= synth_params.gamma_min)


def test_db_helpers_roundtrip():
    assert dbm_to_watts(30.0) == pytest.approx(1.0, rel=1e-12)
    assert watts_to_dbm(dbm_to_watts(-174.0)) == pytest.approx(-174.0, rel=1e-12)
    assert db_to_linear(20.0) == pytest.approx(100.0, rel=1e-12)
    assert linear_to_db(db_to_linear(7.7)) == pytest.approx(7.7, rel=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(q_c=-1.0).validate()
    with pytest.raises(ValueError):
        SystemParams(tol=2.0).validate()
    with pytest.raises(ValueError):
        SystemParams(k=0).validate()
    SystemParams().validate()


def test_allocation_validation():
    PowerAllocation(0.5, 0.3, 0.7).validate(1.0)
    with pytest.raises(ValueError):
        PowerAllocation(2.0, 0.3, 0.7).validate(1.0)
    with pytest.raises(ValueError):
        PowerAllocation(0.5, 0.6, 0.6).validate(1.0)
