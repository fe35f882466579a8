import math
from dataclasses import replace

import numpy as np
import pytest
from sklearn.base import clone

from risnoma import (FixedPowerScheme, Geometry, OmaScheme, PhaseVector,
                     PowerAllocation, SumRateMaximizer, SystemParams,
                     compute_gains, generate_channels, maximize_sum_rate,
                     optimize_power, run_baseline_fixed, run_baseline_oma,
                     sinr_all)
from risnoma.alternating import best_global_rotation, golden_section_max
from risnoma.oracles import joint_bruteforce, oma_power_grid, sinr_transcription
from conftest import make_channel


def _zero_ris_channel(k, rng):
    ch = make_channel(k, rng)
    for name in ("uav_to_ris", "dt_to_ris", "ris_to_cu", "ris_to_dri",
                 "ris_to_drj"):
        setattr(ch, name, np.zeros(k, complex))
    return ch


def _synth_params(**kw):
    base = dict(q_c=1.0, p_max=1.0, sigma2=0.2, gamma_min=1.0, k=4)
    base.update(kw)
    return SystemParams(**base)


def test_degenerate_ris_reduces_to_power_problem():
    rng = np.random.default_rng(0)
    ch = _zero_ris_channel(4, rng)
    params = _synth_params(gamma_min=1e-9)
    sol = maximize_sum_rate(ch, params)
    pa, rep = optimize_power(ch, PhaseVector.zeros(4), params,
                             PowerAllocation(params.p_max, 0.3, 0.7))
    assert sol.sum_rate == pytest.approx(rep.sum_rate, rel=1e-9)


def test_trajectories_nondecreasing(geometry):
    params = SystemParams(k=6)
    for seed in range(4):
        ch = generate_channels(params, geometry, seed)
        for fn in (maximize_sum_rate, run_baseline_fixed, run_baseline_oma):
            sol = fn(ch, params)
            rates = [r for _, r in sol.trajectory]
            assert all(b >= a - 1e-12 for a, b in zip(rates, rates[1:]))
            assert sol.trajectory[-1][1] == pytest.approx(
                max(sol.sum_rate, 0.0) if not sol.feasible else sol.sum_rate,
                abs=1e-12)


def test_fixed_never_beats_proposed(geometry):
    params = SystemParams(k=6)
    for seed in range(8):
        ch = generate_channels(params, geometry, seed)
        prop = maximize_sum_rate(ch, params)
        fixed = run_baseline_fixed(ch, params)
        assert fixed.sum_rate <= prop.sum_rate + params.tol


def test_fixed_report_consistent_with_sinr_all(geometry):
    params = SystemParams(k=5)
    ch = generate_channels(params, geometry, 3)
    sol = run_baseline_fixed(ch, params)
    rep = sinr_all(ch, sol.pa, sol.phases, params)
    assert rep.sum_rate == pytest.approx(sol.sum_rate, rel=1e-12)
    assert rep.sinr_cu == pytest.approx(sol.report.sinr_cu, rel=1e-12)


def test_fixed_zero_ris_is_plain_evaluation():
    rng = np.random.default_rng(1)
    ch = _zero_ris_channel(4, rng)
    params = _synth_params(gamma_min=1e-9)
    sol = run_baseline_fixed(ch, params)
    pa = PowerAllocation(params.p_max, 0.3, 0.7)
    rep = sinr_all(ch, pa, PhaseVector.zeros(4), params)
    assert sol.sum_rate == pytest.approx(rep.sum_rate, rel=1e-12)


def test_oma_symmetric_receivers_hand_formula():
    rng = np.random.default_rng(2)
    ch = _zero_ris_channel(4, rng)
    ch.direct_dt_drj = ch.direct_dt_dri
    ch.direct_uav_drj = ch.direct_uav_dri
    params = _synth_params(gamma_min=1e-9)
    sol = run_baseline_oma(ch, params)
    p = sol.pa.p_t
    gains = compute_gains(ch, sol.phases, params)
    gamma = p * gains.H_i / (gains.G_i + params.sigma2)
    assert sol.sum_rate == pytest.approx(math.log2(1.0 + gamma), rel=1e-9)


def test_oma_zero_d2d_channels():
    rng = np.random.default_rng(3)
    ch = _zero_ris_channel(4, rng)
    ch.direct_dt_dri = 0j
    ch.direct_dt_drj = 0j
    params = _synth_params(gamma_min=1e-9)
    sol = run_baseline_oma(ch, params)
    assert sol.sum_rate == pytest.approx(0.0, abs=1e-12)


def test_oma_golden_section_matches_grid(geometry):
    params = SystemParams(k=4)
    for seed in range(4):
        ch = generate_channels(params, geometry, 100 + seed)
        sol = run_baseline_oma(ch, params)
        gains = compute_gains(ch, sol.phases, params)
        grid_rate, _ = oma_power_grid(gains, params, n=10000)
        assert sol.sum_rate >= grid_rate * (1.0 - 0.01)


def test_oma_report_half_rate_bookkeeping(geometry):
    params = SystemParams(k=4)
    ch = generate_channels(params, geometry, 7)
    sol = run_baseline_oma(ch, params)
    rep = sol.report
    assert rep.rate_dri == pytest.approx(0.5 * math.log2(1 + rep.sinr_dri), rel=1e-12)
    assert rep.sum_rate == pytest.approx(rep.rate_dri + rep.rate_drj, rel=1e-12)


def test_golden_section_unimodal():
    x, v = golden_section_max(lambda t: -(t - 0.37) ** 2, 0.0, 1.0)
    assert x == pytest.approx(0.37, abs=1e-6)
    assert v == pytest.approx(0.0, abs=1e-10)


def test_best_global_rotation_never_worse(geometry):
    params = SystemParams(k=6)
    ch = generate_channels(params, geometry, 5)
    phases = PhaseVector(np.random.default_rng(0).uniform(0, 2 * np.pi, 6))
    pa = PowerAllocation(0.5 * params.p_max, 0.4, 0.6)

    def rate_fn(g):
        from risnoma.rates import report_from_gains
        return report_from_gains(g, pa, params).sum_rate

    rotated, val = best_global_rotation(ch, params, phases, rate_fn)
    assert val >= rate_fn(compute_gains(ch, phases, params)) - 1e-12
    got = rate_fn(compute_gains(ch, rotated, params))
    assert got == pytest.approx(val, rel=1e-12)


def test_joint_oracle_small_instances(geometry):
    params = SystemParams(k=4)
    for seed in (200, 201, 202):
        ch = generate_channels(params, geometry, seed)
        sol = maximize_sum_rate(ch, params)
        oracle, _, _ = joint_bruteforce(ch, params, n_power=100, n_lambda=100,
                                        n_levels=8)
        assert sol.sum_rate >= 0.95 * oracle


def test_feasible_solutions_satisfy_qos_on_recompute(geometry):
    params = SystemParams(k=5)
    for seed in range(6):
        ch = generate_channels(params, geometry, seed)
        for fn in (maximize_sum_rate, run_baseline_fixed, run_baseline_oma):
            sol = fn(ch, params)
            if sol.feasible:
                gc, _, _ = sinr_transcription(ch, sol.pa, sol.phases, params)
                if sol.scheme == "oma":
                    gc = params.q_c * abs(
                        ch.direct_uav_cu + np.sum(
                            ch.uav_to_ris * np.exp(1j * sol.phases.theta)
                            * ch.ris_to_cu)) ** 2 / (
                        sol.pa.p_t * compute_gains(ch, sol.phases, params).H_c
                        + params.sigma2)
                assert gc >= params.gamma_min * (1 - 1e-12)


def test_estimator_api_roundtrip(geometry):
    params = SystemParams(k=4)
    est = SumRateMaximizer(params=params, geometry=geometry)
    got = est.get_params()
    assert got["params"] is params
    est2 = clone(est)
    est2.set_params(params=replace(params, k=5))
    assert est2.params.k == 5

    est.fit(3)
    assert hasattr(est, "solution_")
    assert est.score() == est.solution_.sum_rate
    assert est.power_.p_t <= params.p_max

    ch = generate_channels(params, geometry, 3)
    est3 = SumRateMaximizer(params=params, geometry=geometry).fit(ch)
    assert est3.score() == pytest.approx(est.score(), rel=1e-12)


def test_estimator_validation_errors(geometry):
    params = SystemParams(k=4)
    ch6 = generate_channels(SystemParams(k=6), geometry, 0)
    with pytest.raises(ValueError, match="K="):
        SumRateMaximizer(params=params, geometry=geometry).fit(ch6)
    with pytest.raises(TypeError):
        SumRateMaximizer(params=params).fit("nonsense")
    with pytest.raises(AttributeError):
        OmaScheme().score()


def test_all_schemes_via_estimators(geometry):
    params = SystemParams(k=4)
    scores = {}
    for cls in (SumRateMaximizer, FixedPowerScheme, OmaScheme):
        est = cls(params=params, geometry=geometry).fit(11)
        scores[cls.__name__] = est.score()
        assert est.solution_.scheme in ("proposed", "fixed", "oma")
    assert scores["SumRateMaximizer"] >= scores["FixedPowerScheme"] - params.tol


def test_as_phase_vector_helper():
    from risnoma.validation import as_phase_vector

    pv = as_phase_vector(np.array([0.1, 0.2, 0.3]), 3)
    assert pv.k == 3
    assert as_phase_vector(pv, 3) is pv
    with pytest.raises(ValueError, match="length"):
        as_phase_vector(np.zeros(2), 3)


def test_configurable_split_and_slot_knobs():
    rng = np.random.default_rng(4)
    ch = _zero_ris_channel(4, rng)
    params = _synth_params(gamma_min=1e-9, fixed_split_strong=0.45)
    sol = run_baseline_fixed(ch, params)
    assert sol.pa.lambda_i == pytest.approx(0.45)
    assert sol.pa.lambda_j == pytest.approx(0.55)

    params2 = _synth_params(gamma_min=1e-9, oma_slot_strong=0.7)
    sol2 = run_baseline_oma(ch, params2)
    rep = sol2.report
    assert rep.rate_dri == pytest.approx(0.7 * math.log2(1 + rep.sinr_dri), rel=1e-12)
    assert rep.rate_drj == pytest.approx(0.3 * math.log2(1 + rep.sinr_drj), rel=1e-12)
    with pytest.raises(ValueError):
        _synth_params(oma_slot_strong=1.5).validate()
