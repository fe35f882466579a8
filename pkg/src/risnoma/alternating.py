"""Alternating-optimization driver, benchmark schemes and estimator wrappers.

Each scheme produces a Solution whose trajectory is the accepted full-SINR
sum rate per outer round; a round is accepted only when it improves, so
the trajectories are nondecreasing by construction.  QoS is enforced at
the full-SINR level through an exact power cap, which is re-derived every
time the phases change.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .beamforming import PhaseVector, optimize_phases
from .channel import ChannelRealization, Geometry
from .power_alloc import compute_gains, optimize_power, qos_power_cap
from .rates import (PowerAllocation, RateReport, SystemParams,
                    report_from_gains)
from .validation import check_channel, check_geometry, check_system_params

def _fixed_split(params: SystemParams) -> tuple[float, float]:
    """Strong/weak NOMA fractions of the fixed benchmark."""
    return params.fixed_split_strong, 1.0 - params.fixed_split_strong


@dataclass
class Solution:
    """Operating point, rate report and bookkeeping for one scheme run."""

    pa: PowerAllocation
    phases: PhaseVector
    report: RateReport
    trajectory: list[tuple[int, float]]
    converged: bool
    feasible: bool
    scheme: str = "proposed"
    sandwich_margin: float = math.inf
    iterations: int = 0

    @property
    def sum_rate(self) -> float:
        return self.report.sum_rate


def _qos_projected(pa: PowerAllocation, gains, params: SystemParams) -> PowerAllocation:
    """Clamp the transmit power to the exact QoS cap for these gains."""
    cap = qos_power_cap(gains, params)
    p_hi = min(params.p_max, cap * (1.0 - 1e-12)) if cap > 0 else 0.0
    p = min(max(pa.p_t, 0.0), p_hi) if p_hi > 0 else 0.0
    return PowerAllocation(p_t=p, lambda_i=pa.lambda_i, lambda_j=pa.lambda_j)


def _zero_power_solution(ch: ChannelRealization, params: SystemParams,
                         scheme: str) -> Solution:
    phases = PhaseVector.zeros(ch.k)
    pa = PowerAllocation(0.0, *_fixed_split(params))
    gains = compute_gains(ch, phases, params)
    report = report_from_gains(gains, pa, params)
    return Solution(pa=pa, phases=phases, report=report,
                    trajectory=[(0, 0.0)], converged=True, feasible=False,
                    scheme=scheme)


def _reflected_sums(ch: ChannelRealization, phases) -> dict:
    """Direct term and reflected phasor sum of each of the six links."""
    theta = np.asarray(getattr(phases, "theta", phases), dtype=float)
    coeff = np.exp(1j * theta)

    def s(incident, reflect):
        return complex(np.sum(incident * coeff * reflect))

    return {
        "H_i": (ch.direct_dt_dri, s(ch.dt_to_ris, ch.ris_to_dri)),
        "H_j": (ch.direct_dt_drj, s(ch.dt_to_ris, ch.ris_to_drj)),
        "H_c": (ch.direct_dt_cu, s(ch.dt_to_ris, ch.interference_ris_to_cu())),
        "G_i": (ch.direct_uav_dri, s(ch.uav_to_ris, ch.interference_ris_to_dri())),
        "G_j": (ch.direct_uav_drj, s(ch.uav_to_ris, ch.interference_ris_to_drj())),
        "G_c": (ch.direct_uav_cu, s(ch.uav_to_ris, ch.ris_to_cu)),
    }


def _gains_at_rotation(comps: dict, rot: complex, q_c: float) -> "EffectiveGains":
    from .power_alloc import EffectiveGains

    def gain(key):
        d, s = comps[key]
        return abs(d + rot * s) ** 2

    return EffectiveGains(H_i=gain("H_i"), H_j=gain("H_j"), H_c=gain("H_c"),
                          G_i=q_c * gain("G_i"), G_j=q_c * gain("G_j"),
                          G_c=q_c * gain("G_c"))


def best_global_rotation(ch: ChannelRealization, params: SystemParams,
                         phases: PhaseVector, rate_fn, n_grid: int = 128):
    """Pick the common phase offset maximizing a full-channel rate functional.

    The RIS-only subproblem is exactly invariant under adding a constant to
    all phase shifts, so the rotation is a free tie-break within its
    solution set; choosing it on the full composite channels aligns the
    reflected sum with the direct paths.  ``rate_fn(gains)`` must return
    the figure of merit (QoS handling included).  The zero rotation is
    always a candidate, so the result never scores worse.
    """
    comps = _reflected_sums(ch, phases)
    best_c, best_val = 0.0, rate_fn(_gains_at_rotation(comps, 1.0, params.q_c))
    for c in np.linspace(0.0, 2.0 * np.pi, n_grid, endpoint=False)[1:]:
        val = rate_fn(_gains_at_rotation(comps, np.exp(1j * c), params.q_c))
        if val > best_val:
            best_c, best_val = float(c), val
    return PhaseVector(phases.theta + best_c), best_val


_PROBE_MULTIPLIERS = (1.0, 0.25, 0.0625, 0.015625, 1.0 / 256, 1.0 / 4096)


def _phases_with_backoff(ch: ChannelRealization, pa: PowerAllocation,
                         params: SystemParams, init: PhaseVector,
                         hint: float):
    """Phase stage with D2D power backoff.

    The RIS-only QoS floor drops the direct UAV link and can be unmeetable
    at the full D2D power even when the true QoS holds; in that case the
    subproblem is re-run at geometrically reduced probe powers (the chosen
    phases barely depend on the power scale).  ``hint`` remembers the
    multiplier that worked last round so converged runs pay one attempt.
    """
    start = _PROBE_MULTIPLIERS.index(hint) if hint in _PROBE_MULTIPLIERS else 0
    result = None
    for mult in _PROBE_MULTIPLIERS[start:]:
        probe = PowerAllocation(max(pa.p_t * mult, params.p_floor),
                                pa.lambda_i, pa.lambda_j)
        result = optimize_phases(ch, probe, params, init)
        if result.feasible:
            return result, mult
    return result, _PROBE_MULTIPLIERS[-1]


def maximize_sum_rate(ch: ChannelRealization, params: SystemParams) -> Solution:
    """Alternate SCA power allocation and DC passive beamforming."""
    params.validate()
    phases = PhaseVector.zeros(ch.k)
    pa = PowerAllocation(params.p_max, *_fixed_split(params))
    gains = compute_gains(ch, phases, params)
    pa = _qos_projected(pa, gains, params)
    if pa.p_t < params.p_floor:
        return _zero_power_solution(ch, params, "proposed")
    report = report_from_gains(gains, pa, params)
    best_rate = report.sum_rate
    trajectory = [(0, best_rate)]
    sandwich = math.inf
    converged = False
    rounds = 0
    hint = 1.0
    for rnd in range(1, params.ao_max_iter + 1):
        rounds = rnd
        pa_new, rep_pow = optimize_power(ch, phases, params, pa)
        candidates = [(pa_new, phases, rep_pow)]
        ph_res, hint = _phases_with_backoff(ch, pa_new, params, phases, hint)
        if ph_res.feasible:
            sandwich = min(sandwich,
                           ph_res.relaxed_objective - ph_res.extracted_objective)

        def capped_rate(g):
            pa_c = _qos_projected(pa_new, g, params)
            if pa_c.p_t < params.p_floor:
                return -math.inf
            return report_from_gains(g, pa_c, params).sum_rate

        rotated, _ = best_global_rotation(ch, params, ph_res.phases, capped_rate)
        gains_new = compute_gains(ch, rotated, params)
        pa_adj = _qos_projected(pa_new, gains_new, params)
        if pa_adj.p_t >= params.p_floor:
            candidates.append((pa_adj, rotated,
                               report_from_gains(gains_new, pa_adj, params)))
        cand = max(candidates, key=lambda c: c[2].sum_rate)
        improvement = cand[2].sum_rate - best_rate
        if improvement > 0:
            pa, phases, report = cand
            best_rate = report.sum_rate
        trajectory.append((rnd, best_rate))
        if improvement < params.tol:
            converged = True
            break
    feasible = report.qos_feasible and pa.p_t >= params.p_floor
    return Solution(pa=pa, phases=phases, report=report, trajectory=trajectory,
                    converged=converged, feasible=feasible, scheme="proposed",
                    sandwich_margin=sandwich, iterations=rounds)


def run_baseline_fixed(ch: ChannelRealization, params: SystemParams) -> Solution:
    """Fixed power budget and NOMA split; only the phases are optimized."""
    params.validate()
    pa = PowerAllocation(params.p_max, *_fixed_split(params))
    phases = PhaseVector.zeros(ch.k)
    gains = compute_gains(ch, phases, params)
    report = report_from_gains(gains, pa, params)
    best_rate = report.sum_rate if report.qos_feasible else -math.inf
    trajectory = [(0, max(best_rate, 0.0))]
    sandwich = math.inf
    converged = False
    rounds = 0
    hint = 1.0
    for rnd in range(1, params.ao_max_iter + 1):
        rounds = rnd
        ph_res, hint = _phases_with_backoff(ch, pa, params, phases, hint)
        if ph_res.feasible:
            sandwich = min(sandwich,
                           ph_res.relaxed_objective - ph_res.extracted_objective)

        def fixed_rate(g):
            rep = report_from_gains(g, pa, params)
            return rep.sum_rate if rep.qos_feasible else -math.inf

        rotated, _ = best_global_rotation(ch, params, ph_res.phases, fixed_rate)
        gains_new = compute_gains(ch, rotated, params)
        rep_new = report_from_gains(gains_new, pa, params)
        improvement = 0.0
        if rep_new.qos_feasible and rep_new.sum_rate > best_rate:
            improvement = (rep_new.sum_rate - best_rate
                           if math.isfinite(best_rate) else math.inf)
            phases, report, best_rate = rotated, rep_new, rep_new.sum_rate
        trajectory.append((rnd, max(best_rate, 0.0)))
        if improvement < params.tol:
            converged = True
            break
    if not report.qos_feasible:
        sol = _zero_power_solution(ch, params, "fixed")
        sol.converged = converged
        return sol
    return Solution(pa=pa, phases=phases, report=report, trajectory=trajectory,
                    converged=converged, feasible=True, scheme="fixed",
                    sandwich_margin=sandwich, iterations=rounds)


def golden_section_max(fun, lo: float, hi: float, tol: float = 1e-9,
                       max_iter: int = 200) -> tuple[float, float]:
    """Deterministic golden-section maximization on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if b - a <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
    x = c if fc > fd else d
    return x, max(fc, fd)


def _oma_report(gains, p_t: float, params: SystemParams) -> RateReport:
    """Slotted TDMA report: time-shared rates, no NOMA interference."""
    s2 = params.sigma2
    share = params.oma_slot_strong
    sinr_cu = gains.G_c / (p_t * gains.H_c + s2)
    sinr_i = p_t * gains.H_i / (gains.G_i + s2)
    sinr_j = p_t * gains.H_j / (gains.G_j + s2)
    rate_i = share * math.log2(1.0 + sinr_i)
    rate_j = (1.0 - share) * math.log2(1.0 + sinr_j)
    return RateReport(sinr_cu=sinr_cu, sinr_dri=sinr_i, sinr_drj=sinr_j,
                      rate_cu=math.log2(1.0 + sinr_cu), rate_dri=rate_i,
                      rate_drj=rate_j, sum_rate=rate_i + rate_j,
                      qos_feasible=sinr_cu >= params.gamma_min)


def run_baseline_oma(ch: ChannelRealization, params: SystemParams) -> Solution:
    """Slotted orthogonal scheme: golden-section power, per-user phases.

    Each receiver is served alone in its time share (equal slots by
    default) at the full optimized power; the RIS keeps one common
    configuration, chosen as the better of the two per-user phase
    optimizations under the shared QoS floor.
    """
    params.validate()
    phases = PhaseVector.zeros(ch.k)

    def best_power(gains) -> tuple[float, float]:
        cap = qos_power_cap(gains, params)
        p_hi = min(params.p_max, cap * (1.0 - 1e-12)) if cap > 0 else 0.0
        if p_hi < params.p_floor:
            return 0.0, -math.inf
        return golden_section_max(
            lambda p: _oma_report(gains, p, params).sum_rate,
            params.p_floor, p_hi)

    gains = compute_gains(ch, phases, params)
    p_t, best_rate = best_power(gains)
    trajectory = [(0, max(best_rate, 0.0))]
    rounds = 1
    p_probe = max(p_t, params.p_floor)
    for lam_i in (1.0, 0.0):
        pa_slot = PowerAllocation(p_probe, lam_i, 1.0 - lam_i)
        res, _ = _phases_with_backoff(ch, pa_slot, params, phases, 1.0)
        rotated, _ = best_global_rotation(ch, params, res.phases,
                                          lambda g: best_power(g)[1])
        gains_c = compute_gains(ch, rotated, params)
        p_c, rate_c = best_power(gains_c)
        if rate_c > best_rate:
            phases, p_t, best_rate, gains = rotated, p_c, rate_c, gains_c
    trajectory.append((1, max(best_rate, 0.0)))
    converged = True
    if not math.isfinite(best_rate):
        sol = _zero_power_solution(ch, params, "oma")
        sol.converged = converged
        return sol
    report = _oma_report(gains, p_t, params)
    share = params.oma_slot_strong
    pa = PowerAllocation(p_t, share, 1.0 - share)  # time shares
    return Solution(pa=pa, phases=phases, report=report, trajectory=trajectory,
                    converged=converged, feasible=report.qos_feasible,
                    scheme="oma", iterations=rounds)


SCHEME_FUNCTIONS = {
    "proposed": maximize_sum_rate,
    "fixed": run_baseline_fixed,
    "oma": run_baseline_oma,
}


class BaseScheme(BaseEstimator):
    """sklearn-style wrapper: configure, then ``fit`` a channel realization.

    ``fit`` accepts either a ChannelRealization or an integer seed (drawn
    with the configured geometry).  Fitted attributes: ``solution_``,
    ``power_``, ``phases_``, ``report_``.
    """

    _scheme_name = "base"

    def __init__(self, params: SystemParams | None = None,
                 geometry: Geometry | None = None):
        self.params = params
        self.geometry = geometry

    def fit(self, X, y=None):
        params = check_system_params(self.params)
        geometry = check_geometry(self.geometry)
        ch = check_channel(X, params, geometry)
        self.solution_ = SCHEME_FUNCTIONS[self._scheme_name](ch, params)
        self.power_ = self.solution_.pa
        self.phases_ = self.solution_.phases
        self.report_ = self.solution_.report
        return self

    def score(self, X=None, y=None) -> float:
        """Achieved D2D sum rate of the fitted solution (bps/Hz)."""
        if not hasattr(self, "solution_"):
            raise AttributeError("estimator is not fitted yet; call fit first")
        return self.solution_.sum_rate


class SumRateMaximizer(BaseScheme):
    """Joint power allocation and passive beamforming (the proposed scheme)."""

    _scheme_name = "proposed"


class FixedPowerScheme(BaseScheme):
    """Fixed power budget and NOMA split with optimized passive beamforming."""

    _scheme_name = "fixed"


class OmaScheme(BaseScheme):
    """Equal-slot orthogonal comparison scheme."""

    _scheme_name = "oma"
