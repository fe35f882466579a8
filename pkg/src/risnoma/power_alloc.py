"""Power-allocation subproblem for fixed RIS phases.

Outer SCA loop refreshes the tangent surrogate, an inner projected
subgradient dual loop alternates the closed-form power-budget root
(quadratic), the closed-form strong-user fraction (cubic) and the weak
user's complement.  Iterates are safeguarded: only candidates that improve
the true sum rate are accepted, and the QoS constraint, which is monotone
in the transmit power, is enforced exactly by a power cap on top of the
dual handling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, effective_gain
from .rates import (LN2, PowerAllocation, RateReport, ScaCoefficients,
                    SystemParams, report_from_gains, sca_coefficients,
                    surrogate_rate)


@dataclass(frozen=True)
class EffectiveGains:
    """Squared composite channel magnitudes at fixed phases.

    The G_* fields already include the UAV transmit power factor; the H_*
    fields are bare squared magnitudes.
    """

    H_i: float
    H_j: float
    H_c: float
    G_i: float
    G_j: float
    G_c: float


@dataclass(frozen=True)
class DualVariables:
    """Nonnegative multipliers for QoS, power budget and fraction sum."""

    eta1: float = 1.0
    eta2: float = 1.0
    eta3: float = 1.0

    def validate(self) -> None:
        if min(self.eta1, self.eta2, self.eta3) < 0:
            raise ValueError("dual variables must be nonnegative")
        if not all(map(math.isfinite, (self.eta1, self.eta2, self.eta3))):
            raise ValueError("dual variables must be finite")


def compute_gains(ch: ChannelRealization, phases, params: SystemParams) -> EffectiveGains:
    """Evaluate all six effective gains at the given phases."""
    theta = np.asarray(getattr(phases, "theta", phases), dtype=float)
    q_c = params.q_c
    return EffectiveGains(
        H_i=effective_gain(ch.direct_dt_dri, ch.dt_to_ris, ch.ris_to_dri, theta),
        H_j=effective_gain(ch.direct_dt_drj, ch.dt_to_ris, ch.ris_to_drj, theta),
        H_c=effective_gain(ch.direct_dt_cu, ch.dt_to_ris,
                           ch.interference_ris_to_cu(), theta),
        G_i=q_c * effective_gain(ch.direct_uav_dri, ch.uav_to_ris,
                                 ch.interference_ris_to_dri(), theta),
        G_j=q_c * effective_gain(ch.direct_uav_drj, ch.uav_to_ris,
                                 ch.interference_ris_to_drj(), theta),
        G_c=q_c * effective_gain(ch.direct_uav_cu, ch.uav_to_ris,
                                 ch.ris_to_cu, theta))


def qos_power_cap(gains: EffectiveGains, params: SystemParams) -> float:
    """Largest total D2D power satisfying the cellular SINR floor.

    The floor is monotone in p_t, so the cap is exact: may be +inf (no
    interference path) or negative (infeasible at any positive power).
    """
    margin = gains.G_c / params.gamma_min - params.sigma2
    if gains.H_c <= 0.0:
        return math.inf if margin >= 0.0 else -math.inf
    return margin / gains.H_c


def surrogate_lagrangian(gains: EffectiveGains, sca: ScaCoefficients,
                         duals: DualVariables, p_t: float, lambda_i: float,
                         params: SystemParams) -> float:
    """Surrogate-objective Lagrangian at (p_t, lambda_i) with lambda_j = 1 - lambda_i."""
    lambda_j = 1.0 - lambda_i
    s2 = params.sigma2
    gamma_i = p_t * lambda_i * gains.H_i / (gains.G_i + s2)
    den_j = p_t * lambda_i * gains.H_j + gains.G_j + s2
    gamma_j = p_t * lambda_j * gains.H_j / den_j
    if (not sca.degenerate_i and gamma_i <= 0.0) or \
       (not sca.degenerate_j and gamma_j <= 0.0):
        return -math.inf
    value = surrogate_rate(sca.alpha_i, sca.beta_i, gamma_i)
    value += surrogate_rate(sca.alpha_j, sca.beta_j, gamma_j)
    lam_sum = lambda_i + lambda_j
    value += duals.eta1 * (gains.G_c - params.gamma_min
                           * (p_t * lam_sum * gains.H_c + s2))
    value += duals.eta2 * (params.p_max - p_t)
    value += duals.eta3 * (1.0 - lambda_i)
    return value


def quadratic_roots(a: float, b: float, c: float) -> list[float]:
    """Real roots of a x^2 + b x + c, degenerating gracefully to linear."""
    scale = max(abs(a), abs(b), abs(c))
    if scale == 0.0:
        return []
    if abs(a) <= 1e-14 * scale:
        if abs(b) <= 1e-14 * scale:
            return []
        return [-c / b]
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    # numerically stable split
    q = -0.5 * (b + math.copysign(sq, b)) if b != 0.0 else 0.5 * sq
    roots = []
    if q != 0.0:
        roots = [q / a, c / q]
    else:
        roots = [0.0, -b / a]
    return roots


def cubic_real_roots(a3: float, a2: float, a1: float, a0: float) -> list[float]:
    """Real roots of the cubic via the companion matrix, degenerate-safe."""
    coeffs = [a3, a2, a1, a0]
    scale = max(abs(c) for c in coeffs)
    if scale == 0.0:
        return []
    while coeffs and abs(coeffs[0]) <= 1e-14 * scale:
        coeffs = coeffs[1:]
    if len(coeffs) <= 1:
        return []
    if len(coeffs) == 2:
        return [-coeffs[1] / coeffs[0]]
    roots = np.roots(coeffs)
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-8 * (1.0 + abs(r.real)):
            out.append(float(r.real))
    return out


def p_t_quadratic_coeffs(gains: EffectiveGains, sca: ScaCoefficients,
                         duals: DualVariables, lambda_i: float,
                         params: SystemParams) -> tuple[float, float, float]:
    """Stationarity coefficients (A, B, C) of the power-budget quadratic.

    The consistent derivation carries an ln2 factor on the dual terms from
    the base-2 surrogate; ``duals_in_nats`` drops it (equivalent to
    rescaled duals).
    """
    lam_sum = 1.0  # lambda_j = 1 - lambda_i by the complement rule
    lt = 1.0 if params.duals_in_nats else LN2
    s = gains.G_j + params.sigma2
    e = duals.eta2 + duals.eta1 * params.gamma_min * gains.H_c * lam_sum
    a = lt * e * lambda_i * gains.H_j
    b = -sca.alpha_i * lambda_i * gains.H_j + lt * e * s
    c = -(sca.alpha_i + sca.alpha_j) * s
    return a, b, c


def solve_p_t(gains: EffectiveGains, sca: ScaCoefficients, duals: DualVariables,
              lambda_i: float, params: SystemParams) -> float:
    """Closed-form power-budget update clamped to [p_floor, p_max].

    Both real stationary roots (if any) are compared against the interval
    endpoints through the surrogate Lagrangian and the maximizer wins.
    """
    a, b, c = p_t_quadratic_coeffs(gains, sca, duals, lambda_i, params)
    lo, hi = params.p_floor, params.p_max
    candidates = {lo, hi}
    for r in quadratic_roots(a, b, c):
        if math.isfinite(r) and r > 0.0:
            candidates.add(min(max(r, lo), hi))
    return max(candidates,
               key=lambda p: surrogate_lagrangian(gains, sca, duals, p,
                                                  lambda_i, params))


def lambda_cubic_coeffs(gains: EffectiveGains, sca: ScaCoefficients,
                        duals: DualVariables, p_t: float,
                        params: SystemParams) -> tuple[float, float, float, float]:
    """Stationarity coefficients of the strong-user fraction cubic."""
    lt = 1.0 if params.duals_in_nats else LN2
    s = gains.G_j + params.sigma2
    ph = p_t * gains.H_j
    e3 = lt * duals.eta3
    a3 = e3 * ph
    a2 = -sca.alpha_i * ph + e3 * (s - ph)
    a1 = (sca.alpha_i - sca.alpha_j) * ph - (sca.alpha_i + sca.alpha_j + e3) * s
    a0 = sca.alpha_i * s
    return a3, a2, a1, a0


def select_in_interval(roots: list[float], lo: float, hi: float,
                       objective) -> float:
    """Best root inside [lo, hi] by objective value, endpoints as fallback."""
    interior = [r for r in roots if lo <= r <= hi]
    pool = interior if interior else [lo, hi]
    return max(pool, key=objective)


def solve_lambda_i(gains: EffectiveGains, sca: ScaCoefficients,
                   duals: DualVariables, p_t: float, params: SystemParams,
                   current: float | None = None) -> float:
    """Closed-form strong-user fraction update on [lambda_floor, 1 - lambda_floor]."""
    a3, a2, a1, a0 = lambda_cubic_coeffs(gains, sca, duals, p_t, params)
    lo = params.lambda_floor
    hi = 1.0 - params.lambda_floor
    if max(abs(a3), abs(a2), abs(a1), abs(a0)) == 0.0:
        # stagnant polynomial: keep the current iterate
        return min(max(current if current is not None else 0.5, lo), hi)
    roots = cubic_real_roots(a3, a2, a1, a0)
    return select_in_interval(
        roots, lo, hi,
        lambda lam: surrogate_lagrangian(gains, sca, duals, p_t, lam, params))


def update_duals(duals: DualVariables, gains: EffectiveGains,
                 pa: PowerAllocation, params: SystemParams, iteration: int,
                 step: float | None = None) -> DualVariables:
    """Projected subgradient step with diminishing rate step/sqrt(iteration).

    Slacks follow the Lagrangian terms: positive slack relaxes the
    multiplier, a violated constraint grows it.
    """
    if iteration < 1:
        raise ValueError("iteration must be >= 1")
    s0 = params.dual_step if step is None else step
    s_t = s0 / math.sqrt(iteration)
    lam_sum = pa.lambda_i + pa.lambda_j
    g1 = gains.G_c - params.gamma_min * (pa.p_t * lam_sum * gains.H_c
                                         + params.sigma2)
    g2 = params.p_max - pa.p_t * lam_sum
    g3 = 1.0 - pa.lambda_i
    return DualVariables(eta1=max(0.0, duals.eta1 - s_t * g1),
                         eta2=max(0.0, duals.eta2 - s_t * g2),
                         eta3=max(0.0, duals.eta3 - s_t * g3))


def _clamped_allocation(p_t: float, lambda_i: float,
                        params: SystemParams, p_hi: float) -> PowerAllocation:
    lo = params.lambda_floor
    lam = min(max(lambda_i, lo), 1.0 - lo)
    p = min(max(p_t, params.p_floor), p_hi)
    return PowerAllocation(p_t=p, lambda_i=lam, lambda_j=1.0 - lam)


def optimize_power_gains(gains: EffectiveGains, params: SystemParams,
                         init: PowerAllocation) -> tuple[PowerAllocation, RateReport]:
    """SCA power allocation against precomputed effective gains."""
    cap = qos_power_cap(gains, params)
    p_hi = min(params.p_max, cap * (1.0 - 1e-12) if cap > 0 else cap)
    if not p_hi >= params.p_floor:
        # QoS cannot be met at any usable power: minimal-interference point.
        pa = _clamped_allocation(params.p_floor, init.lambda_i, params,
                                 params.p_floor)
        return pa, report_from_gains(gains, pa, params)

    def rate_of(pa: PowerAllocation) -> float:
        return report_from_gains(gains, pa, params).sum_rate

    lo = params.lambda_floor
    seeds = [
        _clamped_allocation(init.p_t, init.lambda_i, params, p_hi),
        _clamped_allocation(p_hi, init.lambda_i, params, p_hi),
        _clamped_allocation(p_hi, lo, params, p_hi),
        _clamped_allocation(p_hi, 1.0 - lo, params, p_hi),
    ]
    pa_best = max(seeds, key=rate_of)
    r_best = rate_of(pa_best)

    duals = DualVariables()
    step = params.dual_step
    pa_cur = pa_best
    for _ in range(params.sca_max_iter):
        sca = sca_coefficients(report_from_gains(gains, pa_cur, params))
        p, lam = pa_cur.p_t, pa_cur.lambda_i
        for t in range(1, params.dual_max_iter + 1):
            p_new = min(solve_p_t(gains, sca, duals, lam, params), p_hi)
            lam_new = solve_lambda_i(gains, sca, duals, p_new, params,
                                     current=lam)
            pa_t = PowerAllocation(p_t=p_new, lambda_i=lam_new,
                                   lambda_j=1.0 - lam_new)
            duals = update_duals(duals, gains, pa_t, params, t, step=step)
            moved = abs(p_new - p) > 1e-12 * (1.0 + p) or abs(lam_new - lam) > 1e-12
            p, lam = p_new, lam_new
            if not moved:
                break
        cand = _clamped_allocation(p, lam, params, p_hi)
        r_cand = rate_of(cand)
        if r_cand > r_best:
            gain = r_cand - r_best
            pa_best, r_best = cand, r_cand
            pa_cur = cand
            if gain < params.tol:
                break
        else:
            step *= 0.5
            pa_cur = pa_best
            if step < 1e-6 * params.dual_step:
                break
    return pa_best, report_from_gains(gains, pa_best, params)


def optimize_power(ch: ChannelRealization, phases, params: SystemParams,
                   init: PowerAllocation) -> tuple[PowerAllocation, RateReport]:
    """Solve the power subproblem at fixed phases; see optimize_power_gains."""
    params.validate()
    init.validate(params.p_max)
    gains = compute_gains(ch, phases, params)
    return optimize_power_gains(gains, params, init)
