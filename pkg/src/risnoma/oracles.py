"""Independent reference computations used to cross-check the optimizers.

Everything here is written directly from the SINR definitions with plain
loops, grids and exhaustive enumeration; none of it reuses the solver code
paths.  The suite runners at the bottom pair these references with the
package optimizers for the CLI ``oracle`` subcommand and the acceptance
tests.
"""

from __future__ import annotations

import math
import time

import numpy as np
from numba import njit

LN2 = math.log(2.0)


# --- formula transcriptions ---------------------------------------------------

def effective_gain_brute(direct, incident, reflect, theta) -> float:
    """Term-by-term composite gain in extended precision."""
    acc = np.clongdouble(direct)
    for k in range(len(theta)):
        acc += (np.clongdouble(incident[k])
                * np.exp(1j * np.longdouble(theta[k]))
                * np.clongdouble(reflect[k]))
    return float(np.abs(acc) ** 2)


def sinr_transcription(ch, pa, phases, params):
    """Step-by-step SINR evaluation straight from the definitions."""
    theta = np.asarray(getattr(phases, "theta", phases), dtype=float)
    s2 = params.sigma2
    g_cu = effective_gain_brute(ch.direct_uav_cu, ch.uav_to_ris, ch.ris_to_cu, theta)
    h_cu = effective_gain_brute(ch.direct_dt_cu, ch.dt_to_ris,
                                ch.interference_ris_to_cu(), theta)
    h_i = effective_gain_brute(ch.direct_dt_dri, ch.dt_to_ris, ch.ris_to_dri, theta)
    g_i = effective_gain_brute(ch.direct_uav_dri, ch.uav_to_ris,
                               ch.interference_ris_to_dri(), theta)
    h_j = effective_gain_brute(ch.direct_dt_drj, ch.dt_to_ris, ch.ris_to_drj, theta)
    g_j = effective_gain_brute(ch.direct_uav_drj, ch.uav_to_ris,
                               ch.interference_ris_to_drj(), theta)
    gamma_c = params.q_c * g_cu / (
        pa.p_t * (pa.lambda_i + pa.lambda_j) * h_cu + s2)
    gamma_i = pa.p_t * pa.lambda_i * h_i / (params.q_c * g_i + s2)
    noma = pa.p_t * pa.lambda_i * h_j
    gamma_j = pa.p_t * pa.lambda_j * h_j / (noma + params.q_c * g_j + s2)
    return gamma_c, gamma_i, gamma_j


def reduced_sinr_transcription(ch, pa, phases, params):
    """RIS-only SINRs evaluated elementwise, without cascade vectors."""
    theta = np.asarray(getattr(phases, "theta", phases), dtype=float)
    s2 = params.sigma2

    def ris_only(incident, reflect):
        return effective_gain_brute(0.0, incident, reflect, theta)

    g_cu = ris_only(ch.uav_to_ris, ch.ris_to_cu)
    h_cu = ris_only(ch.dt_to_ris, ch.interference_ris_to_cu())
    h_i = ris_only(ch.dt_to_ris, ch.ris_to_dri)
    g_i = ris_only(ch.uav_to_ris, ch.interference_ris_to_dri())
    h_j = ris_only(ch.dt_to_ris, ch.ris_to_drj)
    g_j = ris_only(ch.uav_to_ris, ch.interference_ris_to_drj())
    gamma_c = params.q_c * g_cu / (pa.p_t * (pa.lambda_i + pa.lambda_j) * h_cu + s2)
    gamma_i = pa.p_t * pa.lambda_i * h_i / (params.q_c * g_i + s2)
    gamma_j = pa.p_t * pa.lambda_j * h_j / (
        pa.p_t * pa.lambda_i * h_j + params.q_c * g_j + s2)
    return gamma_c, gamma_i, gamma_j


def lagrangian_reference(gains, sca, duals, p_t, lambda_i, params) -> float:
    """Direct transcription of the dualized surrogate objective."""
    lambda_j = 1.0 - lambda_i
    s2 = params.sigma2
    gamma_i = p_t * lambda_i * gains.H_i / (gains.G_i + s2)
    gamma_j = p_t * lambda_j * gains.H_j / (
        p_t * lambda_i * gains.H_j + gains.G_j + s2)
    total = 0.0
    if sca.alpha_i > 0.0:
        if gamma_i <= 0.0:
            return -math.inf
        total += sca.alpha_i * math.log2(gamma_i) + sca.beta_i
    else:
        total += sca.beta_i
    if sca.alpha_j > 0.0:
        if gamma_j <= 0.0:
            return -math.inf
        total += sca.alpha_j * math.log2(gamma_j) + sca.beta_j
    else:
        total += sca.beta_j
    total += duals.eta1 * (gains.G_c - params.gamma_min * (
        p_t * (lambda_i + lambda_j) * gains.H_c + s2))
    total += duals.eta2 * (params.p_max - p_t)
    total += duals.eta3 * (1.0 - lambda_i)
    return total


# --- grid searches ------------------------------------------------------------

def power_grid_oracle(gains, params, n: int = 200):
    """Best feasible point of the (p_t, lambda_i) grid, lambda_j complement.

    Returns (sum_rate, p_t, lambda_i); sum_rate is -inf if no grid point is
    feasible.
    """
    s2 = params.sigma2
    p = np.linspace(0.0, params.p_max, n)
    lam = np.linspace(0.0, 1.0, n)
    margin = gains.G_c / params.gamma_min - s2
    feas = (p * gains.H_c) <= margin
    if not feas.any():
        return -math.inf, 0.0, 0.0
    pf = p[feas][:, None]
    gi = pf * lam[None, :] * gains.H_i / (gains.G_i + s2)
    gj = (pf * (1.0 - lam[None, :]) * gains.H_j
          / (pf * lam[None, :] * gains.H_j + gains.G_j + s2))
    rate = np.log2(1.0 + gi) + np.log2(1.0 + gj)
    flat = int(np.argmax(rate))
    ip, il = np.unravel_index(flat, rate.shape)
    return float(rate[ip, il]), float(pf[ip, 0]), float(lam[il])


def grid_argmax_p(gains, sca, duals, lambda_i, params, n: int = 10000):
    p = np.linspace(params.p_floor, params.p_max, n)
    vals = np.array([lagrangian_reference(gains, sca, duals, pi, lambda_i, params)
                     for pi in p])
    idx = int(np.argmax(vals))
    return float(p[idx]), float(vals[idx])


def grid_argmax_lambda(gains, sca, duals, p_t, params, n: int = 10000):
    lam = np.linspace(params.lambda_floor, 1.0 - params.lambda_floor, n)
    vals = np.array([lagrangian_reference(gains, sca, duals, p_t, li, params)
                     for li in lam])
    idx = int(np.argmax(vals))
    return float(lam[idx]), float(vals[idx])


def oma_power_grid(gains, params, n: int = 10000):
    """Best equal-slot TDMA rate over a 1-D power grid under the QoS cap."""
    s2 = params.sigma2
    p = np.linspace(params.p_floor, params.p_max, n)
    margin = gains.G_c / params.gamma_min - s2
    feas = (p * gains.H_c) <= margin
    if not feas.any():
        return -math.inf, 0.0
    pf = p[feas]
    rate = (0.5 * np.log2(1.0 + pf * gains.H_i / (gains.G_i + s2))
            + 0.5 * np.log2(1.0 + pf * gains.H_j / (gains.G_j + s2)))
    idx = int(np.argmax(rate))
    return float(rate[idx]), float(pf[idx])


# --- exhaustive phase enumeration ----------------------------------------------

def _stacked_links(ch):
    directs = np.array([ch.direct_dt_dri, ch.direct_dt_drj, ch.direct_dt_cu,
                        ch.direct_uav_dri, ch.direct_uav_drj, ch.direct_uav_cu],
                       dtype=complex)
    cascades = np.stack([
        ch.dt_to_ris * ch.ris_to_dri,
        ch.dt_to_ris * ch.ris_to_drj,
        ch.dt_to_ris * ch.interference_ris_to_cu(),
        ch.uav_to_ris * ch.interference_ris_to_dri(),
        ch.uav_to_ris * ch.interference_ris_to_drj(),
        ch.uav_to_ris * ch.ris_to_cu,
    ])
    return directs, cascades


def _phase_combo_coeffs(k: int, n_levels: int) -> np.ndarray:
    combos = n_levels ** k
    digits = (np.arange(combos)[:, None] // n_levels ** np.arange(k)) % n_levels
    return np.exp(1j * 2.0 * np.pi * digits / n_levels)


@njit(cache=True)
def _joint_kernel(directs, cascades, n_levels, p_grid, lam_grid, q_c, s2, gmin):
    k = cascades.shape[1]
    n_comb = n_levels ** k
    table = np.exp(1j * 2.0 * np.pi * np.arange(n_levels) / n_levels)
    best_prod = -1.0
    best_p = 0.0
    best_lam = 0.0
    amp = np.empty(6, dtype=np.complex128)
    for idx in range(n_comb):
        rem = idx
        for link in range(6):
            amp[link] = directs[link]
        for kk in range(k):
            ph = table[rem % n_levels]
            rem //= n_levels
            for link in range(6):
                amp[link] += cascades[link, kk] * ph
        h_i = abs(amp[0]) ** 2
        h_j = abs(amp[1]) ** 2
        h_c = abs(amp[2]) ** 2
        g_i = q_c * abs(amp[3]) ** 2
        g_j = q_c * abs(amp[4]) ** 2
        g_c = q_c * abs(amp[5]) ** 2
        margin = g_c / gmin - s2
        if margin < 0.0:
            continue
        cap = margin / h_c if h_c > 0.0 else 1e300
        s_i = g_i + s2
        s_j = g_j + s2
        for ip in range(p_grid.shape[0]):
            p = p_grid[ip]
            if p > cap:
                break
            p_hi = p * h_i
            p_hj = p * h_j
            for il in range(lam_grid.shape[0]):
                lam = lam_grid[il]
                gamma_i = p_hi * lam / s_i
                gamma_j = p_hj * (1.0 - lam) / (p_hj * lam + s_j)
                prod = (1.0 + gamma_i) * (1.0 + gamma_j)
                if prod > best_prod:
                    best_prod = prod
                    best_p = p
                    best_lam = lam
    return best_prod, best_p, best_lam


def joint_bruteforce(ch, params, n_power: int = 200, n_lambda: int = 200,
                     n_levels: int = 16):
    """Exhaustive discrete phases x feasibility-filtered power grid.

    Returns (sum_rate, p_t, lambda_i); -inf rate when nothing is feasible.
    """
    directs, cascades = _stacked_links(ch)
    p_grid = np.linspace(0.0, params.p_max, n_power)
    lam_grid = np.linspace(0.0, 1.0, n_lambda)
    prod, p, lam = _joint_kernel(directs, np.ascontiguousarray(cascades),
                                 n_levels, p_grid, lam_grid, params.q_c,
                                 params.sigma2, params.gamma_min)
    if prod < 0.0:
        return -math.inf, 0.0, 0.0
    return math.log2(prod), p, lam


def discrete_phase_best_reduced(ch, pa, params, n_levels: int = 16):
    """Exhaustive discrete-phase search of the RIS-only objective.

    Scores log2(1+gamma_i) + log2(1+gamma_j) on the reduced SINRs under the
    reduced QoS floor; returns (best_rate, best_theta) with -inf when no
    combination is feasible.
    """
    coeffs = _phase_combo_coeffs(ch.k, n_levels)
    s2 = params.sigma2
    amp_h_i = coeffs @ (ch.dt_to_ris * ch.ris_to_dri)
    amp_h_j = coeffs @ (ch.dt_to_ris * ch.ris_to_drj)
    amp_h_c = coeffs @ (ch.dt_to_ris * ch.interference_ris_to_cu())
    amp_g_i = coeffs @ (ch.uav_to_ris * ch.interference_ris_to_dri())
    amp_g_j = coeffs @ (ch.uav_to_ris * ch.interference_ris_to_drj())
    amp_g_c = coeffs @ (ch.uav_to_ris * ch.ris_to_cu)
    pw = lambda a: np.abs(a) ** 2
    lam_sum = pa.lambda_i + pa.lambda_j
    qos_ok = params.q_c * pw(amp_g_c) >= params.gamma_min * (
        pa.p_t * lam_sum * pw(amp_h_c) + s2)
    if not qos_ok.any():
        return -math.inf, None
    gamma_i = pa.p_t * pa.lambda_i * pw(amp_h_i) / (params.q_c * pw(amp_g_i) + s2)
    gamma_j = pa.p_t * pa.lambda_j * pw(amp_h_j) / (
        pa.p_t * pa.lambda_i * pw(amp_h_j) + params.q_c * pw(amp_g_j) + s2)
    rate = np.log2(1.0 + gamma_i) + np.log2(1.0 + gamma_j)
    rate[~qos_ok] = -np.inf
    idx = int(np.argmax(rate))
    theta = np.angle(coeffs[idx]) % (2.0 * np.pi)
    return float(rate[idx]), theta


def phase_sweep_reduced_1d(ch, pa, params, n: int = 10000):
    """1-D sweep of the RIS-only objective for K = 1."""
    assert ch.k == 1
    s2 = params.sigma2
    theta = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    best = -math.inf
    for t in theta:
        _, g_i, g_j = reduced_sinr_transcription(
            ch, pa, np.array([t]), params)
        best = max(best, math.log2(1.0 + g_i) + math.log2(1.0 + g_j))
    return best


# --- statistics ----------------------------------------------------------------

def bootstrap_mean_ci(samples, n_boot: int = 2000, seed: int = 0,
                      level: float = 0.95):
    """Percentile bootstrap CI of the mean of ``samples``."""
    x = np.asarray(samples, dtype=float)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(n_boot, x.size))
    means = x[idx].mean(axis=1)
    lo = float(np.quantile(means, (1.0 - level) / 2.0))
    hi = float(np.quantile(means, 1.0 - (1.0 - level) / 2.0))
    return lo, hi


# --- suite runners (shared by the CLI and the acceptance tests) -----------------

def run_power_suite(n_instances: int = 50, k: int = 6, seed0: int = 1000,
                    verbose: bool = False):
    """optimize_power against the 200x200 grid; returns per-instance rows."""
    from .channel import Geometry, generate_channels
    from .power_alloc import compute_gains, optimize_power
    from .rates import PowerAllocation, SystemParams

    params = SystemParams(k=k)
    geometry = Geometry()
    rows = []
    for i in range(n_instances):
        seed = seed0 + i
        ch = generate_channels(params, geometry, seed)
        rng = np.random.default_rng(seed + 77)
        phases = rng.uniform(0.0, 2.0 * np.pi, size=k)
        t0 = time.perf_counter()
        pa, report = optimize_power(ch, phases, params,
                                    PowerAllocation(params.p_max, 0.3, 0.7))
        elapsed = time.perf_counter() - t0
        gains = compute_gains(ch, phases, params)
        oracle_rate, _, _ = power_grid_oracle(gains, params)
        rows.append({"seed": seed, "solver": report.sum_rate,
                     "oracle": oracle_rate, "seconds": elapsed,
                     "feasible": report.qos_feasible})
        if verbose:
            print(f"power seed={seed} solver={report.sum_rate:.6f} "
                  f"oracle={oracle_rate:.6f} t={elapsed:.3f}s")
    return rows


def run_joint_suite(n_instances: int = 20, k: int = 4, seed0: int = 2000,
                    verbose: bool = False):
    """maximize_sum_rate against the joint discrete brute force."""
    from .alternating import maximize_sum_rate
    from .channel import Geometry, generate_channels
    from .rates import SystemParams

    params = SystemParams(k=k)
    geometry = Geometry()
    rows = []
    for i in range(n_instances):
        seed = seed0 + i
        ch = generate_channels(params, geometry, seed)
        t0 = time.perf_counter()
        sol = maximize_sum_rate(ch, params)
        t_solver = time.perf_counter() - t0
        t0 = time.perf_counter()
        oracle_rate, _, _ = joint_bruteforce(ch, params)
        t_oracle = time.perf_counter() - t0
        rows.append({"seed": seed, "solver": sol.sum_rate,
                     "oracle": oracle_rate, "solver_seconds": t_solver,
                     "oracle_seconds": t_oracle})
        if verbose:
            print(f"joint seed={seed} solver={sol.sum_rate:.6f} "
                  f"oracle={oracle_rate:.6f} t={t_solver:.2f}+{t_oracle:.2f}s")
    return rows


def run_sandwich_suite(n_instances: int = 20, k: int = 4, seed0: int = 3000,
                       verbose: bool = False):
    """Extraction vs relaxed objective vs exhaustive discrete phases.

    The RIS-only QoS floor needs a small enough D2D power to be meetable at
    desk-scale K, so each instance backs off geometrically (as the driver
    does) and records the first feasible solve.
    """
    from .beamforming import optimize_phases, PhaseVector
    from .channel import Geometry, generate_channels
    from .rates import PowerAllocation, SystemParams

    params = SystemParams(k=k)
    geometry = Geometry()
    rows = []
    for i in range(n_instances):
        seed = seed0 + i
        ch = generate_channels(params, geometry, seed)
        res, pa = None, None
        for mult in (1.0, 0.25, 1.0 / 16, 1.0 / 64, 1.0 / 256, 1.0 / 1024,
                     1.0 / 16384, params.p_floor_rel):
            pa = PowerAllocation(max(params.p_max * mult, params.p_floor),
                                 0.3, 0.7)
            res = optimize_phases(ch, pa, params, PhaseVector.zeros(k))
            if res.feasible:
                break
        oracle_rate, _ = discrete_phase_best_reduced(ch, pa, params)
        rows.append({"seed": seed, "extracted": res.extracted_objective,
                     "relaxed": res.relaxed_objective, "oracle": oracle_rate,
                     "feasible": res.feasible})
        if verbose:
            print(f"sandwich seed={seed} extracted={res.extracted_objective:.6f}"
                  f" relaxed={res.relaxed_objective:.6f} oracle={oracle_rate:.6f}")
    return rows
