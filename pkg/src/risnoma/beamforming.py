"""Passive-beamforming subproblem at fixed power allocation.

Direct links drop out of this stage: the objective and the QoS floor are
written on the transmitter-RIS-receiver cascades only, lifted to a PSD
matrix with unit diagonal and a bordered-block surrogate for rank one.
The difference-of-concave objective is driven by successive trace-linear
models solved with the splitting SDP solver; candidates are accepted only
when the true lifted objective improves, and a rank-one phase vector is
recovered at the end by eigenvector plus Gaussian randomization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelRealization
from .rates import LN2, PowerAllocation, SystemParams
from . import sdp


@dataclass(frozen=True, eq=False)
class PhaseVector:
    """Per-element phase shifts in radians, wrapped to [0, 2 pi)."""

    theta: np.ndarray

    def __post_init__(self):
        wrapped = np.mod(np.asarray(self.theta, dtype=float), 2.0 * np.pi)
        object.__setattr__(self, "theta", wrapped)

    @classmethod
    def zeros(cls, k: int) -> "PhaseVector":
        return cls(np.zeros(k))

    @property
    def k(self) -> int:
        return self.theta.shape[0]

    @property
    def coefficients(self) -> np.ndarray:
        """Reflection coefficients exp(j theta) applied to impinging signals."""
        return np.exp(1j * self.theta)

    def lifted_vector(self) -> np.ndarray:
        """The conjugate arrangement used by the lifted quadratic forms."""
        return np.exp(-1j * self.theta)


@dataclass(frozen=True, eq=False)
class CascadedVectors:
    """Hadamard products of the two hops of every reflected path."""

    g_bar_c: np.ndarray    # UAV -> RIS -> CU (QoS signal)
    h_bar_i: np.ndarray    # DT -> RIS -> DR_i (signal)
    h_bar_j: np.ndarray    # DT -> RIS -> DR_j (signal)
    h_prime_j: np.ndarray  # DT -> RIS -> DR_j (NOMA interference)
    g_prime_i: np.ndarray  # UAV -> RIS -> DR_i (cellular interference)
    g_prime_j: np.ndarray  # UAV -> RIS -> DR_j (cellular interference)
    h_prime_c: np.ndarray  # DT -> RIS -> CU (interference at CU)

    @property
    def k(self) -> int:
        return self.g_bar_c.shape[0]


@dataclass(frozen=True, eq=False)
class LiftedMatrices:
    """Rank-one outer products scaled by the active powers."""

    H_i_mat: np.ndarray
    H_j_mat: np.ndarray
    H_hat_j: np.ndarray
    G_hat_j: np.ndarray
    G_c_mat: np.ndarray
    H_hat_c: np.ndarray
    G_hat_i: np.ndarray


@dataclass(eq=False)
class BeamformingMatrix:
    """Lifted PSD phase matrix plus the bordered auxiliary column."""

    psi_mat: np.ndarray
    aux_vector: np.ndarray

    def validate(self, tol: float = 1e-6) -> None:
        k = self.psi_mat.shape[0]
        sdp.check_hermitian(self.psi_mat, "psi_mat", tol=1e-8)
        if np.abs(np.diagonal(self.psi_mat).real - 1.0).max() > 10 * tol:
            raise ValueError("unit diagonal violated")
        block = np.zeros((k + 1, k + 1), dtype=complex)
        block[:k, :k] = self.psi_mat
        block[:k, k] = self.aux_vector
        block[k, :k] = self.aux_vector.conj()
        block[k, k] = 1.0
        w = np.linalg.eigvalsh(sdp._embed_real(block))
        if w.min() < -10 * tol * max(1.0, w.max()):
            raise ValueError("bordered block is not PSD within tolerance")


@dataclass(frozen=True)
class ExtractionResult:
    phases: PhaseVector
    feasible: bool
    objective: float
    qos_margin: float


@dataclass(frozen=True)
class PhaseOptResult:
    phases: PhaseVector
    reduced_sum_rate: float
    feasible: bool
    relaxed_objective: float
    extracted_objective: float
    iterations: int
    accepted_objectives: tuple[float, ...]
    sdp_converged: bool


def build_cascades(ch: ChannelRealization) -> CascadedVectors:
    """Elementwise two-hop products for all seven reflected paths."""
    return CascadedVectors(
        g_bar_c=ch.uav_to_ris * ch.ris_to_cu,
        h_bar_i=ch.dt_to_ris * ch.ris_to_dri,
        h_bar_j=ch.dt_to_ris * ch.ris_to_drj,
        h_prime_j=ch.dt_to_ris * ch.ris_to_drj,
        g_prime_i=ch.uav_to_ris * ch.interference_ris_to_dri(),
        g_prime_j=ch.uav_to_ris * ch.interference_ris_to_drj(),
        h_prime_c=ch.dt_to_ris * ch.interference_ris_to_cu())


def _cascade_matrix(cv: CascadedVectors) -> np.ndarray:
    return np.stack([cv.g_bar_c, cv.h_bar_i, cv.h_bar_j, cv.h_prime_j,
                     cv.g_prime_i, cv.g_prime_j, cv.h_prime_c], axis=1)


def _reduced_from_powers(pw, pa: PowerAllocation, params: SystemParams):
    """(gamma_c, gamma_i, gamma_j) from the seven cascade powers."""
    s2 = params.sigma2
    lam_sum = pa.lambda_i + pa.lambda_j
    g_c = params.q_c * pw[0] / (pa.p_t * lam_sum * pw[6] + s2)
    g_i = pa.p_t * pa.lambda_i * pw[1] / (params.q_c * pw[4] + s2)
    g_j = pa.p_t * pa.lambda_j * pw[2] / (pa.p_t * pa.lambda_i * pw[3]
                                          + params.q_c * pw[5] + s2)
    return g_c, g_i, g_j


def reduced_sinrs(cv: CascadedVectors, pa: PowerAllocation, phases,
                  params: SystemParams) -> tuple[float, float, float]:
    """RIS-only SINRs of (CU, DR_i, DR_j) at the given phases."""
    theta = np.asarray(getattr(phases, "theta", phases), dtype=float)
    if theta.shape[0] != cv.k:
        raise ValueError("phase vector length mismatch")
    coeff = np.exp(1j * theta)
    amps = coeff @ _cascade_matrix(cv)
    pw = np.abs(amps) ** 2
    return _reduced_from_powers(pw, pa, params)


def reduced_sum_rate(cv: CascadedVectors, pa: PowerAllocation, phases,
                     params: SystemParams) -> float:
    _, g_i, g_j = reduced_sinrs(cv, pa, phases, params)
    return math.log2(1.0 + g_i) + math.log2(1.0 + g_j)


def build_lifted(cv: CascadedVectors, pa: PowerAllocation,
                 params: SystemParams) -> LiftedMatrices:
    lam_sum = pa.lambda_i + pa.lambda_j

    def outer(v):
        return np.outer(v, v.conj())

    return LiftedMatrices(
        H_i_mat=pa.p_t * pa.lambda_i * outer(cv.h_bar_i),
        H_j_mat=pa.p_t * pa.lambda_j * outer(cv.h_bar_j),
        H_hat_j=pa.p_t * pa.lambda_i * outer(cv.h_prime_j),
        G_hat_j=params.q_c * outer(cv.g_prime_j),
        G_c_mat=params.q_c * outer(cv.g_bar_c),
        H_hat_c=pa.p_t * lam_sum * outer(cv.h_prime_c),
        G_hat_i=params.q_c * outer(cv.g_prime_i))


def _tr(a: np.ndarray, b: np.ndarray) -> float:
    # Tr(a b) for Hermitian a, b
    return float(np.vdot(a, b).real)


def dc_objective(lm: LiftedMatrices, psi_mat: np.ndarray, sigma2: float) -> float:
    """True lifted objective: both rates as differences of concave logs."""
    t_i_den = _tr(lm.G_hat_i, psi_mat) + sigma2
    t_i_num = t_i_den + _tr(lm.H_i_mat, psi_mat)
    t_j_den = _tr(lm.H_hat_j, psi_mat) + _tr(lm.G_hat_j, psi_mat) + sigma2
    t_j_num = t_j_den + _tr(lm.H_j_mat, psi_mat)
    assert min(t_i_den, t_j_den) > 0.0, "nonpositive log argument"
    return (math.log2(t_i_num) - math.log2(t_i_den)
            + math.log2(t_j_num) - math.log2(t_j_den))


def dc_gradient(lm: LiftedMatrices, psi_mat: np.ndarray,
                sigma2: float) -> np.ndarray:
    """Gradient of the true lifted objective at psi_mat (Hermitian)."""
    t_i_den = _tr(lm.G_hat_i, psi_mat) + sigma2
    t_i_num = t_i_den + _tr(lm.H_i_mat, psi_mat)
    m_j_den = lm.H_hat_j + lm.G_hat_j
    t_j_den = _tr(m_j_den, psi_mat) + sigma2
    t_j_num = t_j_den + _tr(lm.H_j_mat, psi_mat)
    assert min(t_i_den, t_j_den) > 0.0, "nonpositive expansion point"
    grad = (lm.G_hat_i + lm.H_i_mat) / (t_i_num * LN2)
    grad = grad - lm.G_hat_i / (t_i_den * LN2)
    grad = grad + (m_j_den + lm.H_j_mat) / (t_j_num * LN2)
    grad = grad - m_j_den / (t_j_den * LN2)
    return grad


def linearized_objective(lm: LiftedMatrices, psi0: np.ndarray,
                         psi: np.ndarray, sigma2: float) -> float:
    """First-order model of the lifted objective around psi0."""
    grad = dc_gradient(lm, psi0, sigma2)
    return dc_objective(lm, psi0, sigma2) + _tr(grad, psi - psi0)


def qos_trace_constraint(lm: LiftedMatrices,
                         params: SystemParams) -> tuple[np.ndarray, float]:
    """Trace form of the RIS-only cellular SINR floor."""
    a = lm.G_c_mat - params.gamma_min * lm.H_hat_c
    return 0.5 * (a + a.conj().T), params.gamma_min * params.sigma2


def reduced_qos_ok(lm: LiftedMatrices, psi_mat: np.ndarray,
                   params: SystemParams, rel_slack: float = 0.0) -> bool:
    a, b = qos_trace_constraint(lm, params)
    lhs = _tr(a, psi_mat)
    return lhs >= b - rel_slack * (abs(lhs) + abs(b))


def build_sdp(cv: CascadedVectors, pa: PowerAllocation, params: SystemParams,
              psi0) -> sdp.SdpProblem:
    """Trace-linear model of the lifted objective around psi0.

    All four logs are expanded to first order at psi0 (subtracted concave
    terms upper-bounded by their tangents), leaving a linear maximization
    over the unit-diagonal PSD set with the QoS trace row and the bordered
    rank-one surrogate.
    """
    psi0 = np.asarray(getattr(psi0, "psi_mat", psi0), dtype=complex)
    lm = build_lifted(cv, pa, params)
    grad = dc_gradient(lm, psi0, params.sigma2)
    a, b = qos_trace_constraint(lm, params)
    k = cv.k
    return sdp.SdpProblem(objective=grad,
                          ineq_constraints=[(a, b)],
                          unit_diag=[(idx, 1.0) for idx in range(k)],
                          schur_block=True)


def _candidate_phase_matrix(psi_mat: np.ndarray, n_rand: int,
                            rng: np.random.Generator) -> np.ndarray:
    """Leading eigenvector plus Gaussian randomization, unit-modulus rows."""
    psi_mat = 0.5 * (psi_mat + psi_mat.conj().T)
    w, v = np.linalg.eigh(psi_mat)
    lead = v[:, -1]
    cands = [lead]
    if n_rand > 0:
        root = v * np.sqrt(np.maximum(w, 0.0))
        k = psi_mat.shape[0]
        xi = (rng.standard_normal((k, n_rand))
              + 1j * rng.standard_normal((k, n_rand))) * np.sqrt(0.5)
        cands.append((root @ xi).T)
    stacked = np.vstack([np.atleast_2d(c) for c in cands])
    mags = np.abs(stacked)
    out = np.where(mags > 0, stacked / np.where(mags > 0, mags, 1.0), 1.0)
    return out


def _score_candidates(cands: np.ndarray, cmat: np.ndarray,
                      pa: PowerAllocation, params: SystemParams):
    """(objective, QoS margin) of unit-modulus lifted candidates (rows)."""
    amps = cands.conj() @ cmat  # lifted vectors act conjugated: psi^H c
    pw = np.abs(amps) ** 2
    s2 = params.sigma2
    lam_sum = pa.lambda_i + pa.lambda_j
    margin = params.q_c * pw[..., 0] - params.gamma_min * (
        pa.p_t * lam_sum * pw[..., 6] + s2)
    g_i = pa.p_t * pa.lambda_i * pw[..., 1] / (params.q_c * pw[..., 4] + s2)
    g_j = pa.p_t * pa.lambda_j * pw[..., 2] / (
        pa.p_t * pa.lambda_i * pw[..., 3] + params.q_c * pw[..., 5] + s2)
    obj = np.log2(1.0 + g_i) + np.log2(1.0 + g_j)
    return obj, margin


def _coordinate_polish(psi: np.ndarray, cmat: np.ndarray, pa: PowerAllocation,
                       params: SystemParams, n_levels: int = 128,
                       sweeps: int = 3) -> np.ndarray:
    """Cyclic single-element refinement of a unit-modulus lifted vector.

    Each element sweeps a phase grid (keeping the others fixed); a move is
    taken only if it improves the (objective, margin) ranking, with QoS
    feasibility never given up once attained.  Deterministic.
    """
    k = psi.shape[0]
    levels = np.exp(1j * 2.0 * np.pi * np.arange(n_levels) / n_levels)
    psi = psi.copy()

    def rank(obj, margin):
        return (margin >= 0.0, obj if margin >= 0.0 else margin)

    obj0, margin0 = _score_candidates(psi[None, :], cmat, pa, params)
    obj_cur, margin_cur = float(obj0[0]), float(margin0[0])
    for _ in range(sweeps):
        moved = False
        for idx in range(k):
            trial = np.tile(psi, (n_levels, 1))
            trial[:, idx] = levels
            obj, margin = _score_candidates(trial, cmat, pa, params)
            best = max(range(n_levels),
                       key=lambda m: rank(float(obj[m]), float(margin[m])))
            if rank(float(obj[best]), float(margin[best])) > rank(obj_cur,
                                                                  margin_cur):
                psi[idx] = levels[best]
                obj_cur, margin_cur = float(obj[best]), float(margin[best])
                moved = True
        if not moved:
            break
    return psi


def extract_rank_one(psi_mat, cv: CascadedVectors, pa: PowerAllocation,
                     params: SystemParams, n_rand: int,
                     rng: np.random.Generator | None = None,
                     extra_candidates: np.ndarray | None = None,
                     polish: bool = True) -> ExtractionResult:
    """Recover unit-modulus phases from the lifted solution.

    Candidates are the leading eigenvector plus n_rand Gaussian samples
    (plus any caller-supplied vectors), scored by the true RIS-only sum
    rate with the RIS-only QoS floor as a filter; the winner then receives
    a deterministic per-element polish unless disabled.  With no feasible
    candidate the maximum-margin one is returned flagged infeasible.
    """
    psi_mat = np.asarray(getattr(psi_mat, "psi_mat", psi_mat), dtype=complex)
    rng = np.random.default_rng(0) if rng is None else rng
    cands = _candidate_phase_matrix(psi_mat, n_rand, rng)
    if extra_candidates is not None:
        cands = np.vstack([cands, np.atleast_2d(extra_candidates)])

    cmat = _cascade_matrix(cv)
    obj, margin = _score_candidates(cands, cmat, pa, params)
    feasible_mask = margin >= 0.0
    if feasible_mask.any():
        idx = int(np.argmax(np.where(feasible_mask, obj, -np.inf)))
    else:
        idx = int(np.argmax(margin))
    psi_best = cands[idx]
    final_obj, final_margin = float(obj[idx]), float(margin[idx])
    if polish:
        polished = _coordinate_polish(psi_best, cmat, pa, params)
        obj_arr, margin_arr = _score_candidates(polished[None, :], cmat,
                                                pa, params)
        obj_p, margin_p = float(obj_arr[0]), float(margin_arr[0])
        better = (margin_p >= 0.0, obj_p if margin_p >= 0 else margin_p) >= \
                 (final_margin >= 0.0,
                  final_obj if final_margin >= 0 else final_margin)
        if better:
            psi_best, final_obj, final_margin = polished, obj_p, margin_p
    theta = np.mod(-np.angle(psi_best), 2.0 * np.pi)
    return ExtractionResult(phases=PhaseVector(theta), feasible=final_margin >= 0.0,
                            objective=final_obj, qos_margin=final_margin)


def _dc_descent(lm: LiftedMatrices, cv: CascadedVectors, pa: PowerAllocation,
                params: SystemParams, psi0: np.ndarray):
    """Inner DC loop from psi0.

    Returns (psi, accepted, sdp_ok): `accepted` is the nondecreasing list of
    true objectives of accepted feasible iterates (empty if the loop never
    reaches the reduced-QoS set).  An infeasible start is allowed: the first
    solve jumps into the feasible set unconditionally.
    """
    s2 = params.sigma2
    psi = psi0
    psi_feasible = reduced_qos_ok(lm, psi, params,
                                  rel_slack=100.0 * params.sdp_tol)
    accepted = [dc_objective(lm, psi, s2)] if psi_feasible else []
    warm = None
    sdp_ok = True
    for step in range(params.dc_max_iter):
        # early model solves only steer the linearization; tighten gradually
        tol_k = max(params.sdp_tol, 1e-3 * 0.1 ** step)
        cap_k = params.sdp_max_iter if tol_k <= params.sdp_tol \
            else min(params.sdp_max_iter, 2500)
        feas_slack = 100.0 * tol_k
        prob = build_sdp(cv, pa, params, psi)
        x_full, stats = sdp.solve(prob, tol=tol_k, max_iter=cap_k,
                                  initial=warm)
        if stats.infeasible:
            sdp_ok = False
            break
        warm = x_full
        psi_new = x_full[:cv.k, :cv.k]
        psi_new = 0.5 * (psi_new + psi_new.conj().T)
        if not psi_feasible:
            # jump into the reduced-QoS set before enforcing ascent
            psi = psi_new
            psi_feasible = reduced_qos_ok(lm, psi, params, rel_slack=feas_slack)
            if psi_feasible:
                accepted.append(dc_objective(lm, psi, s2))
            continue
        best_obj, best_psi = -math.inf, psi
        for t in (1.0, 0.5, 0.25, 0.125):
            cand = psi + t * (psi_new - psi)
            obj = dc_objective(lm, cand, s2)
            if obj > best_obj:
                best_obj, best_psi = obj, cand
        if best_obj <= accepted[-1]:
            break
        gain = best_obj - accepted[-1]
        psi = best_psi
        accepted.append(best_obj)
        if gain < params.tol * (1.0 + abs(best_obj)):
            break
    return psi, accepted, sdp_ok


def optimize_phases(ch: ChannelRealization, pa: PowerAllocation,
                    params: SystemParams, init: PhaseVector,
                    rng: np.random.Generator | None = None) -> PhaseOptResult:
    """DC loop plus rank-one extraction; ascent is enforced on acceptance.

    If the extracted point beats the relaxed objective (possible since the
    inner models are local), one polish pass restarts the DC loop from the
    lifted extraction so the reported relaxed value dominates it.
    """
    if rng is None:
        rng = np.random.default_rng((int(ch.seed), 0x9E3779B9))
    cv = build_cascades(ch)
    lm = build_lifted(cv, pa, params)
    s2 = params.sigma2
    psi0 = np.outer(init.lifted_vector(), init.lifted_vector().conj())

    psi, accepted, sdp_ok = _dc_descent(lm, cv, pa, params, psi0)
    if not accepted:
        # never reached the reduced-QoS set: this power split is infeasible
        return PhaseOptResult(phases=init, reduced_sum_rate=reduced_sum_rate(
            cv, pa, init, params), feasible=False,
            relaxed_objective=-math.inf, extracted_objective=-math.inf,
            iterations=0, accepted_objectives=(),
            sdp_converged=sdp_ok)

    # the init phases are a known rank-one candidate: extraction never
    # returns below them when they meet the reduced QoS
    extraction = extract_rank_one(psi, cv, pa, params, params.n_rand, rng=rng,
                                  extra_candidates=init.lifted_vector())
    # Polish: an extracted point that beats the current relaxed value is a
    # feasible relaxed point itself (unit diagonal, PSD, QoS-filtered), so
    # accept its lift as a DC iterate and keep descending from it.  The
    # final reported relaxed value therefore always dominates the reported
    # extraction.
    for _ in range(3):
        if not (extraction.feasible and extraction.objective > accepted[-1]):
            break
        vec_lift = extraction.phases.lifted_vector()
        lift = np.outer(vec_lift, vec_lift.conj())
        accepted.append(extraction.objective)
        psi = lift
        psi_next, more, sdp_ok = _dc_descent(lm, cv, pa, params, lift)
        improvements = [m for m in more[1:] if m > accepted[-1]]
        if improvements:
            accepted.extend(improvements)
            psi = psi_next
        extraction = extract_rank_one(
            psi, cv, pa, params, params.n_rand, rng=rng,
            extra_candidates=vec_lift)
    if extraction.feasible and extraction.objective > accepted[-1]:
        # settle on the rank-one lift as the final accepted relaxed point
        vec_lift = extraction.phases.lifted_vector()
        psi = np.outer(vec_lift, vec_lift.conj())
        accepted.append(extraction.objective)

    relaxed = max(accepted)
    return PhaseOptResult(phases=extraction.phases,
                          reduced_sum_rate=extraction.objective,
                          feasible=extraction.feasible,
                          relaxed_objective=relaxed,
                          extracted_objective=extraction.objective,
                          iterations=max(0, len(accepted) - 1),
                          accepted_objectives=tuple(accepted),
                          sdp_converged=sdp_ok)
