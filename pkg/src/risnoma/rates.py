"""SINRs, achievable rates, QoS feasibility and the SCA surrogate.

All internal math is in linear watts; dB/dBm only cross the boundary
through the conversion helpers below.  The weak receiver's SINR uses its
own power fraction in the numerator and the strong receiver's fraction in
the NOMA interference term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, effective_gain

LN2 = math.log(2.0)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (0.1 * x_db)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watts(x_dbm: float) -> float:
    return 10.0 ** (0.1 * (x_dbm - 30.0))


def watts_to_dbm(x_w: float) -> float:
    return 10.0 * math.log10(x_w) + 30.0


@dataclass(frozen=True)
class SystemParams:
    """Powers, QoS threshold, noise and solver controls (linear units).

    ``q_c`` is the UAV transmit power serving the cellular user, ``p_max``
    the D2D transmitter's power budget, ``gamma_min`` the cellular SINR
    floor.  The remaining fields are iteration caps and numerical knobs for
    the optimizers; they all have workable defaults.
    """

    q_c: float = dbm_to_watts(30.0)
    p_max: float = dbm_to_watts(30.0)
    sigma2: float = dbm_to_watts(-174.0)
    gamma_min: float = db_to_linear(20.0)
    k: int = 20
    sca_max_iter: int = 50
    ao_max_iter: int = 15
    dc_max_iter: int = 8
    tol: float = 1e-3
    # solver knobs
    dual_step: float = 0.5
    dual_max_iter: int = 100
    lambda_floor: float = 1e-3
    p_floor_rel: float = 1e-6
    n_rand: int = 200
    sdp_tol: float = 1e-4
    sdp_max_iter: int = 5000
    duals_in_nats: bool = False
    fixed_split_strong: float = 0.3
    oma_slot_strong: float = 0.5

    @property
    def p_floor(self) -> float:
        return self.p_floor_rel * self.p_max

    def validate(self) -> None:
        if not (self.q_c > 0 and self.p_max > 0 and self.sigma2 > 0):
            raise ValueError("powers and noise variance must be positive")
        if not self.gamma_min > 0:
            raise ValueError("gamma_min must be positive")
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for n in (self.sca_max_iter, self.ao_max_iter, self.dc_max_iter,
                  self.dual_max_iter, self.sdp_max_iter):
            if n < 1:
                raise ValueError("iteration caps must be positive")
        if not 0.0 < self.lambda_floor < 0.5:
            raise ValueError("lambda_floor must lie in (0, 0.5)")
        if not 0.0 < self.fixed_split_strong < 1.0:
            raise ValueError("fixed_split_strong must lie in (0, 1)")
        if not 0.0 < self.oma_slot_strong < 1.0:
            raise ValueError("oma_slot_strong must lie in (0, 1)")


@dataclass(frozen=True)
class PowerAllocation:
    """DT power budget and the two NOMA fractions."""

    p_t: float
    lambda_i: float
    lambda_j: float

    def validate(self, p_max: float) -> None:
        if not 0.0 <= self.p_t <= p_max * (1.0 + 1e-12):
            raise ValueError(f"p_t={self.p_t} outside [0, p_max]")
        if not (0.0 <= self.lambda_i <= 1.0 and 0.0 <= self.lambda_j <= 1.0):
            raise ValueError("power fractions must lie in [0, 1]")
        if self.lambda_i + self.lambda_j > 1.0 + 1e-12:
            raise ValueError("lambda_i + lambda_j exceeds 1")


@dataclass(frozen=True)
class RateReport:
    """SINRs, rates (bps/Hz) and the QoS verdict at one operating point."""

    sinr_cu: float
    sinr_dri: float
    sinr_drj: float
    rate_cu: float
    rate_dri: float
    rate_drj: float
    sum_rate: float
    qos_feasible: bool


@dataclass(frozen=True)
class ScaCoefficients:
    """Tangent-surrogate coefficients alpha * log2(gamma) + beta per receiver.

    A receiver whose SINR is exactly zero has no usable tangent point; its
    coefficients are zeroed and the matching ``degenerate_*`` flag is set so
    callers can drop the term (the zero-rate user contributes nothing).
    """

    alpha_i: float
    beta_i: float
    alpha_j: float
    beta_j: float
    degenerate_i: bool = False
    degenerate_j: bool = False


def _report(sinr_cu: float, sinr_dri: float, sinr_drj: float,
            gamma_min: float) -> RateReport:
    rate_cu = math.log2(1.0 + sinr_cu)
    rate_dri = math.log2(1.0 + sinr_dri)
    rate_drj = math.log2(1.0 + sinr_drj)
    return RateReport(sinr_cu=sinr_cu, sinr_dri=sinr_dri, sinr_drj=sinr_drj,
                      rate_cu=rate_cu, rate_dri=rate_dri, rate_drj=rate_drj,
                      sum_rate=rate_dri + rate_drj,
                      qos_feasible=sinr_cu >= gamma_min)


def report_from_gains(gains, pa: PowerAllocation, params: SystemParams) -> RateReport:
    """Evaluate the three SINRs from precomputed effective gains.

    ``gains`` carries H_i/H_j/H_c (unscaled squared composite magnitudes)
    and G_i/G_j/G_c (already scaled by the UAV power).  The NOMA
    interference at the weak receiver runs through its own channel with the
    strong receiver's power fraction.
    """
    s2 = params.sigma2
    sinr_cu = gains.G_c / (pa.p_t * (pa.lambda_i + pa.lambda_j) * gains.H_c + s2)
    sinr_dri = pa.p_t * pa.lambda_i * gains.H_i / (gains.G_i + s2)
    noma_interf = pa.p_t * pa.lambda_i * gains.H_j
    sinr_drj = pa.p_t * pa.lambda_j * gains.H_j / (noma_interf + gains.G_j + s2)
    return _report(sinr_cu, sinr_dri, sinr_drj, params.gamma_min)


def sinr_all(ch: ChannelRealization, pa: PowerAllocation, phases,
             params: SystemParams) -> RateReport:
    """Full composite-channel SINRs and rates at (pa, phases)."""
    # Local import keeps the dependency one-way (power_alloc builds on rates).
    from .power_alloc import compute_gains

    return report_from_gains(compute_gains(ch, phases, params), pa, params)


def sca_coefficients(report: RateReport) -> ScaCoefficients:
    """Tangent coefficients of the log-surrogate at the report's SINRs."""

    def pair(gamma: float) -> tuple[float, float, bool]:
        if gamma <= 0.0:
            return 0.0, 0.0, True
        alpha = gamma / (1.0 + gamma)
        beta = math.log2(1.0 + gamma) - alpha * math.log2(gamma)
        return alpha, beta, False

    alpha_i, beta_i, deg_i = pair(report.sinr_dri)
    alpha_j, beta_j, deg_j = pair(report.sinr_drj)
    return ScaCoefficients(alpha_i=alpha_i, beta_i=beta_i, alpha_j=alpha_j,
                           beta_j=beta_j, degenerate_i=deg_i, degenerate_j=deg_j)


def surrogate_rate(alpha: float, beta: float, gamma: float) -> float:
    """alpha * log2(gamma) + beta; zero for the degenerate (alpha=0) case."""
    if alpha == 0.0:
        return beta
    return alpha * math.log2(gamma) + beta
