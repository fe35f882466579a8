"""RIS-assisted NOMA D2D sum-rate optimization toolkit."""

from .channel import (ChannelRealization, Geometry, effective_gain,
                      generate_channels, large_scale_gain)
from .rates import (PowerAllocation, RateReport, ScaCoefficients, SystemParams,
                    db_to_linear, dbm_to_watts, linear_to_db, sca_coefficients,
                    sinr_all, watts_to_dbm)
from .power_alloc import (DualVariables, EffectiveGains, compute_gains,
                          optimize_power, qos_power_cap, solve_lambda_i,
                          solve_p_t, update_duals)
from .beamforming import (BeamformingMatrix, CascadedVectors, PhaseVector,
                          build_cascades, build_sdp, extract_rank_one,
                          optimize_phases, reduced_sinrs)
from .sdp import SdpProblem, SolveStats, project_psd, solve
from .alternating import (FixedPowerScheme, OmaScheme, Solution,
                          SumRateMaximizer, maximize_sum_rate,
                          run_baseline_fixed, run_baseline_oma)
from .experiments import (ExperimentConfig, ResultRow, build_config,
                          run_convergence_trace, run_experiment)

__version__ = "0.1.0"

__all__ = [
    "ChannelRealization", "Geometry", "effective_gain", "generate_channels",
    "large_scale_gain", "PowerAllocation", "RateReport", "ScaCoefficients",
    "SystemParams", "db_to_linear", "dbm_to_watts", "linear_to_db",
    "sca_coefficients", "sinr_all", "watts_to_dbm", "DualVariables",
    "EffectiveGains", "compute_gains", "optimize_power", "qos_power_cap",
    "solve_lambda_i", "solve_p_t", "update_duals", "BeamformingMatrix",
    "CascadedVectors", "PhaseVector", "build_cascades", "build_sdp",
    "extract_rank_one", "optimize_phases", "reduced_sinrs", "SdpProblem",
    "SolveStats", "project_psd", "solve", "FixedPowerScheme", "OmaScheme",
    "Solution", "SumRateMaximizer", "maximize_sum_rate", "run_baseline_fixed",
    "run_baseline_oma", "ExperimentConfig", "ResultRow", "build_config",
    "run_convergence_trace", "run_experiment",
]
