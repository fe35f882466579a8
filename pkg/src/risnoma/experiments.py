"""Config-driven Monte Carlo harness.

The configuration is a flat key-value text file with dotted section keys
(``params.k = 20``); CLI flags override file values.  Every run is
deterministic given its configuration (modulo wall-clock timing, which can
be disabled), and each CSV row can be re-derived from its
(seed, sweep value, scheme) triple alone.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, replace

import numpy as np
from joblib import Parallel, delayed

from .alternating import SCHEME_FUNCTIONS, Solution
from .channel import Geometry, generate_channels
from .rates import SystemParams, dbm_to_watts, db_to_linear

RESULT_HEADER = "seed,scheme,sweep_value,sum_rate,rate_cu,iterations_used,feasible,wall_time_ms"
CONVERGE_HEADER = "seed,dt_power_dbm,iteration,sum_rate"

SWEEP_KINDS = ("dt_power", "ris_elements", "iterations")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ResultRow:
    seed: int
    scheme: str
    sweep_value: float
    sum_rate: float
    rate_cu: float
    iterations_used: int
    feasible: bool
    wall_time_ms: float


@dataclass
class ExperimentConfig:
    params: SystemParams = field(default_factory=SystemParams)
    geometry: Geometry = field(default_factory=Geometry)
    seed_start: int = 0
    seed_count: int = 100
    sweep_kind: str = "dt_power"
    sweep_values: tuple[float, ...] = (30.0,)
    schemes: tuple[str, ...] = ("proposed", "fixed", "oma")
    output_path: str | None = None
    converge_powers_dbm: tuple[float, ...] = (5.0, 15.0)
    record_timing: bool = True
    jobs: int = 1

    def validate(self) -> None:
        self.params.validate()
        self.geometry.validate()
        if self.seed_count < 1:
            raise ConfigError("seeds.count must be >= 1")
        if self.sweep_kind not in SWEEP_KINDS:
            raise ConfigError(f"sweep.kind must be one of {SWEEP_KINDS}")
        if not self.sweep_values:
            raise ConfigError("sweep.values must be nonempty")
        if not self.schemes:
            raise ConfigError("schemes must be nonempty")
        for s in self.schemes:
            if s not in SCHEME_FUNCTIONS:
                raise ConfigError(f"unknown scheme {s!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


# --- flat key=value config format -------------------------------------------

_PARAM_KEYS = {
    "params.k": ("k", int),
    "params.p_max_dbm": ("p_max", lambda v: dbm_to_watts(float(v))),
    "params.q_c_dbm": ("q_c", lambda v: dbm_to_watts(float(v))),
    "params.sigma2_dbm": ("sigma2", lambda v: dbm_to_watts(float(v))),
    "params.gamma_min_db": ("gamma_min", lambda v: db_to_linear(float(v))),
    "params.tol": ("tol", float),
    "params.sca_max_iter": ("sca_max_iter", int),
    "params.ao_max_iter": ("ao_max_iter", int),
    "params.dc_max_iter": ("dc_max_iter", int),
    "params.dual_step": ("dual_step", float),
    "params.dual_max_iter": ("dual_max_iter", int),
    "params.lambda_floor": ("lambda_floor", float),
    "params.p_floor_rel": ("p_floor_rel", float),
    "params.n_rand": ("n_rand", int),
    "params.sdp_tol": ("sdp_tol", float),
    "params.sdp_max_iter": ("sdp_max_iter", int),
    "params.duals_in_nats": ("duals_in_nats", None),  # bool
    "params.fixed_split_strong": ("fixed_split_strong", float),
    "params.oma_slot_strong": ("oma_slot_strong", float),
}

_GEOMETRY_VEC_KEYS = ("uav", "dt", "cu", "dr_i", "dr_j", "ris")
_GEOMETRY_SCALAR_KEYS = {
    "alpha_ris": float, "alpha_ground": float, "k_factor_ris": float,
    "k_factor_ground": float, "pl0_db": float, "carrier_wavelength_m": float,
    "element_spacing_m": float,
}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "1", "yes", "on"):
        return True
    if t in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> tuple[float, ...]:
    items = [p.strip() for p in text.split(",") if p.strip()]
    if not items:
        raise ConfigError(f"empty list: {text!r}")
    return tuple(float(p) for p in items)


def parse_config_text(text: str) -> dict[str, str]:
    """Flat ``key = value`` lines; '#' starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def load_config_file(path: str) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def build_config(values: dict[str, str]) -> ExperimentConfig:
    """Materialize an ExperimentConfig from flat key/value strings."""
    cfg = ExperimentConfig()
    params_kw: dict = {}
    geometry_kw: dict = {}
    for key, raw in values.items():
        try:
            if key in _PARAM_KEYS:
                name, conv = _PARAM_KEYS[key]
                params_kw[name] = _parse_bool(raw) if conv is None else conv(raw)
            elif key.startswith("geometry."):
                sub = key.split(".", 1)[1]
                if sub in _GEOMETRY_VEC_KEYS:
                    vec = _parse_floats(raw)
                    if len(vec) != 3:
                        raise ConfigError(f"{key} needs 3 coordinates")
                    geometry_kw[sub] = np.asarray(vec)
                elif sub in _GEOMETRY_SCALAR_KEYS:
                    geometry_kw[sub] = _GEOMETRY_SCALAR_KEYS[sub](raw)
                elif sub == "shared_ris_drop_links":
                    geometry_kw[sub] = _parse_bool(raw)
                else:
                    raise ConfigError(f"unknown key {key!r}")
            elif key == "seeds.start":
                cfg.seed_start = int(raw)
            elif key == "seeds.count":
                cfg.seed_count = int(raw)
            elif key == "sweep.kind":
                cfg.sweep_kind = raw
            elif key == "sweep.values":
                cfg.sweep_values = _parse_floats(raw)
            elif key == "schemes":
                cfg.schemes = tuple(s.strip() for s in raw.split(",") if s.strip())
            elif key == "output":
                cfg.output_path = raw
            elif key == "converge.dt_power_dbm":
                cfg.converge_powers_dbm = _parse_floats(raw)
            elif key == "record_timing":
                cfg.record_timing = _parse_bool(raw)
            elif key == "jobs":
                cfg.jobs = int(raw)
            else:
                raise ConfigError(f"unknown key {key!r}")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})") from exc
    if params_kw:
        cfg.params = replace(cfg.params, **params_kw)
    if geometry_kw:
        cfg.geometry = replace(cfg.geometry, **geometry_kw)
    cfg.validate()
    return cfg


def dump_config(cfg: ExperimentConfig) -> str:
    """Canonical flat rendering of the effective configuration."""
    from .rates import watts_to_dbm, linear_to_db

    lines = [
        f"params.k = {cfg.params.k}",
        f"params.p_max_dbm = {watts_to_dbm(cfg.params.p_max):g}",
        f"params.q_c_dbm = {watts_to_dbm(cfg.params.q_c):g}",
        f"params.sigma2_dbm = {watts_to_dbm(cfg.params.sigma2):g}",
        f"params.gamma_min_db = {linear_to_db(cfg.params.gamma_min):g}",
        f"params.tol = {cfg.params.tol:g}",
        f"params.sca_max_iter = {cfg.params.sca_max_iter}",
        f"params.ao_max_iter = {cfg.params.ao_max_iter}",
        f"params.dc_max_iter = {cfg.params.dc_max_iter}",
        f"params.dual_step = {cfg.params.dual_step:g}",
        f"params.dual_max_iter = {cfg.params.dual_max_iter}",
        f"params.lambda_floor = {cfg.params.lambda_floor:g}",
        f"params.p_floor_rel = {cfg.params.p_floor_rel:g}",
        f"params.n_rand = {cfg.params.n_rand}",
        f"params.sdp_tol = {cfg.params.sdp_tol:g}",
        f"params.sdp_max_iter = {cfg.params.sdp_max_iter}",
        f"params.duals_in_nats = {str(cfg.params.duals_in_nats).lower()}",
        f"params.fixed_split_strong = {cfg.params.fixed_split_strong:g}",
        f"params.oma_slot_strong = {cfg.params.oma_slot_strong:g}",
    ]
    for name in _GEOMETRY_VEC_KEYS:
        vec = getattr(cfg.geometry, name)
        lines.append(f"geometry.{name} = {vec[0]:g}, {vec[1]:g}, {vec[2]:g}")
    for name in _GEOMETRY_SCALAR_KEYS:
        lines.append(f"geometry.{name} = {getattr(cfg.geometry, name):g}")
    lines.append("geometry.shared_ris_drop_links = "
                 f"{str(cfg.geometry.shared_ris_drop_links).lower()}")
    lines += [
        f"seeds.start = {cfg.seed_start}",
        f"seeds.count = {cfg.seed_count}",
        f"sweep.kind = {cfg.sweep_kind}",
        "sweep.values = " + ", ".join(f"{v:g}" for v in cfg.sweep_values),
        "schemes = " + ", ".join(cfg.schemes),
        "converge.dt_power_dbm = " + ", ".join(
            f"{v:g}" for v in cfg.converge_powers_dbm),
        f"record_timing = {str(cfg.record_timing).lower()}",
        f"jobs = {cfg.jobs}",
    ]
    if cfg.output_path:
        lines.append(f"output = {cfg.output_path}")
    return "\n".join(lines) + "\n"


# --- execution ---------------------------------------------------------------

def apply_sweep(params: SystemParams, kind: str, value: float) -> SystemParams:
    if kind == "dt_power":
        return replace(params, p_max=dbm_to_watts(float(value)))
    if kind == "ris_elements":
        return replace(params, k=int(value))
    raise ConfigError(f"sweep kind {kind!r} is not valid for run_experiment")


def run_single(seed: int, scheme: str, sweep_kind: str, sweep_value: float,
               params: SystemParams, geometry: Geometry,
               record_timing: bool = True) -> ResultRow:
    """One (seed, sweep value, scheme) cell; the unit of re-derivability."""
    params_v = apply_sweep(params, sweep_kind, sweep_value)
    ch = generate_channels(params_v, geometry, seed)
    t0 = time.perf_counter()
    sol: Solution = SCHEME_FUNCTIONS[scheme](ch, params_v)
    elapsed_ms = (time.perf_counter() - t0) * 1e3 if record_timing else 0.0
    return ResultRow(seed=seed, scheme=scheme, sweep_value=float(sweep_value),
                     sum_rate=sol.sum_rate, rate_cu=sol.report.rate_cu,
                     iterations_used=sol.iterations, feasible=sol.feasible,
                     wall_time_ms=elapsed_ms)


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """All (seed, sweep value, scheme) cells of the configured experiment."""
    cfg.validate()
    if cfg.sweep_kind == "iterations":
        raise ConfigError("use run_convergence_trace for the iterations sweep")
    sink = None
    if cfg.output_path is not None:
        sink = open(cfg.output_path, "w", encoding="utf-8")
    try:
        tasks = [(seed, scheme, value)
                 for seed in range(cfg.seed_start, cfg.seed_start + cfg.seed_count)
                 for value in cfg.sweep_values
                 for scheme in cfg.schemes]
        if cfg.jobs == 1:
            rows = [run_single(seed, scheme, cfg.sweep_kind, value,
                               cfg.params, cfg.geometry, cfg.record_timing)
                    for seed, scheme, value in tasks]
        else:
            rows = Parallel(n_jobs=cfg.jobs)(
                delayed(run_single)(seed, scheme, cfg.sweep_kind, value,
                                    cfg.params, cfg.geometry, cfg.record_timing)
                for seed, scheme, value in tasks)
        rows.sort(key=lambda r: (r.seed, r.sweep_value, r.scheme))
        if sink is not None:
            sink.write(render_results_csv(rows))
        return rows
    finally:
        if sink is not None:
            sink.close()


def render_results_csv(rows: list[ResultRow]) -> str:
    out = [RESULT_HEADER]
    for r in rows:
        out.append(",".join([
            str(r.seed), r.scheme, repr(r.sweep_value), repr(r.sum_rate),
            repr(r.rate_cu), str(r.iterations_used),
            "true" if r.feasible else "false", repr(r.wall_time_ms)]))
    return "\n".join(out) + "\n"


def run_convergence_trace(cfg: ExperimentConfig):
    """Accepted per-round objective of the proposed scheme per DT power."""
    cfg.validate()
    sink = None
    if cfg.output_path is not None:
        sink = open(cfg.output_path, "w", encoding="utf-8")
    try:
        tasks = [(seed, p_dbm)
                 for seed in range(cfg.seed_start, cfg.seed_start + cfg.seed_count)
                 for p_dbm in cfg.converge_powers_dbm]

        def trace(seed: int, p_dbm: float):
            params_v = replace(cfg.params, p_max=dbm_to_watts(p_dbm))
            ch = generate_channels(params_v, cfg.geometry, seed)
            sol = SCHEME_FUNCTIONS["proposed"](ch, params_v)
            return [(seed, p_dbm, it, rate) for it, rate in sol.trajectory]

        if cfg.jobs == 1:
            traces = [trace(seed, p) for seed, p in tasks]
        else:
            traces = Parallel(n_jobs=cfg.jobs)(
                delayed(trace)(seed, p) for seed, p in tasks)
        rows = [row for tr in traces for row in tr]
        rows.sort(key=lambda r: (r[0], r[1], r[2]))
        if sink is not None:
            sink.write(render_converge_csv(rows))
        return rows
    finally:
        if sink is not None:
            sink.close()


def render_converge_csv(rows) -> str:
    out = [CONVERGE_HEADER]
    for seed, p_dbm, it, rate in rows:
        out.append(f"{seed},{p_dbm!r},{it},{rate!r}")
    return "\n".join(out) + "\n"
