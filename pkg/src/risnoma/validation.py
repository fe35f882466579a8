"""Input validation helpers shared by the estimator layer and the drivers."""

from __future__ import annotations

import numbers

import numpy as np

from .channel import ChannelRealization, Geometry, generate_channels
from .rates import SystemParams
from .beamforming import PhaseVector


def check_system_params(params) -> SystemParams:
    if params is None:
        params = SystemParams()
    if not isinstance(params, SystemParams):
        raise TypeError(f"expected SystemParams, got {type(params).__name__}")
    params.validate()
    return params


def check_geometry(geometry) -> Geometry:
    if geometry is None:
        geometry = Geometry()
    if not isinstance(geometry, Geometry):
        raise TypeError(f"expected Geometry, got {type(geometry).__name__}")
    geometry.validate()
    return geometry


def check_channel(x, params: SystemParams, geometry: Geometry) -> ChannelRealization:
    """Accept a ready realization or an integer seed to draw one."""
    if isinstance(x, ChannelRealization):
        x.validate()
        if x.k != params.k:
            raise ValueError(f"channel has K={x.k}, params expect K={params.k}")
        return x
    if isinstance(x, numbers.Integral):
        return generate_channels(params, geometry, int(x))
    raise TypeError("fit input must be a ChannelRealization or an integer seed")


def as_phase_vector(phases, k: int) -> PhaseVector:
    if isinstance(phases, PhaseVector):
        pv = phases
    else:
        pv = PhaseVector(np.asarray(phases, dtype=float))
    if pv.k != k:
        raise ValueError(f"phase vector length {pv.k} != K={k}")
    return pv
