import numpy as np
import pytest

from risnoma import (ChannelRealization, Geometry, PowerAllocation,
                     SystemParams)
from risnoma.power_alloc import EffectiveGains


@pytest.fixture
def geometry():
    return Geometry()


@pytest.fixture
def small_params():
    return SystemParams(k=4)


def make_channel(k: int, rng: np.random.Generator, scale: float = 1.0,
                 seed: int = 0) -> ChannelRealization:
    """Synthetic realization with O(scale) links (well conditioned)."""

    def c():
        return scale * complex(rng.standard_normal(), rng.standard_normal())

    def v():
        return scale * (rng.standard_normal(k) + 1j * rng.standard_normal(k))

    ch = ChannelRealization(
        direct_uav_cu=c(), direct_uav_dri=c(), direct_uav_drj=c(),
        direct_dt_cu=c(), direct_dt_dri=c(), direct_dt_drj=c(),
        uav_to_ris=v(), dt_to_ris=v(), ris_to_cu=v(), ris_to_dri=v(),
        ris_to_drj=v(), seed=seed)
    ch.validate()
    return ch


def make_gains(rng: np.random.Generator, qos_binding: bool = False) -> EffectiveGains:
    """Random positive effective gains, optionally with a tight QoS cap."""
    vals = rng.uniform(0.2, 2.0, size=6)
    g = EffectiveGains(H_i=vals[0] * 2.0, H_j=vals[1], H_c=vals[2],
                       G_i=vals[3], G_j=vals[4], G_c=vals[5] * 50.0)
    if qos_binding:
        g = EffectiveGains(H_i=g.H_i, H_j=g.H_j, H_c=g.H_c * 4.0,
                           G_i=g.G_i, G_j=g.G_j, G_c=vals[5] * 20.0)
    return g


@pytest.fixture
def synth_params():
    """O(1)-scale parameters for synthetic-gain subproblem tests."""
    return SystemParams(q_c=1.0, p_max=1.0, sigma2=0.1, gamma_min=2.0, k=4)
