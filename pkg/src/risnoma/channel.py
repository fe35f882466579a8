"""Random channel generation for the UAV / cellular / D2D / RIS geometry.

All small-scale fading is Rician with a per-link-class K-factor (K = 0
recovers Rayleigh); the large-scale gain of a link of length ``d`` is
``PL0 * d**(-alpha)`` with ``PL0`` the reference gain at 1 m.  Every link
that touches the UAV or the RIS uses the LoS-dominated class, the three
terrestrial D2D/cellular links use the ground class.  RIS elements sit on
a uniform linear array, so each element carries its own deterministic LoS
phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Geometry:
    """Node positions (meters) and statistical fading parameters.

    K-factors are stored as linear ratios; ``k_factor_ground = 0`` means
    Rayleigh fading on the terrestrial links.  ``element_spacing_m = 0``
    collapses the RIS to a point (all elements share one LoS phase).
    """

    uav: np.ndarray = field(default_factory=lambda: np.array([250.0, 0.0, 100.0]))
    dt: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.0]))
    cu: np.ndarray = field(default_factory=lambda: np.array([250.0, 0.0, 0.0]))
    dr_i: np.ndarray = field(default_factory=lambda: np.array([20.0, 0.0, 0.0]))
    dr_j: np.ndarray = field(default_factory=lambda: np.array([40.0, 0.0, 0.0]))
    ris: np.ndarray = field(default_factory=lambda: np.array([50.0, 0.0, 10.0]))
    alpha_ris: float = 2.2          # path-loss exponent, UAV/RIS link class
    alpha_ground: float = 3.0       # path-loss exponent, terrestrial link class
    k_factor_ris: float = 10.0      # linear Rician K (10 dB), UAV/RIS link class
    k_factor_ground: float = 0.0    # linear Rician K, terrestrial links (Rayleigh)
    pl0_db: float = -30.0           # reference gain at 1 m
    carrier_wavelength_m: float = 0.15
    element_spacing_m: float = 0.075
    shared_ris_drop_links: bool = True

    def __post_init__(self):
        for name in ("uav", "dt", "cu", "dr_i", "dr_j", "ris"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    def validate(self) -> None:
        nodes = {n: getattr(self, n) for n in ("uav", "dt", "cu", "dr_i", "dr_j", "ris")}
        for name, p in nodes.items():
            if p.shape != (3,) or not np.all(np.isfinite(p)):
                raise ValueError(f"geometry node {name!r} must be a finite 3-vector")
        names = list(nodes)
        for a in range(len(names)):
            for b in range(a + 1, len(names)):
                if np.linalg.norm(nodes[names[a]] - nodes[names[b]]) <= 0.0:
                    raise ValueError(f"coincident nodes {names[a]!r} and {names[b]!r}")
        for alpha in (self.alpha_ris, self.alpha_ground):
            if not 1.5 <= alpha <= 6.0:
                raise ValueError(f"path-loss exponent {alpha} outside [1.5, 6]")
        for k in (self.k_factor_ris, self.k_factor_ground):
            if not (k >= 0.0):
                raise ValueError("Rician K-factors must be >= 0")
        if self.carrier_wavelength_m <= 0 or self.element_spacing_m < 0:
            raise ValueError("invalid array parameters")


@dataclass(eq=False)
class ChannelRealization:
    """One Monte Carlo draw of all nine links.

    Scalars are the direct links, vectors (length K) the per-element RIS
    hops.  The ``ris_to_*`` vectors are the physical RIS-to-receiver links
    and are reused for both the signal-side and interference-side cascades;
    when the generator is configured with ``shared_ris_drop_links=False``
    the interference-side draws live in the ``*_alt`` fields instead.
    After generation the labels are swapped if necessary so that DR_i is
    the receiver with the stronger zero-phase DT-side effective gain.
    """

    direct_uav_cu: complex
    direct_uav_dri: complex
    direct_uav_drj: complex
    direct_dt_cu: complex
    direct_dt_dri: complex
    direct_dt_drj: complex
    uav_to_ris: np.ndarray
    dt_to_ris: np.ndarray
    ris_to_cu: np.ndarray
    ris_to_dri: np.ndarray
    ris_to_drj: np.ndarray
    seed: int
    ris_to_cu_alt: np.ndarray | None = None
    ris_to_dri_alt: np.ndarray | None = None
    ris_to_drj_alt: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.uav_to_ris.shape[0]

    def interference_ris_to_cu(self) -> np.ndarray:
        """RIS->CU hop seen by the DT (interferer) signal."""
        return self.ris_to_cu if self.ris_to_cu_alt is None else self.ris_to_cu_alt

    def interference_ris_to_dri(self) -> np.ndarray:
        """RIS->DR_i hop seen by the UAV (interferer) signal."""
        return self.ris_to_dri if self.ris_to_dri_alt is None else self.ris_to_dri_alt

    def interference_ris_to_drj(self) -> np.ndarray:
        return self.ris_to_drj if self.ris_to_drj_alt is None else self.ris_to_drj_alt

    def validate(self) -> None:
        k = self.k
        vectors = [self.uav_to_ris, self.dt_to_ris, self.ris_to_cu,
                   self.ris_to_dri, self.ris_to_drj]
        vectors += [v for v in (self.ris_to_cu_alt, self.ris_to_dri_alt,
                                self.ris_to_drj_alt) if v is not None]
        for v in vectors:
            if v.shape != (k,):
                raise ValueError("RIS link vectors must share length K")
            if not np.all(np.isfinite(v.view(float))):
                raise ValueError("non-finite channel entry")
        scalars = [self.direct_uav_cu, self.direct_uav_dri, self.direct_uav_drj,
                   self.direct_dt_cu, self.direct_dt_dri, self.direct_dt_drj]
        if not all(np.isfinite(s) for s in scalars):
            raise ValueError("non-finite direct channel gain")


def large_scale_gain(distance_m: float | np.ndarray, exponent: float, pl0_db: float):
    """Large-scale power gain PL0 * d**(-alpha) (linear)."""
    pl0 = 10.0 ** (0.1 * pl0_db)
    return pl0 * np.asarray(distance_m, dtype=float) ** (-exponent)


def effective_gain(direct: complex, incident: np.ndarray, reflect: np.ndarray,
                   phases) -> float:
    """Squared magnitude of the composite direct-plus-reflected channel.

    ``|direct + sum_k incident_k * exp(j theta_k) * reflect_k|**2`` where
    ``theta`` comes from the phase vector (or a raw angle array).
    """
    theta = np.asarray(getattr(phases, "theta", phases), dtype=float)
    incident = np.asarray(incident)
    reflect = np.asarray(reflect)
    if incident.shape != reflect.shape or incident.shape != theta.shape:
        raise ValueError(
            f"length mismatch: incident {incident.shape}, reflect {reflect.shape}, "
            f"phases {theta.shape}")
    composite = direct + np.sum(incident * np.exp(1j * theta) * reflect)
    return float(abs(composite) ** 2)


def _ris_element_positions(geometry: Geometry, k: int) -> np.ndarray:
    """ULA element centers along +y, anchored at the RIS position.

    Anchoring (instead of centering) makes a smaller array a strict prefix
    of a larger one, so element-count sweeps see paired channels.
    """
    offsets = np.arange(k) * geometry.element_spacing_m
    pos = np.tile(geometry.ris, (k, 1))
    pos[:, 1] += offsets
    return pos


def _rician(rng: np.random.Generator, pl: np.ndarray, dist: np.ndarray,
            k_factor: float, wavelength: float):
    """Rician draw with unit mean-square small-scale power.

    The LoS component carries the deterministic propagation phase
    exp(-j 2 pi d / lambda); the diffuse part is CN(0, 1).
    """
    pl = np.asarray(pl, dtype=float)
    dist = np.asarray(dist, dtype=float)
    los = np.exp(-1j * TWO_PI * dist / wavelength)
    diffuse = (rng.standard_normal(pl.shape) + 1j * rng.standard_normal(pl.shape))
    diffuse *= np.sqrt(0.5)
    if np.isinf(k_factor):
        small = los
    else:
        small = (np.sqrt(k_factor / (k_factor + 1.0)) * los
                 + np.sqrt(1.0 / (k_factor + 1.0)) * diffuse)
    return np.sqrt(pl) * small


def _scalar_link(rng, geometry, a, b, exponent, k_factor) -> complex:
    d = float(np.linalg.norm(a - b))
    pl = large_scale_gain(d, exponent, geometry.pl0_db)
    return complex(_rician(rng, np.array(pl), np.array(d), k_factor,
                           geometry.carrier_wavelength_m))


def generate_channels(params, geometry: Geometry, seed: int) -> ChannelRealization:
    """Draw one channel realization; deterministic in (params, geometry, seed).

    Direct links come from one substream and each RIS element from its own,
    so realizations with different element counts share all common links
    and element draws (paired sampling for element-count sweeps).
    """
    geometry.validate()
    k = int(params.k)
    if k < 1:
        raise ValueError("params.k must be >= 1")
    g = geometry
    seed = int(seed)
    rng = np.random.default_rng([seed, 0x0D1EEC7])

    direct_uav_cu = _scalar_link(rng, g, g.uav, g.cu, g.alpha_ris, g.k_factor_ris)
    direct_uav_dri = _scalar_link(rng, g, g.uav, g.dr_i, g.alpha_ris, g.k_factor_ris)
    direct_uav_drj = _scalar_link(rng, g, g.uav, g.dr_j, g.alpha_ris, g.k_factor_ris)
    direct_dt_cu = _scalar_link(rng, g, g.dt, g.cu, g.alpha_ground, g.k_factor_ground)
    direct_dt_dri = _scalar_link(rng, g, g.dt, g.dr_i, g.alpha_ground, g.k_factor_ground)
    direct_dt_drj = _scalar_link(rng, g, g.dt, g.dr_j, g.alpha_ground, g.k_factor_ground)

    el = _ris_element_positions(g, k)
    n_links = 3 if g.shared_ris_drop_links else 6
    names = ("uav_to_ris", "dt_to_ris", "ris_to_cu", "ris_to_dri", "ris_to_drj")
    nodes = (g.uav, g.dt, g.cu, g.dr_i, g.dr_j)
    factors = (g.k_factor_ris,) * 5
    vectors = {name: np.empty(k, dtype=complex) for name in names}
    alts = {name: np.empty(k, dtype=complex)
            for name in ("ris_to_cu", "ris_to_dri", "ris_to_drj")}
    for i in range(k):
        rng_el = np.random.default_rng([seed, 0xE1E, i])
        for name, node, kf in zip(names, nodes, factors):
            d = float(np.linalg.norm(el[i] - node))
            pl = large_scale_gain(d, g.alpha_ris, g.pl0_db)
            vectors[name][i] = complex(_rician(rng_el, np.array(pl),
                                               np.array(d), kf,
                                               g.carrier_wavelength_m))
        if n_links == 6:
            for name, node in zip(("ris_to_cu", "ris_to_dri", "ris_to_drj"),
                                  (g.cu, g.dr_i, g.dr_j)):
                d = float(np.linalg.norm(el[i] - node))
                pl = large_scale_gain(d, g.alpha_ris, g.pl0_db)
                alts[name][i] = complex(_rician(rng_el, np.array(pl),
                                                np.array(d), g.k_factor_ris,
                                                g.carrier_wavelength_m))
    uav_to_ris = vectors["uav_to_ris"]
    dt_to_ris = vectors["dt_to_ris"]
    ris_to_cu = vectors["ris_to_cu"]
    ris_to_dri = vectors["ris_to_dri"]
    ris_to_drj = vectors["ris_to_drj"]
    alt_cu = alt_dri = alt_drj = None
    if n_links == 6:
        alt_cu, alt_dri, alt_drj = (alts["ris_to_cu"], alts["ris_to_dri"],
                                    alts["ris_to_drj"])

    ch = ChannelRealization(
        direct_uav_cu=direct_uav_cu, direct_uav_dri=direct_uav_dri,
        direct_uav_drj=direct_uav_drj, direct_dt_cu=direct_dt_cu,
        direct_dt_dri=direct_dt_dri, direct_dt_drj=direct_dt_drj,
        uav_to_ris=uav_to_ris, dt_to_ris=dt_to_ris, ris_to_cu=ris_to_cu,
        ris_to_dri=ris_to_dri, ris_to_drj=ris_to_drj, seed=int(seed),
        ris_to_cu_alt=alt_cu, ris_to_dri_alt=alt_dri, ris_to_drj_alt=alt_drj)

    # Enforce the strong/weak labeling: DR_i must have the larger zero-phase
    # DT-side effective gain.
    zero = np.zeros(k)
    gain_i = effective_gain(ch.direct_dt_dri, ch.dt_to_ris, ch.ris_to_dri, zero)
    gain_j = effective_gain(ch.direct_dt_drj, ch.dt_to_ris, ch.ris_to_drj, zero)
    if gain_j > gain_i:
        ch = replace(
            ch,
            direct_uav_dri=ch.direct_uav_drj, direct_uav_drj=ch.direct_uav_dri,
            direct_dt_dri=ch.direct_dt_drj, direct_dt_drj=ch.direct_dt_dri,
            ris_to_dri=ch.ris_to_drj, ris_to_drj=ch.ris_to_dri,
            ris_to_dri_alt=ch.ris_to_drj_alt, ris_to_drj_alt=ch.ris_to_dri_alt)
    ch.validate()
    return ch
