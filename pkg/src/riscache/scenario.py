"""Geometry, path loss and small-scale fading for the RIS-aided downlink.

The BS carries a ULA along the x axis and the RIS (in the y-z plane) is
modelled as an N-element ULA along the y axis. LoS angles follow from the
node coordinates: the sine of each angle is the coordinate difference along
the array axis divided by the link distance.
"""

from dataclasses import dataclass, fields
import math

import numpy as np

from .validation import check_complex_array, check_unit_modulus


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinate in {self!r}")

    def as_array(self):
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def coerce(cls, v):
        if isinstance(v, cls):
            return v
        x, y, z = (float(c) for c in v)
        return cls(x, y, z)


def _db_to_lin(db):
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """System constants. Powers are in watts, rates in bit/s.

    ``rate_targets`` may be a scalar (shared by every user) or a length-K
    sequence. Rician factors are linear; ``math.inf`` gives a LoS-only link.
    """

    M: int = 16
    K: int = 5
    N: int = 50
    F: int = 1000
    S0: float = 100
    zipf_eps: float = 1.0
    bandwidth_B: float = 10e6
    noise_psd: float = 1e-18  # -150 dBm/Hz
    eta: float = 1.0
    rate_targets: object = 100e6
    bs_pos: Vec3 = Vec3(5.0, 0.0, 30.0)
    ris_pos: Vec3 = Vec3(0.0, 5.0, 10.0)
    user_center: Vec3 = Vec3(5.0, 10.0, 1.5)
    user_radius: float = 2.5
    alpha_direct: float = 3.5
    alpha_G: float = 2.2
    alpha_ru: float = 2.2
    rician_G: float = 10.0
    rician_ru: float = 10.0
    ref_loss_db: float = -30.0
    element_spacing: float = 0.5
    carrier_hz: float = 2.4e9

    def __post_init__(self):
        for name in ("bs_pos", "ris_pos", "user_center"):
            object.__setattr__(self, name, Vec3.coerce(getattr(self, name)))
        rt = self.rate_targets
        if np.ndim(rt) == 0:
            rt = float(rt)
        else:
            rt = tuple(float(r) for r in rt)
        object.__setattr__(self, "rate_targets", rt)
        self._validate()

    def _validate(self):
        for name in ("M", "K", "N", "F"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {v}")
        if not 0 <= self.S0 <= self.F:
            raise ValueError(f"S0 must lie in [0, F], got {self.S0}")
        for name in ("bandwidth_B", "noise_psd", "eta", "zipf_eps", "user_radius",
                     "rician_G", "rician_ru", "element_spacing", "carrier_hz"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("alpha_direct", "alpha_G", "alpha_ru"):
            if not getattr(self, name) >= 2:
                raise ValueError(f"{name} must be >= 2, got {getattr(self, name)}")
        rates = self.rates
        if rates.shape != (self.K,):
            raise ValueError(f"rate_targets must have length K={self.K}")
        if np.any(rates <= 0):
            raise ValueError("rate targets must be positive")

    @property
    def rates(self):
        """Per-user target rates R_k0 as a length-K array."""
        if np.ndim(self.rate_targets) == 0:
            return np.full(self.K, self.rate_targets)
        return np.asarray(self.rate_targets, dtype=float)

    @property
    def noise_power(self):
        """Receiver noise power sigma0^2 * B in watts."""
        return self.noise_psd * self.bandwidth_B

    @property
    def sinr_targets(self):
        """gamma_k0 = 2^(R_k0 / B) - 1."""
        return np.exp2(self.rates / self.bandwidth_B) - 1.0

    def replace(self, **changes):
        from dataclasses import replace
        return replace(self, **changes)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization: G is N x M, h_d is K x M, h_r is K x N."""

    G: np.ndarray
    h_d: np.ndarray
    h_r: np.ndarray

    def __post_init__(self):
        G = check_complex_array(self.G, ndim=2, name="G")
        h_d = check_complex_array(self.h_d, ndim=2, name="h_d")
        h_r = check_complex_array(self.h_r, ndim=2, name="h_r")
        N, M = G.shape
        if h_d.shape[1] != M or h_r.shape != (h_d.shape[0], N):
            raise ValueError(
                f"inconsistent shapes G={G.shape}, h_d={h_d.shape}, h_r={h_r.shape}")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h_d", h_d)
        object.__setattr__(self, "h_r", h_r)

    @property
    def M(self):
        return self.G.shape[1]

    @property
    def N(self):
        return self.G.shape[0]

    @property
    def K(self):
        return self.h_d.shape[0]

    def without_ris(self):
        """Copy with the reflected path removed."""
        return ChannelSet(self.G, self.h_d, np.zeros_like(self.h_r))


def path_loss(d, alpha, ref_loss_db=-30.0):
    """Linear power gain rho0 * (d / 1 m)^(-alpha)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    out = _db_to_lin(ref_loss_db) * d ** (-float(alpha))
    return float(out) if out.ndim == 0 else out


def array_response(n_elems, spacing, angle):
    """ULA steering vector exp(j 2 pi spacing i sin(angle)), i = 0..n-1."""
    if n_elems < 1:
        raise ValueError("n_elems must be >= 1")
    i = np.arange(n_elems)
    return np.exp(1j * 2 * np.pi * spacing * i * np.sin(angle))


def place_users(cfg, rng):
    """Draw K user positions uniformly on the disc around ``user_center``."""
    c = cfg.user_center
    r = cfg.user_radius * np.sqrt(rng.random(cfg.K))
    phi = 2 * np.pi * rng.random(cfg.K)
    return [Vec3(c.x + ri * np.cos(p), c.y + ri * np.sin(p), c.z) for ri, p in zip(r, phi)]


def _cn(rng, shape):
    # real/imag interleaved per entry so leading-axis prefixes are stable
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / np.sqrt(2)


def _rician_weights(kf):
    if math.isinf(kf):
        return 1.0, 0.0
    return math.sqrt(kf / (kf + 1)), math.sqrt(1 / (kf + 1))


def _distance(a, b):
    d = float(np.linalg.norm(a.as_array() - b.as_array()))
    if d <= 0:
        raise ValueError(f"coincident nodes {a} and {b}")
    return d


def gen_channels(cfg, user_positions, rng):
    """Draw one ChannelSet.

    Each block (h_d, G, h_r) uses its own child stream, and NLoS draws are
    laid out so that the first N RIS rows do not depend on the total N.
    Realizations with different N but the same generator are thus nested.
    """
    users = [Vec3.coerce(u) for u in user_positions]
    if len(users) != cfg.K:
        raise ValueError(f"expected {cfg.K} user positions, got {len(users)}")
    M, N, K = cfg.M, cfg.N, cfg.K
    bs, ris = cfg.bs_pos, cfg.ris_pos
    rng_d, rng_g, rng_r = rng.spawn(3)

    d_d = np.array([_distance(bs, u) for u in users])
    h_d = np.sqrt(path_loss(d_d, cfg.alpha_direct, cfg.ref_loss_db))[:, None] * _cn(rng_d, (K, M))

    d_G = _distance(bs, ris)
    aod_bs = np.arcsin((ris.x - bs.x) / d_G)
    aoa_ris = np.arcsin((bs.y - ris.y) / d_G)
    G_los = np.outer(array_response(N, cfg.element_spacing, aoa_ris),
                     array_response(M, cfg.element_spacing, aod_bs).conj())
    w_los, w_nlos = _rician_weights(cfg.rician_G)
    G_nlos = _cn(rng_g, (N, M))
    G = math.sqrt(path_loss(d_G, cfg.alpha_G, cfg.ref_loss_db)) * (w_los * G_los + w_nlos * G_nlos)

    w_los, w_nlos = _rician_weights(cfg.rician_ru)
    hr_nlos = _cn(rng_r, (N, K)).T
    h_r = np.empty((K, N), dtype=complex)
    for k, u in enumerate(users):
        d_r = _distance(ris, u)
        aod = np.arcsin((u.y - ris.y) / d_r)
        los = array_response(N, cfg.element_spacing, aod)
        h_r[k] = math.sqrt(path_loss(d_r, cfg.alpha_ru, cfg.ref_loss_db)) * (
            w_los * los + w_nlos * hr_nlos[k])
    return ChannelSet(G, h_d, h_r)


def effective_channel(ch, x):
    """Rows f_k with f_k^H = h_d,k^H + h_r,k^H diag(x) G; returns K x M."""
    x = check_unit_modulus(x)
    if x.shape != (ch.N,):
        raise ValueError(f"phase vector has length {x.shape[0]}, expected N={ch.N}")
    return ch.h_d + (ch.h_r * x.conj()) @ ch.G.conj()


def compute_sinr(f, P, noise_power):
    """SINR of every user for effective channels ``f`` (K x M) and precoder ``P`` (M x K)."""
    f = np.asarray(f)
    P = np.asarray(P)
    gains = np.abs(f.conj() @ P) ** 2  # gains[k, l] = |f_k^H p_l|^2
    sig = np.diag(gains)
    interf = gains.sum(axis=1) - sig
    return sig / (interf + noise_power)
