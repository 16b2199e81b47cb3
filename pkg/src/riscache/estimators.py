"""Estimator-style wrappers around the solvers.

These follow the scikit-learn conventions (constructor stores parameters
verbatim, ``fit`` returns ``self``, learned state ends in an underscore) so
the optimizers can be configured through ``get_params``/``set_params`` and
composed with the usual tooling.
"""

import numpy as np
from sklearn.base import BaseEstimator

from . import caching
from .active import extract_rank1, solve_sdp, verify_kkt
from .exceptions import SolverError
from .passive import BCDOptions, bcd_solve, x_from_theta
from .pipeline import network_cost, run_scheme
from .scenario import ChannelSet, ScenarioConfig, compute_sinr, effective_channel
from .validation import check_complex_array, check_is_fitted, check_random_state


class ContentPlacement(BaseEstimator):
    """Cache placement for a popularity vector.

    Parameters
    ----------
    strategy : {'oc', 'fppc', 'urc', 'none'}
    cache_size : float
        Cache budget S0 in files.
    """

    def __init__(self, strategy="oc", cache_size=100):
        self.strategy = strategy
        self.cache_size = cache_size

    def fit(self, popularity, y=None):
        b = np.asarray(popularity, dtype=float)
        self.placement_ = caching.make_placement(self.strategy, b, self.cache_size)
        self.popularity_ = b
        return self

    def transform(self, popularity):
        return self.fit(popularity).placement_

    def backhaul(self, rate_targets):
        check_is_fitted(self, "placement_")
        return caching.backhaul_cost(self.placement_, self.popularity_, rate_targets)


class ActiveBeamformer(BaseEstimator):
    """Minimum-power precoder for fixed effective channels.

    ``fit(f)`` takes the K x M effective channel matrix.
    """

    def __init__(self, sinr_target=1023.0, noise_power=1e-11, tol=1e-10, check_kkt=True):
        self.sinr_target = sinr_target
        self.noise_power = noise_power
        self.tol = tol
        self.check_kkt = check_kkt

    def fit(self, f, y=None):
        f = check_complex_array(f, ndim=2, name="f")
        gammas = np.broadcast_to(np.asarray(self.sinr_target, dtype=float), (f.shape[0],))
        sol = solve_sdp(f, gammas, self.noise_power, tol=self.tol)
        self.kkt_report_ = verify_kkt(sol, f, gammas, self.noise_power)
        if self.check_kkt and not self.kkt_report_.ok:
            raise SolverError(f"KKT certificate failed: {self.kkt_report_.violations}",
                              report=self.kkt_report_)
        self.sdp_solution_ = sol
        self.precoder_ = extract_rank1(sol, f, gammas, self.noise_power)
        self.power_ = float(np.sum(np.abs(self.precoder_) ** 2))
        return self

    def predict(self, f):
        """SINR each user would see on channels ``f`` with the fitted precoder."""
        check_is_fitted(self, "precoder_")
        return compute_sinr(check_complex_array(f, ndim=2, name="f"), self.precoder_,
                            self.noise_power)


class PassiveBeamformer(BaseEstimator):
    """RIS phases that keep a given precoder feasible (penalty BCD)."""

    def __init__(self, sinr_target=1023.0, noise_power=1e-11, options=None):
        self.sinr_target = sinr_target
        self.noise_power = noise_power
        self.options = options

    def fit(self, channels, precoder, theta0=None, random_state=None):
        if not isinstance(channels, ChannelSet):
            raise TypeError("channels must be a ChannelSet")
        if theta0 is None:
            theta0 = 2 * np.pi * check_random_state(random_state).random(channels.N)
        gammas = np.broadcast_to(np.asarray(self.sinr_target, dtype=float), (channels.K,))
        self.phases_, self.state_ = bcd_solve(channels, np.asarray(precoder), theta0, gammas,
                                              self.noise_power, self.options or BCDOptions())
        return self

    def transform(self, channels):
        """Effective channels under the fitted phases."""
        check_is_fitted(self, "phases_")
        return effective_channel(channels, x_from_theta(self.phases_))


class JointOptimizer(BaseEstimator):
    """Placement plus hybrid beamforming for one channel realization.

    Parameters
    ----------
    config : ScenarioConfig or None
        System constants; defaults to ``ScenarioConfig()`` sized to the data.
    scheme : {'optimized', 'random_phase', 'no_ris'}
    caching_strategy : {'oc', 'fppc', 'urc', 'none'}
    random_state : int, Generator or None
        Source of the initial RIS phases.
    """

    def __init__(self, config=None, scheme="optimized", caching_strategy="oc",
                 random_state=None):
        self.config = config
        self.scheme = scheme
        self.caching_strategy = caching_strategy
        self.random_state = random_state

    def _config_for(self, channels):
        cfg = self.config or ScenarioConfig()
        if (cfg.M, cfg.K, cfg.N) != (channels.M, channels.K, channels.N):
            cfg = cfg.replace(M=channels.M, K=channels.K, N=channels.N,
                              rate_targets=float(cfg.rates[0]))
        return cfg

    def fit(self, channels, y=None):
        if not isinstance(channels, ChannelSet):
            raise TypeError("channels must be a ChannelSet")
        cfg = self._config_for(channels)
        theta0 = 2 * np.pi * check_random_state(self.random_state).random(channels.N)
        rep = run_scheme(self.scheme, channels, cfg, theta0, self.caching_strategy)
        self.config_ = cfg
        self.report_ = rep
        self.placement_ = rep.placement
        self.precoder_ = rep.precoder
        self.phases_ = rep.phases if self.scheme != "no_ris" else None
        self.feasible_ = rep.feasible
        self.cost_ = rep.cost
        return self

    def predict(self, channels):
        """Per-user SINR on ``channels`` with the fitted beamformers."""
        check_is_fitted(self, "report_")
        if not self.feasible_:
            raise SolverError("fit found no feasible precoder")
        if self.phases_ is None:
            f = channels.h_d
        else:
            f = effective_channel(channels, x_from_theta(self.phases_))
        return compute_sinr(f, self.precoder_, self.config_.noise_power)

    def score(self, channels, y=None):
        """Negative network cost of the fitted solution (higher is better)."""
        check_is_fitted(self, "report_")
        cfg = self.config_
        b = caching.zipf_popularity(cfg.F, cfg.zipf_eps)
        return -network_cost(self.placement_, b, cfg.rates, self.precoder_, cfg.eta).total
