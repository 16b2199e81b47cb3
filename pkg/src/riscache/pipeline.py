"""Network cost and the alternating placement / hybrid beamforming optimizer."""

from dataclasses import dataclass, field
import logging

import numpy as np

from . import caching
from .active import solve_active
from .exceptions import InfeasibleError, SolverError
from .passive import BCDOptions, bcd_solve, x_from_theta
from .scenario import effective_channel

logger = logging.getLogger(__name__)

SCHEMES = ("optimized", "random_phase", "no_ris")


@dataclass(frozen=True)
class NetworkCost:
    """Backhaul (Mbps) plus eta times transmit power (mW)."""

    backhaul: float
    power: float
    total: float

    @property
    def backhaul_bps(self):
        return self.backhaul * 1e6

    @property
    def power_w(self):
        return self.power * 1e-3


@dataclass
class OuterOptions:
    tol: float = 1e-4
    max_outer: int = 30
    backoffs: tuple = (0.5, 0.9, 0.99)
    bcd: BCDOptions = field(default_factory=BCDOptions)


@dataclass
class OptimizationReport:
    scheme: str
    placement: np.ndarray
    popularity: np.ndarray
    precoder: np.ndarray = None
    phases: np.ndarray = None
    cost_trace: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    feasible: bool = True
    message: str = ""

    @property
    def cost(self):
        return self.cost_trace[-1] if self.cost_trace else None

    @property
    def power(self):
        """Transmit power in watts (nan when infeasible)."""
        if self.precoder is None:
            return float("nan")
        return float(np.sum(np.abs(self.precoder) ** 2))


def network_cost(c, b, rate_targets, P, eta):
    """Evaluate backhaul + eta * power with backhaul in Mbps and power in mW."""
    backhaul = caching.backhaul_cost(c, b, rate_targets) * 1e-6
    power = float(np.sum(np.abs(np.asarray(P)) ** 2)) * 1e3
    return NetworkCost(backhaul=backhaul, power=power, total=backhaul + eta * power)


def _placement(cfg, strategy):
    b = caching.zipf_popularity(cfg.F, cfg.zipf_eps)
    return b, caching.make_placement(strategy, b, cfg.S0)


def _active(ch, theta, cfg):
    f = effective_channel(ch, x_from_theta(theta))
    return solve_active(f, cfg.sinr_targets, cfg.noise_power)


def _random_theta(cfg, rng):
    return 2 * np.pi * rng.random(cfg.N)


def alternating_optimize(ch, cfg, rng=None, theta0=None, caching_strategy="oc", opts=None):
    """Jointly choose content placement, precoder and RIS phases.

    The placement is solved once, independently of the beamformers. The
    beamformers then alternate: a minimum-power precoder for the current
    phases, followed by a phase update. Started from the SDP optimum the
    current phases already satisfy every SINR target, so the phase update
    asks BCD for phases under which a power-reduced precoder sqrt(beta) P
    stays feasible, trying each beta in ``opts.backoffs`` in turn. A
    candidate is accepted only if the re-optimised precoder lowers the
    network cost, so the cost trace never increases. The loop ends when
    the relative decrease falls below ``opts.tol`` or no candidate helps.
    """
    opts = opts or OuterOptions()
    b, c = _placement(cfg, caching_strategy)
    report = OptimizationReport("optimized", placement=c, popularity=b)
    if theta0 is None:
        theta0 = _random_theta(cfg, rng if rng is not None else np.random.default_rng())
    theta = np.asarray(theta0, dtype=float)
    rates, gammas, noise = cfg.rates, cfg.sinr_targets, cfg.noise_power

    try:
        P, _ = _active(ch, theta, cfg)
    except (InfeasibleError, SolverError) as exc:
        report.feasible = False
        report.phases = theta
        report.message = str(exc)
        return report
    cost = network_cost(c, b, rates, P, cfg.eta)
    report.cost_trace.append(cost)

    for t in range(opts.max_outer):
        report.iterations = t + 1
        accepted = None
        for beta in opts.backoffs:
            cand, _state = bcd_solve(ch, np.sqrt(beta) * P, theta, gammas, noise, opts.bcd)
            try:
                P_c, _ = _active(ch, cand, cfg)
            except (InfeasibleError, SolverError) as exc:
                logger.debug("rejecting phase candidate (beta=%s): %s", beta, exc)
                continue
            cost_c = network_cost(c, b, rates, P_c, cfg.eta)
            if cost_c.total < cost.total:
                accepted = (cand, P_c, cost_c)
                break
        if accepted is None:
            report.converged = True
            report.message = "no phase update lowers the cost"
            break
        prev = cost.total
        theta, P, cost = accepted
        report.cost_trace.append(cost)
        if prev - cost.total <= opts.tol * abs(prev):
            report.converged = True
            report.message = "relative cost decrease below tolerance"
            break
    else:
        report.message = "outer iteration limit reached"

    report.precoder = P
    report.phases = theta
    return report


def scheme_random_phase(ch, cfg, rng=None, theta0=None, caching_strategy="oc"):
    """Random RIS phases, minimum-power precoder for those phases."""
    b, c = _placement(cfg, caching_strategy)
    if theta0 is None:
        theta0 = _random_theta(cfg, rng if rng is not None else np.random.default_rng())
    report = OptimizationReport("random_phase", placement=c, popularity=b,
                                phases=np.asarray(theta0, dtype=float))
    return _single_shot(report, ch, report.phases, cfg)


def scheme_no_ris(ch, cfg, caching_strategy="oc"):
    """Reflected path removed; precoder designed on the direct channels."""
    b, c = _placement(cfg, caching_strategy)
    report = OptimizationReport("no_ris", placement=c, popularity=b)
    try:
        P, _ = solve_active(ch.h_d, cfg.sinr_targets, cfg.noise_power)
    except (InfeasibleError, SolverError) as exc:
        report.feasible = False
        report.message = str(exc)
        return report
    return _finish(report, P, cfg)


def _single_shot(report, ch, theta, cfg):
    try:
        P, _ = _active(ch, theta, cfg)
    except (InfeasibleError, SolverError) as exc:
        report.feasible = False
        report.message = str(exc)
        return report
    return _finish(report, P, cfg)


def _finish(report, P, cfg):
    report.precoder = P
    report.cost_trace.append(network_cost(report.placement, report.popularity,
                                          cfg.rates, P, cfg.eta))
    report.converged = True
    report.iterations = 1
    return report


def run_scheme(scheme, ch, cfg, theta0, caching_strategy="oc", opts=None):
    """Dispatch on a communication scheme name, sharing the initial phases."""
    if scheme == "optimized":
        return alternating_optimize(ch, cfg, theta0=theta0, caching_strategy=caching_strategy,
                                    opts=opts)
    if scheme == "random_phase":
        return scheme_random_phase(ch, cfg, theta0=theta0, caching_strategy=caching_strategy)
    if scheme == "no_ris":
        return scheme_no_ris(ch, cfg, caching_strategy=caching_strategy)
    raise ValueError(f"unknown scheme {scheme!r}")
