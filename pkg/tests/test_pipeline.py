import numpy as np
import pytest

from riscache import caching
from riscache.active import solve_active
from riscache.pipeline import (SCHEMES, NetworkCost, alternating_optimize, network_cost,
                               run_scheme, scheme_no_ris, scheme_random_phase)
from riscache.scenario import ChannelSet, ScenarioConfig

from .conftest import crandn, make_instance


def no_reflection(ch):
    return ChannelSet(G=ch.G, h_d=ch.h_d, h_r=np.zeros_like(ch.h_r))


class TestNetworkCost:
    def test_eta_zero(self, rng):
        b = caching.zipf_popularity(20, 1)
        c = caching.optimize_placement(b, 4)
        cost = network_cost(c, b, [1e8, 1e8], crandn(rng, 4, 2), 0.0)
        assert cost.total == cost.backhaul

    def test_full_cache(self, rng):
        b = caching.zipf_popularity(20, 1)
        P = 0.1 * crandn(rng, 4, 2)
        cost = network_cost(np.ones(20), b, [1e8, 1e8], P, 2.5)
        assert cost.backhaul == 0.0
        assert cost.total == pytest.approx(2.5 * 1e3 * np.sum(np.abs(P) ** 2), rel=1e-15)

    def test_term_oracle(self, rng):
        F, K, M = 15, 3, 4
        c, b = rng.random(F), rng.random(F)
        b /= b.sum()
        rates = rng.uniform(1e7, 1e8, K)
        P = 0.05 * crandn(rng, M, K)
        eta = 0.7
        backhaul = 0.0
        for f in range(F):
            for k in range(K):
                backhaul += (1 - c[f]) * b[f] * rates[k]
        power = 0.0
        for m in range(M):
            for k in range(K):
                power += abs(P[m, k]) ** 2
        cost = network_cost(c, b, rates, P, eta)
        assert cost.backhaul == pytest.approx(backhaul / 1e6, rel=1e-12)
        assert cost.power == pytest.approx(power * 1e3, rel=1e-12)
        assert cost.total == cost.backhaul + eta * cost.power
        assert cost.backhaul_bps == pytest.approx(backhaul, rel=1e-12)
        assert cost.power_w == pytest.approx(power, rel=1e-12)

    def test_frozen(self):
        with pytest.raises(AttributeError):
            NetworkCost(1.0, 2.0, 3.0).total = 0.0


def test_sinr_target_conversion():
    g = ScenarioConfig(rate_targets=100e6, bandwidth_B=10e6).sinr_targets
    assert g[0] == 1023.0
    assert 10 * np.log10(g[0]) == pytest.approx(30.1, abs=0.01)


class TestAlternating:
    def test_single_user_without_reflection(self, rng):
        cfg, ch = make_instance(1, M=8, K=1, N=16)
        ch = no_reflection(ch)
        rep = alternating_optimize(ch, cfg, rng=rng)
        assert rep.feasible and rep.converged
        assert rep.iterations == 1
        expected = cfg.sinr_targets[0] * cfg.noise_power / np.sum(np.abs(ch.h_d) ** 2)
        assert rep.power == pytest.approx(expected, rel=1e-8)
        b = caching.zipf_popularity(cfg.F, cfg.zipf_eps)
        np.testing.assert_array_equal(rep.placement, caching.optimize_placement(b, cfg.S0))

    def test_monotone_power_trace(self):
        for seed in range(4):
            cfg, ch = make_instance(seed, M=8, K=3, N=32)
            rep = alternating_optimize(ch, cfg, rng=np.random.default_rng(seed))
            totals = [c.total for c in rep.cost_trace]
            powers = [c.power for c in rep.cost_trace]
            assert np.all(np.diff(totals) <= 1e-8)
            assert np.all(np.diff(powers) <= 1e-8)

    def test_decoupled_placement(self):
        cfg, ch = make_instance(2, M=4, K=2, N=8, F=60, S0=7.5, zipf_eps=0.6)
        b = caching.zipf_popularity(cfg.F, cfg.zipf_eps)
        for strategy in ("oc", "fppc", "urc"):
            rep = alternating_optimize(ch, cfg, rng=np.random.default_rng(0),
                                       caching_strategy=strategy)
            assert rep.placement.tobytes() == \
                caching.make_placement(strategy, b, cfg.S0).tobytes()

    def test_infeasible_marked(self):
        cfg, ch = make_instance(3, M=1, K=2, N=4)
        rep = alternating_optimize(ch, cfg, rng=np.random.default_rng(0))
        assert not rep.feasible
        assert np.isnan(rep.power)
        assert rep.cost is None


class TestSchemes:
    def test_random_phase_without_reflection(self, rng):
        cfg, ch = make_instance(4, M=4, K=2, N=8)
        ch = no_reflection(ch)
        a = scheme_random_phase(ch, cfg, rng=rng)
        b = scheme_no_ris(ch, cfg)
        assert a.power == pytest.approx(b.power, rel=1e-8)

    def test_random_phase_deterministic(self):
        cfg, ch = make_instance(5, M=4, K=2, N=8)
        a = scheme_random_phase(ch, cfg, rng=np.random.default_rng(9))
        b = scheme_random_phase(ch, cfg, rng=np.random.default_rng(9))
        assert a.precoder.tobytes() == b.precoder.tobytes()

    def test_no_ris_independent_of_n(self):
        users_seed = 6
        powers = []
        for N in (4, 16, 64):
            cfg, ch = make_instance(users_seed, M=4, K=2, N=N)
            powers.append(scheme_no_ris(ch, cfg).power)
        assert powers[0] == powers[1] == powers[2]

    def test_no_ris_matches_solve_active(self):
        cfg, ch = make_instance(7, M=4, K=3, N=8)
        P, power = solve_active(ch.h_d, cfg.sinr_targets, cfg.noise_power)
        rep = scheme_no_ris(ch, cfg)
        assert rep.precoder.tobytes() == P.tobytes()
        assert rep.power == power

    def test_ordering(self):
        for seed in range(4):
            cfg, ch = make_instance(20 + seed, M=8, K=3, N=32)
            theta0 = 2 * np.pi * np.random.default_rng(seed).random(cfg.N)
            opt = run_scheme("optimized", ch, cfg, theta0)
            rnd = run_scheme("random_phase", ch, cfg, theta0)
            nor = run_scheme("no_ris", ch, cfg, theta0)
            assert opt.power <= rnd.power * (1 + 1e-6)
            assert opt.power <= nor.power * (1 + 1e-6)

    def test_unknown_scheme(self, small_instance):
        cfg, ch = small_instance
        with pytest.raises(ValueError):
            run_scheme("greedy", ch, cfg, np.zeros(cfg.N))

    def test_scheme_names(self):
        assert set(SCHEMES) == {"optimized", "random_phase", "no_ris"}
