import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from riscache.caching import optimize_placement, zipf_popularity
from riscache.estimators import (ActiveBeamformer, ContentPlacement, JointOptimizer,
                                 PassiveBeamformer)
from riscache.scenario import effective_channel

from .conftest import crandn, make_instance


def test_params_round_trip():
    est = ActiveBeamformer(sinr_target=10.0, noise_power=2e-11)
    assert est.get_params()["sinr_target"] == 10.0
    c = clone(est.set_params(tol=1e-9))
    assert c.get_params()["tol"] == 1e-9


class TestContentPlacement:
    def test_fit(self):
        b = zipf_popularity(30, 0.9)
        est = ContentPlacement("oc", cache_size=4.5)
        assert est.fit(b) is est
        np.testing.assert_array_equal(est.placement_, optimize_placement(b, 4.5))
        assert est.backhaul([1e8]) == pytest.approx((1 - b[:4].sum() - 0.5 * b[4]) * 1e8)

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            ContentPlacement().backhaul([1e8])


class TestActive:
    def test_fit_predict(self, rng):
        f = 1e-2 * crandn(rng, 3, 6)
        est = ActiveBeamformer(sinr_target=100.0).fit(f)
        np.testing.assert_allclose(est.predict(f), 100.0, rtol=1e-6)
        assert est.kkt_report_.ok
        assert est.power_ == pytest.approx(est.sdp_solution_.primal_obj, rel=1e-6)

    def test_not_fitted(self, rng):
        with pytest.raises(NotFittedError):
            ActiveBeamformer().predict(crandn(rng, 2, 2))


class TestPassive:
    def test_fit_transform(self):
        cfg, ch = make_instance(0, M=8, K=2, N=32)
        r = np.random.default_rng(1)
        f0 = effective_channel(ch, np.exp(2j * np.pi * r.random(ch.N)))
        P = ActiveBeamformer(cfg.sinr_targets[0], cfg.noise_power).fit(f0).precoder_
        est = PassiveBeamformer(cfg.sinr_targets[0], cfg.noise_power)
        est.fit(ch, P, random_state=2)
        assert est.transform(ch).shape == (ch.K, ch.M)
        assert np.all((est.phases_ >= 0) & (est.phases_ < 2 * np.pi))

    def test_type_check(self):
        with pytest.raises(TypeError):
            PassiveBeamformer().fit(np.zeros((2, 2)), np.zeros((2, 2)))


class TestJoint:
    def test_fit_score(self):
        cfg, ch = make_instance(3, M=4, K=2, N=8, F=50, S0=5)
        opt = JointOptimizer(cfg, random_state=0).fit(ch)
        nor = JointOptimizer(cfg, scheme="no_ris").fit(ch)
        assert opt.feasible_ and nor.phases_ is None
        np.testing.assert_allclose(opt.predict(ch), cfg.sinr_targets, rtol=1e-4)
        assert opt.score(ch) == pytest.approx(-opt.cost_.total)
        assert opt.score(ch) >= nor.score(ch) - 1e-6

    def test_resizes_default_config(self):
        _, ch = make_instance(4, M=4, K=2, N=8)
        est = JointOptimizer(scheme="no_ris").fit(ch)
        assert (est.config_.M, est.config_.K, est.config_.N) == (4, 2, 8)
