import itertools

from hypothesis import given, settings, strategies as st
import numpy as np
import pytest

from riscache.caching import (backhaul_cost, check_placement, fppc_placement, make_placement,
                              optimize_placement, placement_objective, urc_placement,
                              zipf_popularity)


class TestZipf:
    def test_three_files(self):
        np.testing.assert_allclose(zipf_popularity(3, 1.0), [6 / 11, 3 / 11, 2 / 11], rtol=1e-15)

    def test_flat(self):
        np.testing.assert_allclose(zipf_popularity(5, 0.0), np.full(5, 0.2), rtol=1e-15)

    @given(st.integers(1, 2000), st.floats(0, 4))
    def test_normalized_nonincreasing(self, F, eps):
        b = zipf_popularity(F, eps)
        assert abs(b.sum() - 1) <= 1e-12
        assert np.all(np.diff(b) <= 0)

    @pytest.mark.parametrize("F,eps", [(0, 1.0), (10, -0.5)])
    def test_invalid(self, F, eps):
        with pytest.raises(ValueError):
            zipf_popularity(F, eps)


class TestOptimal:
    def test_greedy(self):
        np.testing.assert_array_equal(optimize_placement(zipf_popularity(4, 1), 2), [1, 1, 0, 0])

    def test_full_cache(self):
        b = zipf_popularity(6, 0.8)
        c = optimize_placement(b, 6)
        np.testing.assert_array_equal(c, 1.0)
        assert placement_objective(c, b) == 0.0

    def test_fractional(self):
        b = np.array([0.5, 0.3, 0.2])
        c = optimize_placement(b, 1.5)
        np.testing.assert_allclose(c, [1, 0.5, 0])
        assert placement_objective(c, b) == pytest.approx(0.35, abs=1e-15)

    def test_brute_force_grid(self):
        b = np.array([0.5, 0.3, 0.2])
        grid = np.round(np.arange(0, 101) * 0.01, 2)
        best = np.inf
        for c1, c2 in itertools.product(grid, grid):
            c3 = max(0.0, round(1.5 - c1 - c2, 2))
            if c3 > 1 or c1 + c2 + c3 > 1.5 + 1e-12:
                continue
            best = min(best, placement_objective([c1, c2, c3], b))
        assert placement_objective(optimize_placement(b, 1.5), b) <= best + 1e-12
        assert best == pytest.approx(0.35, abs=1e-12)

    def test_ties_lower_index_first(self):
        np.testing.assert_array_equal(optimize_placement([0.25, 0.25, 0.25, 0.25], 1.5),
                                      [1, 0.5, 0, 0])

    def test_unsorted_input(self):
        np.testing.assert_allclose(optimize_placement([0.2, 0.5, 0.3], 1.5), [0, 1, 0.5])

    def test_negative_budget(self):
        with pytest.raises(ValueError):
            optimize_placement([0.5, 0.5], -1)

    @settings(max_examples=50)
    @given(st.integers(1, 300), st.floats(0, 3), st.floats(0, 1))
    def test_dominates_baselines(self, F, eps, frac):
        b = zipf_popularity(F, eps)
        S0 = frac * F
        oc = optimize_placement(b, S0)
        for c in (oc, urc_placement(F, S0), fppc_placement(b, S0)):
            check_placement(c, S0)
            assert placement_objective(oc, b) <= placement_objective(c, b) + 1e-12

    def test_rate_scaling_invariance(self):
        # the placement does not depend on the rate targets; the cost scales linearly
        b = zipf_popularity(50, 1.1)
        c = optimize_placement(b, 7.3)
        assert backhaul_cost(c, b, [3e6, 4e6]) == pytest.approx(
            7 * backhaul_cost(c, b, [1e6]), rel=1e-12)


class TestUrc:
    def test_default_setting(self):
        np.testing.assert_array_equal(urc_placement(1000, 100), np.full(1000, 0.1))

    def test_full(self):
        np.testing.assert_array_equal(urc_placement(7, 7), 1.0)

    def test_budget_identity(self):
        assert urc_placement(40, 12).sum() == pytest.approx(12, rel=1e-15)

    @given(st.floats(0, 3))
    def test_backhaul_eps_independent(self, eps):
        F, S0, rates = 200, 20, [100e6] * 5
        assert backhaul_cost(urc_placement(F, S0), zipf_popularity(F, eps), rates) == \
            pytest.approx((1 - S0 / F) * 500e6, rel=1e-12)


class TestFppc:
    def test_uniform_matches_urc(self):
        np.testing.assert_allclose(fppc_placement(np.full(8, 1 / 8), 3), urc_placement(8, 3),
                                   rtol=1e-15)

    def test_full(self):
        np.testing.assert_allclose(fppc_placement(zipf_popularity(9, 1), 9), 1.0)

    def test_capping_by_hand(self):
        np.testing.assert_allclose(fppc_placement(np.array([0.7, 0.2, 0.1]), 2),
                                   [1, 2 / 3, 1 / 3], rtol=1e-14)

    @given(st.integers(2, 500), st.floats(0, 3), st.floats(0, 1))
    def test_feasible_and_spends_budget(self, F, eps, frac):
        b = zipf_popularity(F, eps)
        S0 = frac * F
        c = fppc_placement(b, S0)
        check_placement(c, S0)
        assert c.sum() == pytest.approx(S0, abs=1e-9)


class TestBackhaul:
    def test_nothing_cached(self):
        b = zipf_popularity(100, 1)
        assert backhaul_cost(np.zeros(100), b, [100e6] * 5) == pytest.approx(500e6, rel=1e-12)

    def test_everything_cached(self):
        b = zipf_popularity(100, 1)
        assert backhaul_cost(np.ones(100), b, [100e6] * 5) == 0.0

    def test_loop_oracle(self, rng):
        F, K = 30, 4
        c, b = rng.random(F), rng.random(F)
        b /= b.sum()
        rates = rng.uniform(1e6, 1e8, K)
        ref = sum((1 - c[f]) * b[f] * rates[k] for f in range(F) for k in range(K))
        assert backhaul_cost(c, b, rates) == pytest.approx(ref, rel=1e-12)

    def test_unnormalized_popularity(self):
        with pytest.raises(ValueError):
            backhaul_cost(np.zeros(3), np.ones(3), [1.0])

    def test_constant_placement_exact(self):
        # bit-identical across popularity profiles
        vals = {backhaul_cost(urc_placement(200, 20), zipf_popularity(200, e), [1e8] * 3)
                for e in np.linspace(0, 3, 31)}
        assert vals == {(1 - 0.1) * 3e8}

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            backhaul_cost(np.zeros(3), np.ones(4) / 4, [1.0])


class TestDispatch:
    @pytest.mark.parametrize("name", ["oc", "fppc", "urc", "none"])
    def test_known(self, name):
        c = make_placement(name, zipf_popularity(10, 1), 3)
        check_placement(c, 3)

    def test_unknown(self):
        with pytest.raises(ValueError):
            make_placement("lru", zipf_popularity(10, 1), 3)

    def test_check_placement_rejects(self):
        with pytest.raises(ValueError):
            check_placement([0.5, 1.2], 2)
        with pytest.raises(ValueError):
            check_placement([1.0, 1.0], 1.5)
