import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from armamonitor.detectors import Scheme
from armamonitor.limits import (
    CriticalValueTable, MCConfig, bundled_table, critical_value, cusum_functional_from_path,
    empirical_quantile, functionals_from_increments, page_functional_from_path,
    simulate_cusum_functional, simulate_functionals, simulate_page_functional,
    sup_abs_bm_cdf, sup_abs_bm_quantile,
)

increments = arrays(float, st.integers(2, 120), elements=st.floats(-4, 4))
gammas = st.sampled_from([0.0, 0.1, 0.25, 0.4, 0.49])


def brute_page(x, w, gamma):
    """Double supremum by enumeration over all grid pairs (y = 0 included)."""
    best = 0.0
    for i in range(x.size):
        val = abs(w[i])
        for j in range(i + 1):
            if x[j] < 1.0:
                val = max(val, abs(w[i] - (1 - x[i]) / (1 - x[j]) * w[j]))
        best = max(best, val / x[i] ** gamma)
    return best


def reflection_cdf_by_images(c, n=400):
    """Independent form: P(sup|W| <= c) = (4/pi) sum_k (-1)^k/(2k+1) exp(-(2k+1)^2 pi^2 / (8 c^2))."""
    k = np.arange(n)
    return float(4 / np.pi * np.sum((-1.0) ** k / (2 * k + 1)
                                    * np.exp(-((2 * k + 1) ** 2) * np.pi ** 2 / (8 * c * c))))


class TestFunctionals:
    def test_zero_increments(self):
        assert simulate_cusum_functional(0.0, 100, increments=np.zeros(100)) == 0.0
        assert simulate_page_functional(0.3, 100, increments=np.zeros(100)) == 0.0

    @settings(max_examples=60, deadline=None)
    @given(increments, gammas)
    def test_page_matches_brute_force(self, inc, gamma):
        G = inc.size
        x = np.arange(1, G + 1) / G
        w = np.cumsum(inc) / np.sqrt(G)
        assert page_functional_from_path(x, w, gamma) == pytest.approx(
            brute_page(x, w, gamma), rel=1e-12, abs=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(arrays(float, st.tuples(st.integers(1, 4), st.integers(2, 80)),
                  elements=st.floats(-4, 4)))
    def test_batched_matches_single(self, inc):
        gs = [0.0, 0.25, 0.49]
        out = functionals_from_increments(inc, gs)
        for r, row in enumerate(inc):
            for g in gs:
                assert out[(Scheme.CUSUM, g)][r] == pytest.approx(
                    simulate_cusum_functional(g, row.size, increments=row), rel=1e-12)
                assert out[(Scheme.PAGE, g)][r] == pytest.approx(
                    simulate_page_functional(g, row.size, increments=row), rel=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(increments, gammas)
    def test_page_dominates_cusum(self, inc, gamma):
        assert simulate_page_functional(gamma, inc.size, increments=inc) >= \
            simulate_cusum_functional(gamma, inc.size, increments=inc)

    @settings(max_examples=60, deadline=None)
    @given(increments, st.integers(2, 4))
    def test_grid_refinement_never_decreases(self, inc, factor):
        # a fine path whose every factor-th point is the coarse grid
        G = inc.size * factor
        rng = np.random.default_rng(inc.size)
        fine_inc = rng.standard_normal(G)
        x = np.arange(1, G + 1) / G
        w = np.cumsum(fine_inc) / np.sqrt(G)
        coarse = slice(factor - 1, None, factor)
        for g in (0.0, 0.25, 0.49):
            assert cusum_functional_from_path(x, w, g) >= cusum_functional_from_path(
                x[coarse], w[coarse], g)
            assert page_functional_from_path(x, w, g) >= page_functional_from_path(
                x[coarse], w[coarse], g) - 1e-12

    @settings(max_examples=60, deadline=None)
    @given(increments)
    def test_monotone_in_gamma(self, inc):
        out = functionals_from_increments(inc, [0.0, 0.1, 0.25, 0.4, 0.49])
        for s in Scheme:
            vals = [out[(s, g)][0] for g in (0.0, 0.1, 0.25, 0.4, 0.49)]
            assert np.all(np.diff(vals) >= 0)


class TestSimulation:
    def test_invariant_to_parallelism(self):
        cfg = MCConfig(G=200, R=1000, seed=3, chunk=64)
        a = simulate_functionals([0.0, 0.25], cfg)
        b = simulate_functionals([0.0, 0.25], cfg, n_jobs=2)
        for key in a:
            assert np.array_equal(a[key], b[key])

    def test_quantile_order_statistic(self):
        d = np.arange(1, 101, dtype=float)
        assert empirical_quantile(d, 0.05) == 95.0
        assert empirical_quantile(d, 0.5) == 50.0

    def test_reflection_series_forms_agree(self):
        for c in (0.8, 1.5, 2.24, 3.0):
            assert sup_abs_bm_cdf(c) == pytest.approx(reflection_cdf_by_images(c), abs=1e-12)
        assert sup_abs_bm_quantile(0.05) == pytest.approx(2.2414, abs=5e-4)

    @pytest.mark.slow
    def test_gamma_zero_quantile_near_analytic(self):
        cfg = MCConfig(G=10_000, R=100_000, seed=11)
        d = simulate_functionals([0.0], cfg, [Scheme.CUSUM])[(Scheme.CUSUM, 0.0)]
        for alpha in (0.01, 0.05, 0.10):
            assert abs(empirical_quantile(d, alpha) - sup_abs_bm_quantile(alpha)) < 0.03


class TestTable:
    def test_round_trip(self):
        t = CriticalValueTable(mc_config=MCConfig(G=100, R=50, seed=9))
        t.add(0.25, 0.05, "page", 2.5)
        t.add(0, 0.1, Scheme.CUSUM, 1.9)
        u = CriticalValueTable.from_text(t.to_text())
        assert u.entries == t.entries and u.mc_config == t.mc_config
        assert u.get(0.25, 0.05, Scheme.PAGE) == 2.5

    def test_bundled_cache_invariants(self):
        t = bundled_table()
        if not t.entries:
            pytest.skip("no bundled cache")
        gs = sorted({g for g, *_ in t.rows()})
        als = sorted({a for _, a, *_ in t.rows()})
        for g in gs:
            for s in Scheme:
                vals = [t.get(g, a, s) for a in als]
                assert np.all(np.diff(vals) < 0)
            for a in als:
                assert t.get(g, a, Scheme.PAGE) >= t.get(g, a, Scheme.CUSUM)
        assert critical_value(0.0, 0.05, "cusum") == t.get(0.0, 0.05, "cusum")

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            critical_value(0.0, 1.0)
        with pytest.raises(ValueError):
            critical_value(0.5, 0.05)

    def test_explicit_config_is_deterministic(self):
        cfg = MCConfig(G=300, R=2000, seed=5)
        a = critical_value(0.25, 0.05, "page", cfg)
        assert a == critical_value(0.25, 0.05, "page", cfg)
        assert a >= critical_value(0.25, 0.05, "cusum", cfg)
        assert critical_value(0.25, 0.5, "page", cfg) < a
