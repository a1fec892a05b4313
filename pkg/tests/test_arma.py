import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from armamonitor.arma import (
    ArmaModel, Laplace, ResidualFilter, ma_infinity, pi_expansion, psi_expansion,
    reflect_roots, residuals, simulate_path, simulate_switching_path, validate_model,
)
from armamonitor.exceptions import CommonRoot, InsufficientData, NonCausal, NonInvertible, \
    NonPositiveSigma

from conftest import coefs_from_roots, root_sets

EEG_PHI = (1.65, -0.75, -0.12, 0.18)
IBM = dict(phi=(-0.40, -0.68), theta=(0.67, 0.76))


def long_division(num, den, L):
    """Power series num/den by schoolbook long division (den[0] != 0)."""
    rem = np.zeros(L + 1)
    rem[: len(num)] = num
    out = np.zeros(L + 1)
    for i in range(L + 1):
        out[i] = rem[i] / den[0]
        for j, d in enumerate(den):
            if i + j <= L:
                rem[i + j] -= out[i] * d
    return out


class TestValidate:
    def test_ar1_valid(self):
        m = validate_model(0.0, (0.5,), (), 1.0)
        assert np.allclose(m.ar_roots(), [2.0])

    def test_noncausal(self):
        with pytest.raises(NonCausal, match="0.666667"):
            validate_model(0.0, (1.5,), (), 1.0)

    def test_eeg_model_valid(self):
        m = validate_model(-207.0, EEG_PHI, (), 5.6 * math.sqrt(2))
        assert m.p == 4 and m.q == 0

    def test_noninvertible(self):
        with pytest.raises(NonInvertible):
            validate_model(0.0, (), (1.0,), 1.0)

    def test_common_root(self):
        with pytest.raises(CommonRoot):
            validate_model(0.0, (0.5,), (-0.5,), 1.0)

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_sigma(self, sigma):
        with pytest.raises(NonPositiveSigma):
            validate_model(0.0, (), (), sigma)

    def test_unit_root_rejected_by_margin(self):
        with pytest.raises(NonCausal):
            validate_model(0.0, (1.0,), (), 1.0)


class TestExpansions:
    def test_ma1_geometric(self):
        e = psi_expansion(ArmaModel.create(theta=(0.5,)), 30)
        assert np.allclose(e.coefficients, (-0.5) ** np.arange(31))
        assert e.coefficients[0] == 1.0

    def test_ar1_geometric(self):
        e = pi_expansion(ArmaModel.create(phi=(0.5,)), 30)
        assert np.allclose(e.coefficients, 0.5 ** np.arange(31))

    def test_ibm_arma22_matches_long_division(self):
        model = ArmaModel.create(**IBM)
        L = 40
        psi = psi_expansion(model, L).coefficients
        assert np.allclose(psi, long_division([1.0], model.ma_poly, L), atol=1e-13)
        ma = ma_infinity(model, L)
        assert np.allclose(ma, long_division(model.ma_poly, model.ar_poly, L), atol=1e-13)
        # alternating decay: sign changes early, geometric envelope
        assert ma[1] > 0 > ma[2] and np.abs(ma[20:]).max() < 0.1

    def test_default_truncation_makes_tail_negligible(self):
        e = psi_expansion(ArmaModel.create(theta=(0.9,)))
        assert e.tail_bound < 1e-10
        assert e.truncation_length == math.ceil(math.log(1e-12) / math.log(e.decay))

    @settings(max_examples=60, deadline=None)
    @given(root_sets(), st.integers(5, 200))
    def test_convolution_identity_and_decay(self, roots, L):
        theta = coefs_from_roots(roots, +1.0)
        model = validate_model(0.0, (), theta, 1.0)
        e = psi_expansion(model, L)
        prod = np.convolve(model.ma_poly, e.coefficients)[: L + 1]
        target = np.zeros(L + 1)
        target[0] = 1.0
        assert np.allclose(prod, target, atol=1e-10)
        ell = np.arange(L + 1)
        assert np.all(np.abs(e.coefficients) <= e.bound_k * e.decay ** ell * (1 + 1e-12))
        assert e.decay < 1


class TestSimulate:
    def test_zero_innovations(self):
        model = ArmaModel.create(mu=3.0)
        y = simulate_path(model, 50, innovations=np.zeros(50), burn_in=0)
        assert np.all(y == 3.0)

    def test_impulse_response(self):
        eps = np.zeros(10)
        eps[0] = 1.0
        y = simulate_path(ArmaModel.create(phi=(0.5,)), 10, innovations=eps, burn_in=0)
        assert np.allclose(y, 0.5 ** np.arange(10))

    def test_eeg_mean_within_three_standard_errors(self):
        model = ArmaModel.create(-207.0, EEG_PHI, (), 5.6 * math.sqrt(2))
        n = 100_000
        y = simulate_path(model, n, rng=7, family="laplace")
        se = model.sigma * ma_infinity(model, 5000).sum() / math.sqrt(n)
        assert abs(y.mean() + 207.0) < 3 * se

    def test_bit_reproducible(self):
        model = ArmaModel.create(**IBM)
        a = simulate_path(model, 500, rng=99)
        b = simulate_path(model, 500, rng=99)
        assert np.array_equal(a, b)

    def test_laplace_variance(self, rng):
        draws = Laplace(5.6).sample(rng, 1_000_000)
        assert abs(draws.var() / 62.72 - 1) < 0.01

    def test_switch_continues_recursion(self):
        before = ArmaModel.create(phi=(0.5,))
        eps = np.zeros(6)
        eps[0] = 1.0
        y = simulate_switching_path(before, ArmaModel.create(phi=(0.25,)), 6, 3, eps)
        assert np.allclose(y, [1, 0.5, 0.25, 0.0625, 0.015625, 0.00390625])


class TestResiduals:
    def test_ar1_exact(self):
        e = residuals(ArmaModel.create(phi=(0.5,)), [1.0, 0.5])
        assert e.tolist() == [0.0]

    def test_ma1_zero_initialisation(self):
        e = residuals(ArmaModel.create(theta=(0.5,)), [1.0, 1.0])
        assert e.tolist() == [1.0, 0.5]

    def test_insufficient(self):
        with pytest.raises(InsufficientData):
            residuals(ArmaModel.create(phi=(0.5, 0.1)), [1.0, 2.0])

    def test_whiteness_of_true_model_residuals(self):
        model = ArmaModel.create(0.0, IBM["phi"], IBM["theta"], 1.0)
        y = simulate_path(model, 10_002, rng=3)
        e = residuals(model, y)
        e = e - e.mean()
        r1 = np.dot(e[1:], e[:-1]) / np.dot(e, e)
        assert abs(r1) < 0.03

    @settings(max_examples=30, deadline=None)
    @given(root_sets(max_degree=2), root_sets(max_degree=2), st.integers(0, 2**31 - 1))
    def test_round_trip_recovers_innovations(self, ar_roots, ma_roots, seed):
        phi = coefs_from_roots(ar_roots, -1.0)
        theta = coefs_from_roots(ma_roots, +1.0)
        try:
            model = validate_model(1.0, phi, theta, 1.0)
        except CommonRoot:
            return
        rng = np.random.default_rng(seed)
        n, burn = 400, 300
        eps = rng.standard_normal(burn + n)
        y = simulate_path(model, n, innovations=eps, burn_in=burn)
        e_hat = residuals(model, y)
        truth = eps[burn + model.p:]
        psi = psi_expansion(model)
        # initialisation error decays like the psi tail
        t0 = min(n - model.p - 1, int(math.log(1e-9 / (100 * psi.bound_k)) / math.log(psi.decay)) + 1) \
            if psi.decay > 0 else 0
        assert np.max(np.abs(e_hat[t0:] - truth[t0:])) < 1e-6


class TestResidualFilter:
    def test_streaming_matches_batch(self, rng):
        model = ArmaModel.create(0.3, IBM["phi"], IBM["theta"], 1.0)
        y = simulate_path(model, 600, rng=rng)
        batch = residuals(model, y)
        flt = ResidualFilter.from_history(model, y[:202], batch[:200])
        stream = np.array([flt.update(v) for v in y[202:]])
        assert np.allclose(stream, batch[200:], rtol=0, atol=1e-12)


class TestReflect:
    def test_reflects_inside_root(self):
        out = reflect_roots(np.array([2.0]), -1.0)  # root at 0.5 -> 2
        assert np.allclose(out, [0.5])

    def test_valid_unchanged(self):
        c = np.array(IBM["theta"])
        assert np.array_equal(reflect_roots(c, +1.0), c)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=4))
    def test_output_always_valid(self, coefs):
        c = np.array(coefs)
        if not np.any(c):
            return
        validate_model(0.0, (), reflect_roots(c, +1.0), 1.0)
