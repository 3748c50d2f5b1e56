"""Infinite-width kernel recursion, quadrature oracles, normality testing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from onebitae import autoencoder as ae
from onebitae import channel as ch
from onebitae import gptheory as gp
from onebitae import harness as hz


def psd_states():
    return st.builds(
        lambda a, b, rho: gp.KernelState(a, rho * math.sqrt(a * b), b),
        st.floats(0.01, 10.0), st.floats(0.01, 10.0), st.floats(-0.999, 0.999))


class TestKernelState:
    def test_rejects_non_psd(self):
        with pytest.raises(ValueError):
            gp.KernelState(1.0, 2.0, 1.0)
        with pytest.raises(ValueError):
            gp.KernelState(-1.0, 0.0, 1.0)

    def test_correlation_clamped(self):
        s = gp.KernelState(4.0, 2.0, 4.0)
        assert np.isclose(s.correlation, 0.5)
        assert gp.KernelState(0.0, 0.0, 1.0).correlation == 0.0


class TestKernelStep:
    def test_relu_perfectly_correlated(self):
        s = gp.kernel_step(gp.KernelState(1.0, 1.0, 1.0), "relu", 2.0, 0.0)
        assert np.isclose(s.k_zz, 1.0)
        assert np.isclose(s.k_zhz, 1.0)

    def test_sign_zero_correlation(self):
        s = gp.kernel_step(gp.KernelState(1.0, 0.0, 1.0), "sign", 2.0, 0.3)
        assert np.isclose(s.k_zhz, 0.3)
        assert np.isclose(s.k_zz, 2.3)

    def test_sign_diagonal_scale_free(self):
        for scale in (0.1, 1.0, 25.0):
            s = gp.kernel_step(gp.KernelState(scale, 0.0, scale), "sign",
                               2.0, 0.5)
            assert np.isclose(s.k_zz, 2.5)
            assert np.isclose(s.k_hzhz, 2.5)

    def test_linear_entrywise(self):
        s = gp.kernel_step(gp.KernelState(2.0, 1.0, 3.0), "linear", 0.5, 0.1)
        assert np.isclose(s.k_zz, 1.1)
        assert np.isclose(s.k_zhz, 0.6)
        assert np.isclose(s.k_hzhz, 1.6)

    def test_unknown_activation(self):
        with pytest.raises(ValueError):
            gp.kernel_step(gp.KernelState(1.0, 0.0, 1.0), "swish", 1.0, 0.0)

    @settings(max_examples=100, deadline=None)
    @given(psd_states(), st.sampled_from(["linear", "relu", "sign"]))
    def test_psd_preserved(self, state, activation):
        out = gp.kernel_step(state, activation, 2.0, 0.01)
        assert out.k_zz >= 0 and out.k_hzhz >= 0
        assert abs(out.correlation) <= 1.0

    def test_relu_correlation_monotone(self):
        rhos = np.linspace(-0.99, 0.99, 41)
        outs = [gp.kernel_step(gp.KernelState(1.0, r, 1.0), "relu", 2.0, 0.0)
                     .correlation for r in rhos]
        assert np.all(np.diff(outs) >= -1e-12)


class TestQuadratureOracles:
    def test_relu_grid(self):
        for rho in np.linspace(-0.99, 0.99, 21):
            closed = gp._relu_expect(1.0, 1.0, rho)
            quad = gp.quadrature_relu_cross(1.0, 1.0, rho)
            assert abs(closed - quad) < 1e-8

    def test_relu_unequal_variances(self):
        closed = gp._relu_expect(2.0, 0.5, 0.3)
        quad = gp.quadrature_relu_cross(2.0, 0.5, 0.3)
        assert abs(closed - quad) < 1e-8

    def test_sign_grid(self):
        for rho in np.linspace(-0.99, 0.99, 21):
            assert abs(gp._sign_expect(rho) - gp.quadrature_sign_cross(rho)) < 1e-8

    def test_generic_cross_matches_relu(self):
        relu = lambda x: np.maximum(x, 0.0)
        got = gp.quadrature_cross(relu, 1.0, 1.0, 0.4)
        assert abs(got - gp._relu_expect(1.0, 1.0, 0.4)) < 1e-7

    def test_moment_matches_relu_diag(self):
        relu = lambda x: np.maximum(x, 0.0)
        assert abs(gp.quadrature_moment(relu, 2.0) - 1.0) < 1e-9

    def test_sigmoid_tends_to_sign(self):
        state = gp.KernelState(1.0, 0.5, 1.0)
        target = gp.kernel_step(state, "sign", 1.0, 0.0)
        prev_err = np.inf
        for tau in (1.0, 0.1, 0.01):
            s = gp.kernel_step(state, "sigmoid", 1.0, 0.0, temperature=tau)
            err = abs(s.k_zhz - target.k_zhz) + abs(s.k_zz - target.k_zz)
            assert err < prev_err
            prev_err = err
        assert prev_err < 0.02


class TestComposeKernel:
    def test_empty_layers(self):
        with pytest.raises(ValueError):
            gp.compose_kernel(np.eye(2), [])

    def test_all_linear_product(self):
        gram = np.array([[2.0, 1.0], [1.0, 3.0]])
        out = gp.compose_kernel(gram, [("linear", 0.5, 0.0),
                                       ("linear", 4.0, 0.0)])
        assert np.isclose(out.k_zz, 2.0 * 0.5 * 4.0)
        assert np.isclose(out.k_zhz, 1.0 * 0.5 * 4.0)

    def test_identical_inputs_symmetric(self):
        g_row = ch.pulse_autocorr(ch.PulseSpec(), 3, 6)
        gram = np.array([[1.5, 1.5], [1.5, 1.5]])
        out = gp.compose_kernel(gram, gp.paper_stack(g_row, 1.0, 0.1, 2.0, 0.01))
        assert np.isclose(out.k_zz, out.k_hzhz)
        assert np.isclose(out.correlation, 1.0)

    def test_dangling_channel_layer(self):
        spec = gp.ChannelLayerSpec(np.array([1.0, 0.5]))
        with pytest.raises(ValueError):
            gp.compose_kernel(np.eye(2), [("linear", 1.0, 0.0), spec])

    def test_empirical_convergence_trend(self):
        # Width sequence 1, 4, 16, 64: error to the analytic kernel shrinks.
        rng = np.random.default_rng(5)
        d, d_hat = rng.standard_normal(4), rng.standard_normal(4)
        g_row = ch.pulse_autocorr(ch.PulseSpec(), 3, 6)
        ana = gp.analytic_kernel_for_inputs(d, d_hat, g_row, 1.0, 0.1, 2.0, 0.01)
        ref = np.array([ana.k_zz, ana.k_zhz, ana.k_hzhz])
        rows = gp.empirical_kernel(d, d_hat, [1, 4, 16, 64], 600, 5,
                                   isi_first_row=g_row, rho=1.0, sigma_z2=0.1,
                                   sigma_theta2=2.0, sigma_b2=0.01)
        errs = [np.max(np.abs(np.array([r["k_zz"], r["k_zhz"], r["k_hzhz"]])
                              - ref) / np.abs(ref)) for r in rows]
        # Weakly decreasing allowing MC noise: the widest width must beat
        # the narrowest by a clear margin and end under 10%.
        assert errs[-1] < errs[0]
        assert errs[-1] < 0.10

    def test_empirical_identical_inputs(self):
        rng = np.random.default_rng(6)
        d = rng.standard_normal(4)
        g_row = ch.pulse_autocorr(ch.PulseSpec(), 3, 6)
        row = gp.empirical_kernel(d, d, [32], 300, 6, isi_first_row=g_row,
                                  rho=1.0, sigma_z2=0.1, sigma_theta2=2.0,
                                  sigma_b2=0.01)[0]
        corr = row["k_zhz"] / math.sqrt(row["k_zz"] * row["k_hzhz"])
        assert corr > 0.99

    def test_widths_must_ascend(self):
        with pytest.raises(ValueError):
            gp.empirical_kernel(np.ones(4), np.ones(4), [4, 1], 10, 0,
                                isi_first_row=np.array([1.0]))


class TestNormality:
    def test_calibration(self):
        # Rejection rate at alpha=0.01 over repeated normal draws stays
        # within +/-50% relative of alpha.
        rng = np.random.default_rng(7)
        rejects = sum(
            gp.normality_test(rng.standard_normal(2000), alpha=0.01).reject
            for _ in range(1000))
        assert 0.005 <= rejects / 1000.0 <= 0.015

    def test_uniform_rejected(self):
        rng = np.random.default_rng(8)
        rep = gp.normality_test(rng.uniform(-1, 1, 100_000), alpha=0.01)
        assert rep.reject
        assert abs(rep.excess_kurtosis - (-1.2)) < 0.05

    def test_constant_invalid(self):
        rep = gp.normality_test(np.ones(600))
        assert not rep.valid
        assert not rep.reject

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            gp.normality_test(np.zeros(100))

    def test_p_value_range(self):
        rng = np.random.default_rng(9)
        rep = gp.normality_test(rng.standard_normal(1000))
        assert 0.0 <= rep.p_value <= 1.0


class TestLinearizationDrift:
    def test_zero_delta_zero_drift(self):
        p = ae.init_params(2, 2, 4, seed=0)
        probes = np.random.default_rng(0).standard_normal((4, 2 * 2 * 2))
        drift = gp.linearization_drift(p, p.copy(), probes)
        assert np.allclose(drift, 0.0)

    def test_tiny_delta_first_order(self):
        p = ae.init_params(2, 2, 4, seed=1)
        q = p.copy()
        rng = np.random.default_rng(1)
        for name in ae.TRAINABLE:
            t = getattr(q, name)
            setattr(q, name, t + 1e-6 * rng.standard_normal(t.shape))
        probes = rng.standard_normal((8, 8))
        drift = gp.linearization_drift(p, q, probes)
        assert np.max(drift) < 1e-3

    def test_dimension_mismatch(self):
        p = ae.init_params(2, 2, 4, seed=2)
        q = ae.init_params(2, 2, 5, seed=2)
        with pytest.raises(ValueError):
            gp.linearization_drift(p, q, np.zeros((1, 8)))

    def test_trained_drift_shrinks_with_width(self):
        # Median first-order Taylor residual after identical training
        # decreases as the hidden width K grows.
        from tests.test_autoencoder import make_channel_fn
        n, g = 4, 2
        fn = make_channel_fn(0.05, quantized=True, g=g, n=n)
        rng = np.random.default_rng(3)
        d = rng.standard_normal((6, 2 * n))
        probes = rng.standard_normal((16, 2 * g * n))
        # Plain gradient descent: per-weight gradients shrink with width,
        # keeping training near the linear regime (adaptive-moment steps
        # move every coordinate a fixed distance and break the scaling).
        medians = []
        for k in (5, 20, 80):
            p0 = ae.init_params(n, g, k, seed=4)
            cfg = ae.TrainConfig(epochs=60, learning_rate=1e-3,
                                 optimizer="gd", seed=4)
            res = ae.train_window(d, cfg, fn, p0)
            drift = gp.linearization_drift(p0, res.params, probes)
            medians.append(float(np.median(drift)))
        assert medians[2] < medians[1] < medians[0]
