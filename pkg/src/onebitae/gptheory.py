"""Infinite-width Gaussian-process view of the autoencoder.

Layerwise covariance recursion with closed-form kernels for linear, ReLU
(arc-cosine degree 1) and sign (arcsine) activations, an adaptive
quadrature oracle for the defining Gaussian expectations, finite-width
Monte-Carlo validation, a moment-based normality test for decoder
residuals, and a first-order (Taylor) linearization drift probe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from .autoencoder import MlpParams, decode, decoder_jvp, TRAINABLE

_SQRT2PI = math.sqrt(2.0 * math.pi)


@dataclass
class KernelState:
    """2x2 covariance of one unit's preactivation for an input pair (z, zhat)."""

    k_zz: float
    k_zhz: float
    k_hzhz: float

    def __post_init__(self):
        if self.k_zz < 0 or self.k_hzhz < 0:
            raise ValueError("diagonal entries must be nonnegative")
        lim = math.sqrt(self.k_zz * self.k_hzhz)
        if abs(self.k_zhz) > lim + 1e-9 * max(lim, 1.0):
            raise ValueError("state is not positive semidefinite")

    @property
    def correlation(self):
        denom = math.sqrt(self.k_zz * self.k_hzhz)
        if denom == 0:
            return 0.0
        return min(1.0, max(-1.0, self.k_zhz / denom))

    def as_matrix(self):
        return np.array([[self.k_zz, self.k_zhz], [self.k_zhz, self.k_hzhz]])


def _relu_expect(k_zz, k_hzhz, rho):
    """E[relu(u) relu(v)], (u,v) centered Gaussian with the given moments."""
    theta = math.acos(min(1.0, max(-1.0, rho)))
    return (math.sqrt(k_zz * k_hzhz) / (2.0 * math.pi)) * (
        math.sin(theta) + (math.pi - theta) * math.cos(theta)
    )


def _sign_expect(rho):
    return (2.0 / math.pi) * math.asin(min(1.0, max(-1.0, rho)))


def kernel_step(state: KernelState, activation: str, sigma_theta2: float,
                sigma_b2: float, temperature: float = 0.1) -> KernelState:
    """One layer of the covariance recursion: affine map after activation.

    linear: F(K) = sigma_b^2 + sigma_theta^2 K entrywise.
    relu:   arc-cosine kernel of degree 1.
    sign:   arcsine kernel; diagonal is sigma_b^2 + sigma_theta^2 (sign^2 = 1).
    sigmoid: tempered tanh(x / temperature), by numerical quadrature;
    approaches the sign kernel as temperature -> 0.
    """
    rho = state.correlation
    if activation == "linear":
        return KernelState(
            sigma_b2 + sigma_theta2 * state.k_zz,
            sigma_b2 + sigma_theta2 * state.k_zhz,
            sigma_b2 + sigma_theta2 * state.k_hzhz,
        )
    if activation == "relu":
        ezz = state.k_zz / 2.0
        ehh = state.k_hzhz / 2.0
        ezh = _relu_expect(state.k_zz, state.k_hzhz, rho)
        return KernelState(sigma_b2 + sigma_theta2 * ezz,
                           sigma_b2 + sigma_theta2 * ezh,
                           sigma_b2 + sigma_theta2 * ehh)
    if activation == "sign":
        return KernelState(sigma_b2 + sigma_theta2,
                           sigma_b2 + sigma_theta2 * _sign_expect(rho),
                           sigma_b2 + sigma_theta2)
    if activation == "sigmoid":
        phi = lambda x: np.tanh(x / temperature)
        ezz = quadrature_moment(phi, state.k_zz)
        ehh = quadrature_moment(phi, state.k_hzhz)
        ezh = quadrature_cross(phi, state.k_zz, state.k_hzhz, rho)
        return KernelState(sigma_b2 + sigma_theta2 * ezz,
                           sigma_b2 + sigma_theta2 * ezh,
                           sigma_b2 + sigma_theta2 * ehh)
    raise ValueError(f"unknown activation {activation!r}")


# --- Quadrature oracle ----------------------------------------------------
# Independent of the closed forms above: the bivariate expectation is
# reduced to a 1-D integral over the conditioning variable (the inner
# Gaussian integral is carried out in terms of the normal CDF), then
# evaluated with adaptive quadrature. This handles the kink/discontinuity
# of relu/sign exactly, unlike fixed-node Gauss-Hermite.

def _npdf(x):
    return np.exp(-0.5 * x * x) / _SQRT2PI


def _ncdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def quadrature_moment(phi, k):
    """E[phi(u)^2] for u ~ N(0, k), adaptive quadrature."""
    if k == 0:
        return float(phi(0.0)) ** 2
    s = math.sqrt(k)
    val, _ = integrate.quad(lambda x: float(phi(s * x)) ** 2 * _npdf(x),
                            -np.inf, np.inf, limit=200, epsabs=1e-12, epsrel=1e-12)
    return val


def quadrature_cross(phi, k_zz, k_hzhz, rho, kind=None):
    """E[phi(u) phi(v)] for centered bivariate Gaussian (u, v)."""
    su, sv = math.sqrt(k_zz), math.sqrt(k_hzhz)
    if su == 0 or sv == 0:
        return float(phi(0.0)) * 0.0
    if abs(rho) >= 1.0 - 1e-12:
        sgn = 1.0 if rho > 0 else -1.0
        val, _ = integrate.quad(lambda x: float(phi(su * x)) * float(phi(sgn * sv * x))
                                * _npdf(x), -np.inf, np.inf, limit=200,
                                epsabs=1e-12, epsrel=1e-12)
        return val
    s = math.sqrt(1.0 - rho * rho)

    def inner(x):
        # E[phi(v) | u = su x] with v = sv (rho x + s y), y ~ N(0,1).
        f = lambda y: float(phi(sv * (rho * x + s * y))) * _npdf(y)
        val, _ = integrate.quad(f, -np.inf, np.inf, limit=200,
                                epsabs=1e-12, epsrel=1e-12)
        return val

    val, _ = integrate.quad(lambda x: float(phi(su * x)) * inner(x) * _npdf(x),
                            -np.inf, np.inf, limit=200, epsabs=1e-11, epsrel=1e-11)
    return val


def quadrature_relu_cross(k_zz, k_hzhz, rho):
    """Oracle for the ReLU cross moment with the inner integral done via CDF."""
    su, sv = math.sqrt(k_zz), math.sqrt(k_hzhz)
    if su == 0 or sv == 0:
        return 0.0
    s = math.sqrt(max(0.0, 1.0 - rho * rho))
    if s == 0:
        sgn = 1.0 if rho > 0 else -1.0
        f = lambda x: su * x * max(sgn * sv * x, 0.0) * _npdf(x)
        val, _ = integrate.quad(f, 0.0 if sgn > 0 else -np.inf,
                                np.inf if sgn > 0 else 0.0,
                                limit=200, epsabs=1e-13, epsrel=1e-13)
        return val

    def f(x):
        a = rho * x / s
        cond = sv * (rho * x * _ncdf(a) + s * _npdf(a))
        return su * x * cond * _npdf(x)

    val, _ = integrate.quad(f, 0.0, np.inf, limit=200, epsabs=1e-13, epsrel=1e-13)
    return val


def quadrature_sign_cross(rho):
    """Oracle for E[sign(u) sign(v)] via orthant probabilities."""
    if abs(rho) >= 1.0 - 1e-12:
        return 1.0 if rho > 0 else -1.0
    s = math.sqrt(1.0 - rho * rho)
    # P(u > 0, v > 0) = int_0^inf pdf(x) CDF(rho x / s) dx
    val, _ = integrate.quad(lambda x: _npdf(x) * _ncdf(rho * x / s), 0.0, np.inf,
                            limit=200, epsabs=1e-13, epsrel=1e-13)
    p_pp = val
    # E = 4 P(++) - 1 by symmetry of the centered bivariate normal.
    return 4.0 * p_pp - 1.0


# --- Kernel composition through the full stack ----------------------------

@dataclass
class ChannelLayerSpec:
    first_row: np.ndarray  # ISI operator first row, length GN
    rho: float = 1.0
    sigma_z2: float = 0.1
    normalize: bool = True      # transmit-power normalization before the channel
    shared_noise: bool = True   # one noise draw per net for both inputs


def channel_position_states(state: KernelState, spec: ChannelLayerSpec):
    """Per-position covariance states after the channel layer.

    Position k of the block sees signal variance rho * c_k * K (c_k the
    squared row norm of the ISI operator) plus noise sigma_z^2; with a
    shared noise draw the noise also appears on the cross term.
    """
    g = np.asarray(spec.first_row, dtype=np.float64)
    n = g.size
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    c = (g[idx] ** 2).sum(axis=1)
    if spec.normalize:
        rho_in = state.correlation
        base = KernelState(1.0, rho_in, 1.0)
    else:
        base = state
    noise_cross = spec.sigma_z2 if spec.shared_noise else 0.0
    states = []
    for ck in c:
        states.append(KernelState(
            spec.rho * ck * base.k_zz + spec.sigma_z2,
            spec.rho * ck * base.k_zhz + noise_cross,
            spec.rho * ck * base.k_hzhz + spec.sigma_z2,
        ))
    return states


def averaged_kernel_step(states, activation, sigma_theta2, sigma_b2):
    """Activation + affine step where the fan-in mixes per-position states."""
    zz = zh = hh = 0.0
    for st in states:
        nxt = kernel_step(st, activation, 1.0, 0.0)
        zz += nxt.k_zz
        zh += nxt.k_zhz
        hh += nxt.k_hzhz
    n = len(states)
    return KernelState(sigma_b2 + sigma_theta2 * zz / n,
                       sigma_b2 + sigma_theta2 * zh / n,
                       sigma_b2 + sigma_theta2 * hh / n)


def compose_kernel(input_gram, layers) -> KernelState:
    """Fold the layerwise maps over an input pair's Gram matrix.

    `input_gram` is the 2x2 matrix [[<d,d>/n, <d,dh>/n], ...] of the raw
    inputs (per-coordinate second moments). `layers` is a list of
    ("linear"|"relu"|"sign"|"sigmoid", sigma_theta2, sigma_b2) tuples or
    ChannelLayerSpec instances; a channel spec must be followed by an
    activation layer (normally "sign").
    """
    if not layers:
        raise ValueError("empty layer spec")
    g = np.asarray(input_gram, dtype=np.float64)
    state = KernelState(g[0, 0], g[0, 1], g[1, 1])
    position_states = None
    for layer in layers:
        if isinstance(layer, ChannelLayerSpec):
            position_states = channel_position_states(state, layer)
            continue
        activation, st2, sb2 = layer
        if position_states is not None:
            state = averaged_kernel_step(position_states, activation, st2, sb2)
            position_states = None
        elif activation == "linear":
            state = kernel_step(state, "linear", st2, sb2)
        else:
            state = kernel_step(state, activation, st2, sb2)
    if position_states is not None:
        raise ValueError("channel layer must be followed by an activation layer")
    return state


def paper_stack(isi_first_row, rho, sigma_z2, sigma_theta2, sigma_b2,
                quantizer="sign"):
    """Layer list mirroring the 6-layer architecture."""
    return [
        ("linear", sigma_theta2, sigma_b2),
        ChannelLayerSpec(np.asarray(isi_first_row), rho, sigma_z2),
        (quantizer, sigma_theta2, sigma_b2),
        ("relu", sigma_theta2, sigma_b2),
        ("relu", sigma_theta2, sigma_b2),
        ("relu", sigma_theta2, sigma_b2),
    ]


def empirical_kernel(d, d_hat, widths, nets_per_width, seed, *,
                     isi_first_row, rho=1.0, sigma_z2=0.1,
                     sigma_theta2=2.0, sigma_b2=0.01):
    """Finite-width Monte-Carlo estimate of the output covariance.

    For each width multiplier w, instantiates `nets_per_width` random
    autoencoders (init only) whose transmit and hidden widths are scaled
    by w, pushes both inputs through the full stack (one shared noise
    draw per net), and estimates the 2x2 output covariance by pooling
    output coordinates across nets. Returns a list of dicts per width.
    """
    if list(widths) != sorted(widths):
        raise ValueError("widths must be ascending")
    d = np.asarray(d, dtype=np.float64)
    d_hat = np.asarray(d_hat, dtype=np.float64)
    n_in = d.size
    g = np.asarray(isi_first_row, dtype=np.float64)
    gn = g.size
    idx = np.abs(np.arange(gn)[:, None] - np.arange(gn)[None, :])
    isi = g[idx]
    chol = np.linalg.cholesky(isi + 1e-10 * np.eye(gn))
    results = []
    master = np.random.default_rng(seed)
    for w in widths:
        rng = np.random.default_rng(master.integers(2 ** 63))
        tx = 2 * gn * w   # w interleaved I/Q blocks of size 2*GN
        hid = n_in * w    # hidden width scales with w; exact ratio cancels
        outs_z = []
        outs_h = []
        for _ in range(nets_per_width):
            th1 = rng.standard_normal((tx, n_in)) * np.sqrt(sigma_theta2 / n_in)
            b1 = rng.standard_normal(tx) * np.sqrt(sigma_b2)
            z1 = np.stack([th1 @ d + b1, th1 @ d_hat + b1])
            # Power normalization over the whole transmit vector.
            z1 /= np.sqrt(np.mean(z1 * z1, axis=1, keepdims=True))
            # Channel: per block, per I/Q component, shared noise draw.
            blocks = z1.reshape(2, w, 2, gn)  # (input, block, iq, pos)
            noise = (rng.standard_normal((w, 2, gn)) @ chol.T) * np.sqrt(sigma_z2)
            y = np.sqrt(rho) * blocks @ isi.T + noise[None, :, :, :]
            x2 = np.where(y >= 0, 1.0, -1.0).reshape(2, tx)
            th2 = rng.standard_normal((hid, tx)) * np.sqrt(sigma_theta2 / tx)
            b2 = rng.standard_normal(hid) * np.sqrt(sigma_b2)
            h = np.maximum(x2 @ th2.T + b2, 0.0)
            for _layer in range(2):
                th = rng.standard_normal((hid, hid)) * np.sqrt(sigma_theta2 / hid)
                bb = rng.standard_normal(hid) * np.sqrt(sigma_b2)
                h = np.maximum(h @ th.T + bb, 0.0)
            th5 = rng.standard_normal((n_in, hid)) * np.sqrt(sigma_theta2 / hid)
            b5 = rng.standard_normal(n_in) * np.sqrt(sigma_b2)
            out = h @ th5.T + b5
            outs_z.append(out[0])
            outs_h.append(out[1])
        oz = np.concatenate(outs_z)
        oh = np.concatenate(outs_h)
        results.append({
            "width": w,
            "k_zz": float(np.mean(oz * oz)),
            "k_zhz": float(np.mean(oz * oh)),
            "k_hzhz": float(np.mean(oh * oh)),
            "samples": oz.size,
        })
    return results


def analytic_kernel_for_inputs(d, d_hat, isi_first_row, rho, sigma_z2,
                               sigma_theta2, sigma_b2) -> KernelState:
    """compose_kernel wired for the same stack as empirical_kernel."""
    d = np.asarray(d, dtype=np.float64)
    d_hat = np.asarray(d_hat, dtype=np.float64)
    n = d.size
    gram = np.array([[d @ d, d @ d_hat], [d @ d_hat, d_hat @ d_hat]]) / n
    return compose_kernel(gram, paper_stack(isi_first_row, rho, sigma_z2,
                                            sigma_theta2, sigma_b2))


# --- Normality testing ----------------------------------------------------

@dataclass
class NormalityReport:
    sample_count: int
    skewness: float
    excess_kurtosis: float
    statistic: float
    p_value: float
    alpha: float
    reject: bool
    max_cdf_deviation: float
    valid: bool = True


def normality_test(samples, alpha=0.01) -> NormalityReport:
    """Moment-based composite normality test (skewness + kurtosis, chi2, 2 dof).

    Also reports the maximum deviation of the empirical CDF from the
    fitted normal as a diagnostic. Requires >= 500 samples.
    """
    samples = np.asarray(samples, dtype=np.float64).reshape(-1)
    if samples.size < 500:
        raise ValueError(f"need at least 500 samples, got {samples.size}")
    std = samples.std()
    if std == 0:
        return NormalityReport(samples.size, 0.0, 0.0, float("nan"), float("nan"),
                               alpha, False, float("nan"), valid=False)
    stat, p = stats.normaltest(samples)
    skew = float(stats.skew(samples))
    kurt = float(stats.kurtosis(samples))
    ks = stats.kstest(samples, "norm", args=(samples.mean(), std))
    return NormalityReport(samples.size, skew, kurt, float(stat), float(p),
                           alpha, bool(p < alpha), float(ks.statistic))


# --- Linearization drift --------------------------------------------------

def linearization_drift(params_before: MlpParams, params_after: MlpParams,
                        probes):
    """First-order Taylor residual of the trained decoder, per probe input.

    drift = ||f_after - (f_before + J dW)|| / ||f_after - f_before||
    with J the Jacobian of the decoder at params_before w.r.t. the
    trainable tensors. Shrinks with width when training stays in the
    near-linear regime.
    """
    deltas = {}
    for name in TRAINABLE:
        a, b = getattr(params_after, name), getattr(params_before, name)
        if a.shape != b.shape:
            raise ValueError(f"shape mismatch on {name}")
        deltas[name] = a - b
    probes = np.atleast_2d(np.asarray(probes, dtype=np.float64))
    f0 = decode(probes, params_before)
    f1 = decode(probes, params_after)
    lin = decoder_jvp(probes, params_before, deltas)
    num = np.linalg.norm(f1 - (f0 + lin), axis=1)
    den = np.linalg.norm(f1 - f0, axis=1)
    return np.where(den > 0, num / np.maximum(den, 1e-300), 0.0)
