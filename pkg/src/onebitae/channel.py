"""Faster-than-Nyquist channel model.

Pulse autocorrelation, the Toeplitz ISI operator, correlated Gaussian noise
(via Cholesky factorization), the Es/N0 -> noise-variance convention, and
the one-bit quantizer. Everything here is the non-trainable middle of the
autoencoder: power-normalized symbols in, (quantized) samples out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CHOLESKY_JITTER = 1e-10
MIN_ES_N0_DB = -40.0


@dataclass(frozen=True)
class PulseSpec:
    kind: str = "rrc"          # "rrc" | "rect"
    rolloff: float = 0.3       # RRC only
    span: int = 16             # symbol periods, used by the numeric oracle
    oversampling: int = 64     # used by the numeric oracle

    def __post_init__(self):
        if self.kind not in ("rrc", "rect"):
            raise ValueError(f"unsupported pulse kind {self.kind!r}")
        if self.kind == "rrc" and not 0.0 <= self.rolloff <= 1.0:
            raise ValueError("rolloff must be in [0, 1]")


def raised_cosine(t, beta):
    """Raised-cosine function rc(t) with T=1; the autocorrelation of an RRC pulse."""
    t = np.asarray(t, dtype=np.float64)
    out = np.sinc(t) * np.cos(np.pi * beta * t)
    denom = 1.0 - (2.0 * beta * t) ** 2
    sing = np.isclose(denom, 0.0, atol=1e-12)
    safe = np.where(sing, 1.0, denom)
    out = out / safe
    if beta > 0:
        # Limit at t = 1/(2 beta): (pi/4) sinc(1/(2 beta))
        lim = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * beta))
        out = np.where(sing, lim, out)
    return out


def pulse_autocorr(pulse: PulseSpec, G: int, length: int):
    """g[m] for m = 0..length-1: normalized pulse autocorrelation at lags m*T/G."""
    if length < 1:
        raise ValueError("length must be >= 1")
    m = np.arange(length)
    t = m / float(G)
    if pulse.kind == "rect":
        g = np.maximum(0.0, 1.0 - t)
    else:
        g = raised_cosine(t, pulse.rolloff)
    g = np.asarray(g, dtype=np.float64)
    g[0] = 1.0
    return g


def pulse_autocorr_numeric(pulse: PulseSpec, G: int, length: int):
    """Numeric-integration oracle for pulse_autocorr (time-domain product)."""
    os_ = pulse.oversampling * G
    half = pulse.span / 2.0
    t = np.arange(-half, half, 1.0 / os_)
    if pulse.kind == "rect":
        h = ((t >= 0) & (t < 1.0)).astype(np.float64)
    else:
        h = _rrc_time(t, pulse.rolloff)
    e0 = np.sum(h * h) / os_
    out = np.empty(length)
    for mm in range(length):
        shift = int(round(mm / G * os_))
        if shift >= t.size:
            out[mm] = 0.0
            continue
        out[mm] = np.sum(h[shift:] * h[: t.size - shift]) / os_ / e0
    return out


def _rrc_time(t, beta):
    """Root-raised-cosine impulse response, T=1."""
    t = np.asarray(t, dtype=np.float64)
    out = np.empty_like(t)
    if beta == 0:
        return np.sinc(t)
    tiny = np.abs(t) < 1e-9
    special = np.isclose(np.abs(t), 1.0 / (4.0 * beta), atol=1e-9)
    normal = ~(tiny | special)
    tn = t[normal]
    num = np.sin(np.pi * tn * (1 - beta)) + 4 * beta * tn * np.cos(np.pi * tn * (1 + beta))
    den = np.pi * tn * (1 - (4 * beta * tn) ** 2)
    out[normal] = num / den
    out[tiny] = 1.0 - beta + 4 * beta / np.pi
    out[special] = (beta / np.sqrt(2.0)) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * beta))
        + (1 - 2 / np.pi) * np.cos(np.pi / (4 * beta))
    )
    return out


@dataclass
class IsiOperator:
    """Symmetric Toeplitz Gram matrix of shifted pulses, size GN x GN."""

    first_row: np.ndarray
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g = np.asarray(self.first_row, dtype=np.float64)
        if abs(g[0] - 1.0) > 1e-12:
            raise ValueError("g[0] must be 1")
        if np.any(np.abs(g) > 1.0 + 1e-12):
            raise ValueError("|g[m]| must be <= 1")
        self.first_row = g
        idx = np.abs(np.arange(g.size)[:, None] - np.arange(g.size)[None, :])
        self.matrix = g[idx]

    @property
    def size(self):
        return self.first_row.size


def build_isi(G: int, N: int, pulse: PulseSpec) -> IsiOperator:
    if G < 1 or N < 1:
        raise ValueError("G and N must be >= 1")
    if G == 1:
        # Orthogonal transmission: Nyquist pulse autocorrelation vanishes at
        # nonzero integer lags, so the operator is the identity.
        row = np.zeros(N)
        row[0] = 1.0
        return IsiOperator(row)
    return IsiOperator(pulse_autocorr(pulse, G, G * N))


@dataclass
class NoiseModel:
    """Colored Gaussian noise with covariance sigma_z^2 * G_ISI per component."""

    variance: float          # sigma_z^2 per real dimension
    isi: IsiOperator
    factor: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.variance < 0:
            raise ValueError("variance must be >= 0")
        n = self.isi.size
        cov = self.isi.matrix + CHOLESKY_JITTER * np.eye(n)
        chol = np.linalg.cholesky(cov)
        self.factor = np.sqrt(self.variance) * chol
        target = self.variance * self.isi.matrix
        got = self.factor @ self.factor.T
        denom = max(np.linalg.norm(target), 1e-30)
        if np.linalg.norm(got - target) / denom > 1e-8 and self.variance > 0:
            raise RuntimeError("Cholesky factor fails to reproduce target covariance")

    def draw(self, rng):
        return self.factor @ rng.standard_normal(self.isi.size)

    def draw_batch(self, rng, n):
        return rng.standard_normal((n, self.isi.size)) @ self.factor.T


@dataclass
class ChannelConfig:
    rho: float = 1.0
    G: int = 10
    quantized: bool = True
    pulse: PulseSpec = field(default_factory=PulseSpec)
    es_n0_db: float = 10.0

    def __post_init__(self):
        if self.G < 1 or int(self.G) != self.G:
            raise ValueError("G must be a positive integer")
        if self.rho <= 0:
            raise ValueError("rho must be positive")


def es_n0_to_sigma(es_n0_db: float, cfg: ChannelConfig) -> float:
    """Noise variance per real dimension for unit symbol energy.

    sigma_z^2 = rho * Es / (2 * 10^(EsN0/10)) with Es = 1; applied
    uniformly to every chain so relative curve positions are comparable.
    """
    if es_n0_db < MIN_ES_N0_DB:
        raise ValueError(f"Es/N0 below {MIN_ES_N0_DB} dB rejected")
    return cfg.rho / (2.0 * 10.0 ** (es_n0_db / 10.0))


def quantize(y):
    """One-bit quantizer: elementwise sign with sign(0) = +1."""
    y = np.asarray(y)
    return np.where(y >= 0, 1.0, -1.0)


def apply_channel(e_i, e_q, cfg: ChannelConfig, isi: IsiOperator,
                  noise: NoiseModel, rng):
    """Per-block channel: y = sqrt(rho) G_ISI e + z per I/Q component.

    Returns (r_i, r_q); quantized elementwise if cfg.quantized.
    """
    e_i = np.asarray(e_i, dtype=np.float64)
    e_q = np.asarray(e_q, dtype=np.float64)
    if e_i.shape[-1] != isi.size or e_q.shape[-1] != isi.size:
        raise ValueError(f"input length must be {isi.size}")
    scale = np.sqrt(cfg.rho)
    y_i = scale * (e_i @ isi.matrix.T) + _draw_like(noise, rng, e_i)
    y_q = scale * (e_q @ isi.matrix.T) + _draw_like(noise, rng, e_q)
    if cfg.quantized:
        return quantize(y_i), quantize(y_q)
    return y_i, y_q


def _draw_like(noise, rng, x):
    if x.ndim == 1:
        return noise.draw(rng)
    return noise.draw_batch(rng, x.shape[0])
