"""Inner code: linear frozen encoder, channel lambda layer, trainable MLP decoder.

The encoder is a single affine layer followed by transmit-power
normalization; it stays frozen at its random initialization. The decoder
is three ReLU layers of width K*N and a linear output of width 2*N,
trained on squared error with hand-rolled backpropagation. No gradient
ever crosses the quantizer: the received block r is a fixed input.

A block of N complex symbols is represented as a real vector of length 2N,
interleaved (re1, im1, re2, ...).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .modem import demap_llr, real_to_block

VAR_FLOOR = 1e-6

TRAINABLE = ("theta2", "b2", "theta3", "b3", "theta4", "b4", "theta5", "b5")


@dataclass
class MlpParams:
    theta1: np.ndarray  # (2GN, 2N), frozen
    b1: np.ndarray      # (2GN,), frozen
    theta2: np.ndarray  # (KN, 2GN)
    b2: np.ndarray
    theta3: np.ndarray  # (KN, KN)
    b3: np.ndarray
    theta4: np.ndarray  # (KN, KN)
    b4: np.ndarray
    theta5: np.ndarray  # (2N, KN)
    b5: np.ndarray
    sigma_theta2: float = 2.0
    sigma_b2: float = 0.01

    def check_finite(self):
        for name in ("theta1", "b1") + TRAINABLE:
            if not np.all(np.isfinite(getattr(self, name))):
                raise FloatingPointError(f"non-finite values in {name}")

    def copy(self):
        return MlpParams(
            *(getattr(self, n).copy() for n in ("theta1", "b1") + TRAINABLE),
            sigma_theta2=self.sigma_theta2, sigma_b2=self.sigma_b2,
        )

    def frozen_fingerprint(self):
        return (self.theta1.tobytes(), self.b1.tobytes())

    def save(self, path):
        np.savez(path, **{n: getattr(self, n) for n in ("theta1", "b1") + TRAINABLE},
                 sigma_theta2=self.sigma_theta2, sigma_b2=self.sigma_b2)

    @classmethod
    def load(cls, path):
        data = np.load(path)
        return cls(*(data[n] for n in ("theta1", "b1") + TRAINABLE),
                   sigma_theta2=float(data["sigma_theta2"]),
                   sigma_b2=float(data["sigma_b2"]))


def init_params(N, G, K, sigma_theta2=2.0, sigma_b2=0.01, seed=0) -> MlpParams:
    """Gaussian init: weights N(0, sigma_theta2/fan_in), biases N(0, sigma_b2)."""
    if N < 1 or G < 1 or K < 1:
        raise ValueError("N, G, K must be >= 1")
    if sigma_theta2 < 0 or sigma_b2 < 0:
        raise ValueError("variances must be nonnegative")
    rng = np.random.default_rng(seed)
    d_in, d_tx, d_hid = 2 * N, 2 * G * N, K * N

    def w(rows, cols):
        return rng.standard_normal((rows, cols)) * np.sqrt(sigma_theta2 / cols)

    def b(n):
        return rng.standard_normal(n) * np.sqrt(sigma_b2)

    return MlpParams(
        theta1=w(d_tx, d_in), b1=b(d_tx),
        theta2=w(d_hid, d_tx), b2=b(d_hid),
        theta3=w(d_hid, d_hid), b3=b(d_hid),
        theta4=w(d_hid, d_hid), b4=b(d_hid),
        theta5=w(d_in, d_hid), b5=b(d_in),
        sigma_theta2=sigma_theta2, sigma_b2=sigma_b2,
    )


def encode(d, p: MlpParams):
    """Affine encoder plus power normalization to unit mean square.

    Accepts (2N,) or a batch (B, 2N); normalization is per block.
    Returns (e, ok) where ok is False for blocks with zero pre-norm energy
    (those are passed through unscaled).
    """
    d = np.asarray(d, dtype=np.float64)
    single = d.ndim == 1
    db = d[None, :] if single else d
    z = db @ p.theta1.T + p.b1
    ms = np.mean(z * z, axis=1, keepdims=True)
    ok = ms[:, 0] > 0
    scale = np.where(ms > 0, 1.0 / np.sqrt(np.maximum(ms, 1e-300)), 1.0)
    e = z * scale
    if single:
        return e[0], bool(ok[0])
    return e, ok


def decode(r, p: MlpParams):
    """Three ReLU layers then linear output. Accepts (2GN,) or (B, 2GN)."""
    r = np.asarray(r, dtype=np.float64)
    single = r.ndim == 1
    x = r[None, :] if single else r
    h = np.maximum(x @ p.theta2.T + p.b2, 0.0)
    h = np.maximum(h @ p.theta3.T + p.b3, 0.0)
    h = np.maximum(h @ p.theta4.T + p.b4, 0.0)
    out = h @ p.theta5.T + p.b5
    return out[0] if single else out


def loss_and_grads(d, r, p: MlpParams, mask=None):
    """Mean squared block error and gradients w.r.t. decoder tensors.

    d: targets (B, 2N); r: received (B, 2GN); mask: optional (B, 2N)
    weights (0 excludes padded coordinates from the loss).
    Loss = mean over batch of sum_j mask_j * (d_j - dhat_j)^2.
    Returns (loss, grads) with grads keyed by tensor name.
    """
    d = np.atleast_2d(np.asarray(d, dtype=np.float64))
    r = np.atleast_2d(np.asarray(r, dtype=np.float64))
    if d.shape[0] != r.shape[0] or d.shape[0] == 0:
        raise ValueError("batch shapes mismatch or empty batch")
    B = d.shape[0]
    z2 = r @ p.theta2.T + p.b2
    a2 = np.maximum(z2, 0.0)
    z3 = a2 @ p.theta3.T + p.b3
    a3 = np.maximum(z3, 0.0)
    z4 = a3 @ p.theta4.T + p.b4
    a4 = np.maximum(z4, 0.0)
    d_hat = a4 @ p.theta5.T + p.b5

    diff = d_hat - d
    if mask is not None:
        diff = diff * mask
    loss = float(np.sum(diff * diff) / B)

    g_out = 2.0 * diff / B
    grads = {
        "theta5": g_out.T @ a4,
        "b5": g_out.sum(axis=0),
    }
    g = (g_out @ p.theta5) * (z4 > 0)
    grads["theta4"] = g.T @ a3
    grads["b4"] = g.sum(axis=0)
    g = (g @ p.theta4) * (z3 > 0)
    grads["theta3"] = g.T @ a2
    grads["b3"] = g.sum(axis=0)
    g = (g @ p.theta3) * (z2 > 0)
    grads["theta2"] = g.T @ r
    grads["b2"] = g.sum(axis=0)
    return loss, grads


def decoder_jvp(r, p: MlpParams, deltas):
    """Directional derivative of decode(r, p) along `deltas` (dict by name)."""
    r = np.atleast_2d(np.asarray(r, dtype=np.float64))
    z2 = r @ p.theta2.T + p.b2
    a2 = np.maximum(z2, 0.0)
    z3 = a2 @ p.theta3.T + p.b3
    a3 = np.maximum(z3, 0.0)
    z4 = a3 @ p.theta4.T + p.b4
    a4 = np.maximum(z4, 0.0)

    def get(name, like):
        return deltas.get(name, np.zeros_like(like))

    dz2 = r @ get("theta2", p.theta2).T + get("b2", p.b2)
    da2 = dz2 * (z2 > 0)
    dz3 = a2 @ get("theta3", p.theta3).T + da2 @ p.theta3.T + get("b3", p.b3)
    da3 = dz3 * (z3 > 0)
    dz4 = a3 @ get("theta4", p.theta4).T + da3 @ p.theta4.T + get("b4", p.b4)
    da4 = dz4 * (z4 > 0)
    return a4 @ get("theta5", p.theta5).T + da4 @ p.theta5.T + get("b5", p.b5)


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 200
    noise_draws: int = 1          # noise realizations per codeword per epoch
    k: int = 8                    # codewords per training window
    optimizer: str = "adam"       # "adam" | "gd"
    seed: int = 0
    batch_mode: str = "full-window"  # "full-window" | "per-block"
    warm_start: bool = True
    epochs_warm: int = 50         # epochs for warm-started windows

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.optimizer not in ("adam", "gd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.batch_mode not in ("full-window", "per-block"):
            raise ValueError(f"unknown batch_mode {self.batch_mode!r}")


class _Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m, self.v = {}, {}
        self.t = 0

    def step(self, p: MlpParams, grads):
        self.t += 1
        for name in TRAINABLE:
            g = grads[name]
            m = self.m.get(name, np.zeros_like(g))
            v = self.v.get(name, np.zeros_like(g))
            m = self.b1 * m + (1 - self.b1) * g
            v = self.b2 * v + (1 - self.b2) * g * g
            self.m[name], self.v[name] = m, v
            mh = m / (1 - self.b1 ** self.t)
            vh = v / (1 - self.b2 ** self.t)
            arr = getattr(p, name)
            arr -= self.lr * mh / (np.sqrt(vh) + self.eps)


class _Gd:
    def __init__(self, lr):
        self.lr = lr

    def step(self, p: MlpParams, grads):
        for name in TRAINABLE:
            getattr(p, name)[...] -= self.lr * grads[name]


class TrainingDiverged(RuntimeError):
    pass


@dataclass
class TrainResult:
    params: MlpParams
    loss_curve: np.ndarray
    residual_variance: float      # per real dimension, floored at VAR_FLOOR
    final_residuals: np.ndarray   # (B, 2N) from the last epoch


def train_window(d_blocks, cfg: TrainConfig, channel_fn, params: MlpParams,
                 mask=None) -> TrainResult:
    """Train the decoder on one window of blocks.

    d_blocks: (B, 2N) real block targets (all blocks of the window's
    codewords). channel_fn(e, rng) -> r applies the lambda layer.
    The encoder tensors are never touched. Returns trained params (a
    copy; the input is left unchanged) plus the loss curve and the
    final-epoch residual variance used for LLR scaling.
    """
    d_blocks = np.atleast_2d(np.asarray(d_blocks, dtype=np.float64))
    p = params.copy()
    frozen = params.frozen_fingerprint()
    rng = np.random.default_rng(cfg.seed)
    opt = _Adam(cfg.learning_rate) if cfg.optimizer == "adam" else _Gd(cfg.learning_rate)
    e_blocks, _ = encode(d_blocks, p)

    losses = []
    residuals = np.zeros_like(d_blocks)
    for _ in range(cfg.epochs):
        epoch_loss = 0.0
        draws = 0
        for _ in range(cfg.noise_draws):
            r = channel_fn(e_blocks, rng)
            if cfg.batch_mode == "full-window":
                loss, grads = loss_and_grads(d_blocks, r, p, mask=mask)
                opt.step(p, grads)
                epoch_loss += loss
                draws += 1
            else:
                for bi in range(d_blocks.shape[0]):
                    mk = None if mask is None else mask[bi:bi + 1]
                    loss, grads = loss_and_grads(
                        d_blocks[bi:bi + 1], r[bi:bi + 1], p, mask=mk)
                    opt.step(p, grads)
                    epoch_loss += loss
                    draws += 1
            residuals = decode(r, p) - d_blocks
        if not np.isfinite(epoch_loss):
            raise TrainingDiverged(
                f"NaN/Inf loss after {len(losses)} epochs; reduce the learning rate")
        losses.append(epoch_loss / max(draws, 1))
    p.check_finite()
    if p.frozen_fingerprint() != frozen:
        raise AssertionError("frozen encoder tensors were modified")
    if mask is not None:
        flat = residuals[mask > 0]
    else:
        flat = residuals.reshape(-1)
    var = max(float(np.var(flat)) if flat.size else 0.0, VAR_FLOOR)
    return TrainResult(p, np.asarray(losses), var, residuals)


@dataclass
class AeBlockResult:
    d_hat: np.ndarray  # (2N,)
    v: np.ndarray      # residual d_hat - d


def infer_block(d, p: MlpParams, channel_fn, rng) -> AeBlockResult:
    """Push one block through encoder, channel, decoder."""
    d = np.asarray(d, dtype=np.float64)
    e, _ = encode(d, p)
    r = channel_fn(e[None, :], rng)[0]
    d_hat = decode(r, p)
    return AeBlockResult(d_hat, d_hat - d)


def infer_blocks(d_blocks, p: MlpParams, channel_fn, rng):
    """Batch inference; returns (d_hat, v) of shape (B, 2N)."""
    d_blocks = np.atleast_2d(np.asarray(d_blocks, dtype=np.float64))
    e, _ = encode(d_blocks, p)
    r = channel_fn(e, rng)
    d_hat = decode(r, p)
    return d_hat, d_hat - d_blocks


def llr_from_residuals(d_hat_blocks, sigma_v2, M, n_symbols):
    """LLRs for a codeword, treating dhat = d + v with v Gaussian.

    d_hat_blocks: (S, 2N) decoder outputs for one codeword in order;
    sigma_v2: residual variance per real dimension; n_symbols: unpadded
    symbol count (padding at the tail is dropped).
    """
    if sigma_v2 <= 0:
        raise ValueError("sigma_v2 must be positive")
    d_hat_blocks = np.atleast_2d(np.asarray(d_hat_blocks, dtype=np.float64))
    symbols = np.concatenate([real_to_block(row) for row in d_hat_blocks])[:n_symbols]
    return demap_llr(symbols, M, 2.0 * sigma_v2)
