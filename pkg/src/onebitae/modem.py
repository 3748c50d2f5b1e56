"""Gray-mapped square QAM: mapping, exact soft demapping, block partitioning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .ldpc import LLR_CLAMP

SUPPORTED_ORDERS = (4, 16, 64)


def _gray_levels(bits_per_axis):
    """PAM levels indexed by the Gray label of the axis bits.

    Label 0...0 maps to the most positive amplitude, so that for QPSK
    bit 0 transmits +1 (before normalization).
    """
    L = 1 << bits_per_axis
    levels = np.empty(L)
    for label in range(L):
        # Gray decode: label -> rank i in the Gray sequence.
        i = label
        shift = 1
        while (label >> shift) > 0:
            i ^= label >> shift
            shift += 1
        levels[label] = (L - 1) - 2 * i
    return levels


@dataclass(frozen=True)
class Constellation:
    order: int
    points: np.ndarray       # (M,) complex, unit average energy
    bit_labels: np.ndarray   # (M, log2 M) uint8

    @classmethod
    def make(cls, M):
        if M not in SUPPORTED_ORDERS:
            raise ValueError(f"unsupported order {M}, expected one of {SUPPORTED_ORDERS}")
        m = int(np.log2(M))
        half = m // 2
        axis_levels = _gray_levels(half)
        L = 1 << half
        # Unit average energy: E[a^2] per axis is (L^2-1)/3, two axes.
        norm = np.sqrt(2.0 * (L * L - 1) / 3.0)
        points = np.empty(M, dtype=np.complex128)
        labels = np.empty((M, m), dtype=np.uint8)
        for idx in range(M):
            b = [(idx >> (m - 1 - j)) & 1 for j in range(m)]
            li = 0
            lq = 0
            for j in range(half):
                li = (li << 1) | b[j]
                lq = (lq << 1) | b[half + j]
            points[idx] = (axis_levels[li] + 1j * axis_levels[lq]) / norm
            labels[idx] = b
        return cls(M, points, labels)

    @property
    def bits_per_symbol(self):
        return int(np.log2(self.order))


_CACHE = {}


def constellation(M) -> Constellation:
    if M not in _CACHE:
        _CACHE[M] = Constellation.make(M)
    return _CACHE[M]


def map_qam(bits, M):
    """Map a bit vector to Gray-labeled unit-energy QAM symbols."""
    c = constellation(M)
    bits = np.asarray(bits).astype(np.int64) % 2
    m = c.bits_per_symbol
    if bits.size % m != 0:
        raise ValueError(f"bit count {bits.size} not divisible by log2(M)={m}")
    groups = bits.reshape(-1, m)
    idx = groups @ (1 << np.arange(m - 1, -1, -1))
    return c.points[idx]


def demap_llr(received, M, noise_var):
    """Exact per-bit LLRs under circular Gaussian noise.

    `noise_var` is the total noise variance per complex dimension
    (E|z|^2). Positive LLR means bit 0 is more likely. Values are
    clamped to +/-LLR_CLAMP.
    """
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    c = constellation(M)
    received = np.asarray(received, dtype=np.complex128)
    m = c.bits_per_symbol
    # (n_sym, M) log-likelihoods up to a constant.
    d2 = np.abs(received[:, None] - c.points[None, :]) ** 2
    ll = -d2 / noise_var
    llrs = np.empty((received.size, m))
    for j in range(m):
        zero_set = c.bit_labels[:, j] == 0
        llrs[:, j] = logsumexp(ll[:, zero_set], axis=1) - logsumexp(ll[:, ~zero_set], axis=1)
    return np.clip(llrs.reshape(-1), -LLR_CLAMP, LLR_CLAMP)


def hard_demap(received, M):
    """Nearest-point hard decisions, returned as bits."""
    c = constellation(M)
    received = np.asarray(received, dtype=np.complex128)
    idx = np.argmin(np.abs(received[:, None] - c.points[None, :]) ** 2, axis=1)
    return c.bit_labels[idx].reshape(-1)


@dataclass
class SymbolBlock:
    symbols: np.ndarray  # (N,) complex
    block_index: int


def partition_blocks(symbols, N):
    """Split into blocks of N symbols, zero-padding the last.

    Returns (blocks, pad) where pad is the number of zero symbols appended.
    """
    if N <= 0:
        raise ValueError("block size must be positive")
    symbols = np.asarray(symbols, dtype=np.complex128)
    n_blocks = max(1, int(np.ceil(symbols.size / N)))
    pad = n_blocks * N - symbols.size
    padded = np.concatenate([symbols, np.zeros(pad, dtype=np.complex128)])
    blocks = [SymbolBlock(padded[i * N:(i + 1) * N], i) for i in range(n_blocks)]
    return blocks, pad


def assemble_blocks(blocks, pad):
    """Inverse of partition_blocks: concatenate and strip padding."""
    full = np.concatenate([b.symbols for b in blocks])
    return full[: full.size - pad] if pad else full


def block_to_real(symbols):
    """N complex symbols -> 2N reals, interleaved (re1, im1, re2, ...)."""
    symbols = np.asarray(symbols, dtype=np.complex128)
    out = np.empty(2 * symbols.size)
    out[0::2] = symbols.real
    out[1::2] = symbols.imag
    return out


def real_to_block(vec):
    """Inverse of block_to_real."""
    vec = np.asarray(vec, dtype=np.float64)
    return vec[0::2] + 1j * vec[1::2]
