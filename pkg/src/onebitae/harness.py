"""Experiment driver: seeded Monte-Carlo BER sweeps for the three chains.

Chains:
  unquantized-baseline: orthogonal transmission, exact soft demapper, BP.
  onebit-baseline:      orthogonal transmission, one-bit quantizer, the same
                        (deliberately mismatched) Gaussian demapper, BP.
  onebit-ae:            FTN + one-bit channel with the trained autoencoder
                        inner code, per-window training policy, BP.

Configuration is a YAML document validated by pydantic models; the same
models double as the service request schemas. Sweep points run in a
process pool with per-point derived seeds, merged in sweep order.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

from . import autoencoder as ae
from . import channel as ch
from . import gptheory as gp
from . import ldpc, modem

WORKERS_ENV = "ONEBITAE_WORKERS"

CSV_HEADER = "es_n0_db,codewords,bit_errors,bits,ber,seconds"


class PulseModel(BaseModel):
    kind: Literal["rrc", "rect"] = "rrc"
    rolloff: float = 0.3
    span: int = 16
    oversampling: int = 64

    def to_spec(self):
        return ch.PulseSpec(self.kind, self.rolloff, self.span, self.oversampling)


class ChannelModel(BaseModel):
    rho: float = 1.0
    G: int = 10
    quantized: bool = True
    pulse: PulseModel = Field(default_factory=PulseModel)

    @field_validator("G")
    @classmethod
    def _g_pos(cls, v):
        if v < 1:
            raise ValueError("G must be >= 1")
        return v

    @field_validator("rho")
    @classmethod
    def _rho_pos(cls, v):
        if v <= 0:
            raise ValueError("rho must be positive")
        return v


class TrainModel(BaseModel):
    learning_rate: float = 1e-3
    epochs: int = 200
    noise_draws: int = 1
    k: int = 8
    optimizer: Literal["adam", "gd"] = "adam"
    batch_mode: Literal["full-window", "per-block"] = "full-window"
    warm_start: bool = True
    epochs_warm: int = 50

    def to_config(self, seed):
        return ae.TrainConfig(
            learning_rate=self.learning_rate, epochs=self.epochs,
            noise_draws=self.noise_draws, k=self.k, optimizer=self.optimizer,
            seed=seed, batch_mode=self.batch_mode, warm_start=self.warm_start,
            epochs_warm=self.epochs_warm,
        )


class AutoencoderModel(BaseModel):
    N: int = 24
    K: int = 20
    sigma_theta2: float = 2.0
    sigma_b2: float = 0.01
    inference_draws: int = 1
    train: TrainModel = Field(default_factory=TrainModel)


class StopModel(BaseModel):
    min_bit_errors: int = 100
    max_codewords: int = 2000


class ExperimentConfig(BaseModel):
    code: str = "wifi-648"
    modulation: Literal[4, 16, 64] = 16
    chain: Literal["unquantized-baseline", "onebit-baseline", "onebit-ae"] = \
        "unquantized-baseline"
    sweep: list[float]
    stop: StopModel = Field(default_factory=StopModel)
    seed: int = 0
    channel: ChannelModel = Field(default_factory=ChannelModel)
    autoencoder: AutoencoderModel = Field(default_factory=AutoencoderModel)
    record_timing: bool = True

    @field_validator("sweep")
    @classmethod
    def _sweep_increasing(cls, v):
        if not v:
            raise ValueError("sweep must be nonempty")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("sweep must be strictly increasing")
        return v

    def warnings(self):
        out = []
        if self.stop.min_bit_errors < 50:
            out.append(
                f"stop.min_bit_errors = {self.stop.min_bit_errors} < 50: "
                "points will not be publication grade")
        return out


def load_config(path) -> ExperimentConfig:
    with open(path) as f:
        data = yaml.safe_load(f)
    return ExperimentConfig.model_validate(data)


@dataclass
class BerPoint:
    es_n0_db: float
    codewords: int
    bit_errors: int
    bits: int
    ber: float
    seconds: float

    def csv_row(self):
        return (f"{self.es_n0_db:g},{self.codewords},{self.bit_errors},"
                f"{self.bits},{self.ber:.6e},{self.seconds:.3f}")


def _point_rng(seed, point_index):
    return np.random.default_rng(np.random.SeedSequence((seed, point_index)))


def _orthogonal_point(cfg: ExperimentConfig, point_index: int, quantized: bool):
    """One sweep point of either orthogonal-transmission baseline chain."""
    H = ldpc.get_code(cfg.code)
    enc = ldpc.Encoder(H)
    es_n0_db = cfg.sweep[point_index]
    ccfg = ch.ChannelConfig(rho=cfg.channel.rho, G=1, quantized=quantized,
                            pulse=cfg.channel.pulse.to_spec(), es_n0_db=es_n0_db)
    sigma2 = ch.es_n0_to_sigma(es_n0_db, ccfg)
    rng = _point_rng(cfg.seed, point_index)
    k_info = enc.info_positions.size
    errors = 0
    bits = 0
    codewords = 0
    chunk = max(1, min(64, cfg.stop.max_codewords))
    scale = np.sqrt(ccfg.rho)
    while errors < cfg.stop.min_bit_errors and codewords < cfg.stop.max_codewords:
        n = min(chunk, cfg.stop.max_codewords - codewords)
        llr_batch = np.empty((n, H.cols))
        infos = np.empty((n, k_info), dtype=np.uint8)
        for i in range(n):
            info = rng.integers(0, 2, k_info).astype(np.uint8)
            infos[i] = info
            cw = enc.encode(info)
            sym = modem.map_qam(cw, cfg.modulation)
            noise = (rng.standard_normal(sym.size) +
                     1j * rng.standard_normal(sym.size)) * np.sqrt(sigma2)
            y = scale * sym + noise
            if quantized:
                y = ch.quantize(y.real) + 1j * ch.quantize(y.imag)
            llr_batch[i] = modem.demap_llr(y, cfg.modulation, 2.0 * sigma2)
        decoded, _, _ = ldpc.decode_bp(llr_batch, H, max_iters=50)
        got = decoded[:, enc.info_positions]
        errors += int(np.sum(got != infos))
        bits += n * k_info
        codewords += n
    return codewords, errors, bits


def _make_channel_fn(ccfg: ch.ChannelConfig, isi: ch.IsiOperator,
                     noise: ch.NoiseModel):
    """Lambda-layer closure: interleaved real vector in, received vector out."""

    def channel_fn(e, rng):
        e = np.atleast_2d(e)
        r_i, r_q = ch.apply_channel(e[:, 0::2], e[:, 1::2], ccfg, isi, noise, rng)
        r = np.empty_like(e)
        r[:, 0::2] = r_i
        r[:, 1::2] = r_q
        return r

    return channel_fn


def _ae_point(cfg: ExperimentConfig, point_index: int):
    """One sweep point of the autoencoder chain (windowed training)."""
    H = ldpc.get_code(cfg.code)
    enc = ldpc.Encoder(H)
    es_n0_db = cfg.sweep[point_index]
    acfg = cfg.autoencoder
    N = acfg.N
    ccfg = ch.ChannelConfig(rho=cfg.channel.rho, G=cfg.channel.G,
                            quantized=cfg.channel.quantized,
                            pulse=cfg.channel.pulse.to_spec(), es_n0_db=es_n0_db)
    isi = ch.build_isi(ccfg.G, N, ccfg.pulse)
    sigma2 = ch.es_n0_to_sigma(es_n0_db, ccfg)
    noise = ch.NoiseModel(sigma2, isi)
    channel_fn = _make_channel_fn(ccfg, isi, noise)

    rng = _point_rng(cfg.seed, point_index)
    init_seed = int(rng.integers(2 ** 63))
    params = ae.init_params(N, ccfg.G, acfg.K, acfg.sigma_theta2, acfg.sigma_b2,
                            seed=init_seed)

    k_info = enc.info_positions.size
    bits_per_sym = int(np.log2(cfg.modulation))
    n_symbols = H.cols // bits_per_sym
    blocks_per_cw = int(np.ceil(n_symbols / N))
    pad = blocks_per_cw * N - n_symbols

    # Per-coordinate mask excluding padded symbol positions of the last block.
    cw_mask = np.ones((blocks_per_cw, 2 * N))
    if pad:
        cw_mask[-1, 2 * (N - pad):] = 0.0

    k = acfg.train.k
    errors = 0
    bits = 0
    codewords = 0
    window_index = 0
    while errors < cfg.stop.min_bit_errors and codewords < cfg.stop.max_codewords:
        n_cw = min(k, cfg.stop.max_codewords - codewords)
        infos = np.empty((n_cw, k_info), dtype=np.uint8)
        d_blocks = np.empty((n_cw * blocks_per_cw, 2 * N))
        for i in range(n_cw):
            info = rng.integers(0, 2, k_info).astype(np.uint8)
            infos[i] = info
            cw = enc.encode(info)
            sym = modem.map_qam(cw, cfg.modulation)
            blk, _ = modem.partition_blocks(sym, N)
            for j, b in enumerate(blk):
                d_blocks[i * blocks_per_cw + j] = modem.block_to_real(b.symbols)
        mask = np.tile(cw_mask, (n_cw, 1))

        tcfg = acfg.train.to_config(seed=int(rng.integers(2 ** 63)))
        if acfg.train.warm_start and window_index > 0:
            tcfg.epochs = acfg.train.epochs_warm
        result = ae.train_window(d_blocks, tcfg, channel_fn, params, mask=mask)
        if acfg.train.warm_start:
            params = result.params

        # Inference with fresh noise; average LLR inputs over extra draws.
        d_hat = np.zeros_like(d_blocks)
        for _ in range(max(1, acfg.inference_draws)):
            dh, _ = ae.infer_blocks(d_blocks, result.params, channel_fn, rng)
            d_hat += dh
        d_hat /= max(1, acfg.inference_draws)

        for i in range(n_cw):
            rows = d_hat[i * blocks_per_cw:(i + 1) * blocks_per_cw]
            llrs = ae.llr_from_residuals(rows, result.residual_variance,
                                         cfg.modulation, n_symbols)
            decoded, _, _ = ldpc.decode_bp(llrs, H, max_iters=50)
            errors += int(np.sum(decoded[enc.info_positions] != infos[i]))
            bits += k_info
            codewords += 1
        window_index += 1
    return codewords, errors, bits


def _point_worker(cfg_json: str, point_index: int):
    cfg = ExperimentConfig.model_validate_json(cfg_json)
    t0 = time.perf_counter()
    if cfg.chain == "unquantized-baseline":
        codewords, errors, bits = _orthogonal_point(cfg, point_index, quantized=False)
    elif cfg.chain == "onebit-baseline":
        codewords, errors, bits = _orthogonal_point(cfg, point_index, quantized=True)
    else:
        codewords, errors, bits = _ae_point(cfg, point_index)
    seconds = time.perf_counter() - t0 if cfg.record_timing else 0.0
    return BerPoint(cfg.sweep[point_index], codewords, errors, bits,
                    errors / bits if bits else 0.0, seconds)


def worker_count():
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_chain(cfg: ExperimentConfig, out_dir: Optional[str] = None):
    """Run the configured chain over the sweep; optionally write the CSV.

    Returns (points, csv_text). Deterministic given (config, seed) for
    every field except wall-clock seconds.
    """
    cfg_json = cfg.model_dump_json()
    n_points = len(cfg.sweep)
    workers = min(worker_count(), n_points)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_point_worker, [cfg_json] * n_points,
                                   range(n_points)))
    else:
        points = [_point_worker(cfg_json, i) for i in range(n_points)]
    csv_text = "\n".join([CSV_HEADER] + [p.csv_row() for p in points]) + "\n"
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{cfg.chain}.csv"
        path.write_text(csv_text, encoding="utf-8", newline="\n")
    return points, csv_text


# --- CSV / summary --------------------------------------------------------

def read_csv(path):
    lines = Path(path).read_text(encoding="utf-8").strip().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: unexpected CSV header")
    rows = []
    for ln in lines[1:]:
        f = ln.split(",")
        if len(f) != 6:
            raise ValueError(f"{path}: malformed row {ln!r}")
        rows.append(BerPoint(float(f[0]), int(f[1]), int(f[2]), int(f[3]),
                             float(f[4]), float(f[5])))
    return rows


def summarize(csv_paths):
    """Aligned text table of BER per Es/N0 per chain, with crossover flags."""
    if not csv_paths:
        raise ValueError("need at least one CSV")
    curves = {}
    for p in csv_paths:
        label = Path(p).stem
        curves[label] = {pt.es_n0_db: pt.ber for pt in read_csv(p)}
    labels = list(curves)
    xs = sorted({x for c in curves.values() for x in c})
    width = max(12, max(len(l) for l in labels) + 2)
    header = "es_n0_db".ljust(10) + "".join(l.rjust(width) for l in labels)
    lines = [header]
    for x in xs:
        row = f"{x:<10g}"
        for l in labels:
            v = curves[l].get(x)
            row += (f"{v:.3e}".rjust(width) if v is not None else "-".rjust(width))
        lines.append(row)
    # Crossover detection between each pair of curves on shared points.
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            a, b = curves[labels[i]], curves[labels[j]]
            shared = [x for x in xs if x in a and x in b]
            prev = None
            for x in shared:
                sign = np.sign(a[x] - b[x])
                if prev is not None and sign != 0 and prev != 0 and sign != prev:
                    lines.append(
                        f"crossover: {labels[i]} vs {labels[j]} near {x:g} dB")
                prev = sign if sign != 0 else prev
    return "\n".join(lines) + "\n"


# --- gp-theory report -----------------------------------------------------

class GpResidualModel(BaseModel):
    enabled: bool = True
    es_n0_db: float = 6.0
    inference_draws: int = 6
    blocks: int = 96
    N: int = 24
    G: int = 10


class GpConfig(BaseModel):
    N: int = 2
    G: int = 3
    K: int = 20
    sigma_theta2: float = 2.0
    sigma_b2: float = 0.01
    sigma_z2: float = 0.1
    rho: float = 1.0
    widths: list[int] = [1, 4, 16, 64]
    nets_per_width: int = 500
    pairs: int = 3
    seed: int = 0
    correlation_grid: int = 21
    modulation: Literal[4, 16, 64] = 16
    residuals: GpResidualModel = Field(default_factory=GpResidualModel)


def load_gp_config(path) -> GpConfig:
    with open(path) as f:
        data = yaml.safe_load(f)
    return GpConfig.model_validate(data.get("gp", data))


def kernel_report(cfg: GpConfig) -> str:
    """Closed-form vs quadrature grid, finite-width convergence, residual normality."""
    lines = ["# onebitae gp-theory report"]
    st2, sb2 = cfg.sigma_theta2, cfg.sigma_b2

    lines.append("[closed_form_vs_quadrature]")
    lines.append("rho relu_closed relu_quad relu_err sign_closed sign_quad sign_err")
    grid = np.linspace(-0.99, 0.99, cfg.correlation_grid)
    for rho in grid:
        state = gp.KernelState(1.0, float(rho), 1.0)
        relu_c = gp.kernel_step(state, "relu", st2, sb2).k_zhz
        relu_q = sb2 + st2 * gp.quadrature_relu_cross(1.0, 1.0, float(rho))
        sign_c = gp.kernel_step(state, "sign", st2, sb2).k_zhz
        sign_q = sb2 + st2 * gp.quadrature_sign_cross(float(rho))
        lines.append(f"{rho:.4f} {relu_c:.12e} {relu_q:.12e} "
                     f"{abs(relu_c - relu_q):.3e} {sign_c:.12e} {sign_q:.12e} "
                     f"{abs(sign_c - sign_q):.3e}")

    lines.append("[kernel_convergence]")
    lines.append("pair width k_zz_emp k_zhz_emp k_hzhz_emp "
                 "k_zz k_zhz k_hzhz rel_err_max samples")
    rng = np.random.default_rng(cfg.seed)
    pulse = ch.PulseSpec()
    g_row = ch.pulse_autocorr(pulse, cfg.G, cfg.G * cfg.N)
    for pair in range(cfg.pairs):
        d = rng.standard_normal(2 * cfg.N)
        d_hat = rng.standard_normal(2 * cfg.N)
        analytic = gp.analytic_kernel_for_inputs(d, d_hat, g_row, cfg.rho,
                                                 cfg.sigma_z2, st2, sb2)
        emp = gp.empirical_kernel(d, d_hat, cfg.widths, cfg.nets_per_width,
                                  int(rng.integers(2 ** 63)),
                                  isi_first_row=g_row, rho=cfg.rho,
                                  sigma_z2=cfg.sigma_z2, sigma_theta2=st2,
                                  sigma_b2=sb2)
        ref = np.array([analytic.k_zz, analytic.k_zhz, analytic.k_hzhz])
        for row in emp:
            est = np.array([row["k_zz"], row["k_zhz"], row["k_hzhz"]])
            rel = float(np.max(np.abs(est - ref) / np.maximum(np.abs(ref), 1e-12)))
            lines.append(
                f"{pair} {row['width']} {est[0]:.6e} {est[1]:.6e} {est[2]:.6e} "
                f"{ref[0]:.6e} {ref[1]:.6e} {ref[2]:.6e} {rel:.4f} {row['samples']}")

    if cfg.residuals.enabled:
        coords = residual_samples(cfg)
        passed = sum(
            not gp.normality_test(coords[:, j], alpha=0.01).reject
            for j in range(coords.shape[1]))
        samples = coords.reshape(-1)
        rep = gp.normality_test(samples, alpha=0.01)
        lines.append("[normality]")
        lines.append(f"samples={rep.sample_count}")
        lines.append(f"coords_total={coords.shape[1]}")
        lines.append(f"coords_consistent={passed}")
        lines.append(f"skewness={rep.skewness:.6f}")
        lines.append(f"excess_kurtosis={rep.excess_kurtosis:.6f}")
        lines.append(f"statistic={rep.statistic:.6f}")
        lines.append(f"p_value={rep.p_value:.6e}")
        lines.append(f"alpha={rep.alpha}")
        lines.append(f"verdict={'reject' if rep.reject else 'consistent'}")
        lines.append(f"max_cdf_deviation={rep.max_cdf_deviation:.6f}")
        lines.append("[residual_samples]")
        lines.extend(f"{v:.9e}" for v in samples)
    return "\n".join(lines) + "\n"


def residual_samples(cfg: GpConfig, N=None, epochs=200):
    """Residuals of a trained window, shape (draws * blocks, 2N)."""
    N = N or cfg.residuals.N
    G = cfg.residuals.G
    rng = np.random.default_rng(cfg.seed + 1)
    ccfg = ch.ChannelConfig(rho=cfg.rho, G=G, quantized=True,
                            pulse=ch.PulseSpec(), es_n0_db=cfg.residuals.es_n0_db)
    isi = ch.build_isi(G, N, ccfg.pulse)
    sigma2 = ch.es_n0_to_sigma(cfg.residuals.es_n0_db, ccfg)
    noise = ch.NoiseModel(sigma2, isi)
    channel_fn = _make_channel_fn(ccfg, isi, noise)
    bits_per_sym = int(np.log2(cfg.modulation))
    n_blocks = cfg.residuals.blocks
    bits = rng.integers(0, 2, n_blocks * N * bits_per_sym)
    sym = modem.map_qam(bits, cfg.modulation)
    d_blocks = sym.view(np.float64).reshape(n_blocks, 2 * N)
    params = ae.init_params(N, G, cfg.K, cfg.sigma_theta2, cfg.sigma_b2,
                            seed=int(rng.integers(2 ** 63)))
    tcfg = ae.TrainConfig(epochs=epochs, seed=int(rng.integers(2 ** 63)))
    result = ae.train_window(d_blocks, tcfg, channel_fn, params)
    out = []
    for _ in range(cfg.residuals.inference_draws):
        _, v = ae.infer_blocks(d_blocks, result.params, channel_fn, rng)
        out.append(v.reshape(n_blocks, 2 * N))
    return np.concatenate(out, axis=0)
