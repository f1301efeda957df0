"""End-to-end experiments: uncoded MI measurement, bin-size sweep, raw and coded BER.

Each experiment is a pure function of its configuration and a root seed.
Independent work units (symbols scanned, sweep points, frames) draw from
per-unit derived random streams, so results do not depend on scheduling or
on the worker-pool size.
"""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse import coo_matrix

from .channel import (
    ChannelMatrix,
    GridSpec,
    NoiseModel,
    PointSpread,
    bin_hit_probability,
    build_channel_matrix,
    grid_from_config,
    sample_detections,
)
from .info import expected_mutual_information, joint_from_counts, max_mutual_information, mutual_information
from .ldpc import DecoderConfig, LdpcCode, ldpc_decode, ldpc_encode, llr_from_hard_bits
from .mapping import BitFrame, GrayMap, _gray_table, bit_error_rate

__all__ = [
    "ExperimentReport",
    "run_uncoded_experiment",
    "sweep_bin_sizes",
    "estimate_raw_ber",
    "run_coded_experiment",
    "run_full_pipeline",
]

DEFAULT_EVENTS_PER_SYMBOL = 7
DEFAULT_SWEEP_BINS = (2, 4, 6, 8, 10, 12, 16, 24, 32)


@dataclass
class ExperimentReport:
    """Results of one experiment run, serializable for plotting.

    Every record carries the exact parameter snapshot that produced it, so
    rows stay interpretable when reports are merged.
    """

    experiment: str
    parameters: dict
    records: list = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "experiment": self.experiment,
            "parameters": self.parameters,
            "records": self.records,
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _snapshot(**objs) -> dict:
    out = {}
    for name, obj in objs.items():
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            out[name] = dataclasses.asdict(obj)
        else:
            out[name] = obj
    return out


def _run_units(fn, args_list, workers: int):
    if workers <= 1:
        return [fn(*args) for args in args_list]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, *args) for args in args_list]
        return [f.result() for f in futures]


# --- uncoded scan (joint-distribution measurement) --------------------------

def _scan_block(channel: ChannelMatrix, sents: np.ndarray, events: int, seed: int):
    xs, ys, cs = [], [], []
    for sent in sents:
        counts = sample_detections(channel, int(sent), events, (seed, int(sent)))
        nz = np.flatnonzero(counts)
        xs.append(np.full(nz.size, sent, dtype=np.int64))
        ys.append(nz.astype(np.int64))
        cs.append(counts[nz])
    return np.concatenate(xs), np.concatenate(ys), np.concatenate(cs)


def run_uncoded_experiment(
    grid: GridSpec,
    psf: PointSpread,
    noise: NoiseModel,
    events_per_symbol: int = DEFAULT_EVENTS_PER_SYMBOL,
    seed: int = 0,
    workers: int = 1,
):
    """Scan every symbol uniformly and sample detections.

    Returns (counts, sampled_mi, expected_mi): the sparse detection-count
    table, the plug-in mutual information of the sampled joint, and the
    exact expected MI of the underlying channel matrix.  The plug-in
    estimate is biased upward at small event budgets (a handful of events
    per symbol cannot populate the tails of the joint).
    """
    if events_per_symbol < 1:
        raise ValueError("events_per_symbol must be >= 1")
    channel = build_channel_matrix(grid, psf, noise)
    n = grid.n_symbols
    blocks = np.array_split(np.arange(n, dtype=np.int64), max(1, min(n, 4 * max(workers, 1))))
    parts = _run_units(_scan_block, [(channel, b, events_per_symbol, seed) for b in blocks if b.size], workers)
    xs = np.concatenate([p[0] for p in parts])
    ys = np.concatenate([p[1] for p in parts])
    cs = np.concatenate([p[2] for p in parts])
    counts = coo_matrix((cs, (xs, ys)), shape=(n, n))
    sampled_mi = mutual_information(joint_from_counts(counts))
    expected_mi = expected_mutual_information(channel)
    return counts, sampled_mi, expected_mi


# --- bin-size tradeoff sweep -------------------------------------------------

def _sweep_point(detector_width: int, detector_height: int, bin_size: int,
                 psf: PointSpread, r_low: float, r_high: float) -> dict:
    grid = grid_from_config(detector_width, detector_height, bin_size)
    center = (grid.n_rows // 2) * grid.n_cols + grid.n_cols // 2
    hit = bin_hit_probability(psf, grid, center, center)
    mi_low = expected_mutual_information(build_channel_matrix(grid, psf, NoiseModel(r_low)))
    mi_high = expected_mutual_information(build_channel_matrix(grid, psf, NoiseModel(r_high)))
    return {
        "bin_size": bin_size,
        "n_symbols": grid.n_symbols,
        "i_max_bits": max_mutual_information(grid.n_symbols),
        "hit_prob": hit,
        "mi_rlow_bits": mi_low,
        "mi_rhigh_bits": mi_high,
    }


def sweep_bin_sizes(
    bin_sizes: Sequence[int],
    detector_width: int,
    detector_height: int,
    psf: PointSpread,
    r_low: float = 10.0,
    r_high: float = 100.0,
    workers: int = 1,
) -> ExperimentReport:
    """Alphabet-size / crosstalk tradeoff: per bin size emit the noiseless
    limit log2(N), the centered hit probability, and the exact expected MI
    at the low and high signal-to-dark ratios."""
    bin_sizes = list(bin_sizes)
    if not bin_sizes:
        raise ValueError("empty bin-size list")
    for b in bin_sizes:
        grid_from_config(detector_width, detector_height, b)  # validate before any work
    params = _snapshot(psf=psf) | {
        "detector_width": detector_width,
        "detector_height": detector_height,
        "r_low": r_low,
        "r_high": r_high,
        "bin_sizes": bin_sizes,
    }
    args = [(detector_width, detector_height, b, psf, r_low, r_high) for b in bin_sizes]
    records = _run_units(_sweep_point, args, workers)
    for rec in records:
        rec["params"] = {**params, "bin_size": rec["bin_size"]}
    return ExperimentReport("sweep-bins", params, records)


# --- raw (uncoded) bit error rate of the Gray-mapped channel -----------------

def _gray_hamming(n_a: int, n_b: int, width: int) -> np.ndarray:
    """(n_a, n_b) Hamming distances between Gray patterns of the indices."""
    table = _gray_table(width)
    return (table[:n_a, None, :] != table[None, :n_b, :]).sum(axis=2)


def estimate_raw_ber(channel: ChannelMatrix, gmap: GrayMap) -> float:
    """Expected flipped-bit fraction when uniformly chosen symbols cross the
    channel and both ends apply the Gray mapping.

    The channel factorizes over the axes and Hamming distance adds over the
    two coordinate fields, so the double sum over symbol pairs reduces to
    exact per-axis sums.
    """
    grid = channel.grid
    gmap.check_grid(grid)
    ham_x = _gray_hamming(grid.n_cols, grid.n_cols, gmap.bits_x)
    ham_y = _gray_hamming(grid.n_rows, grid.n_rows, gmap.bits_y)
    sig = (
        float(np.mean(np.sum(channel.col_given_col * ham_x, axis=1)))
        + float(np.mean(np.sum(channel.row_given_row * ham_y, axis=1)))
    )
    dark = float(np.mean(ham_x)) + float(np.mean(ham_y))
    return (channel.signal_fraction * sig + channel.dark_fraction * dark) / gmap.width


# --- coded BER waterfall over the abstract binary symmetric channel ----------

def _coded_point(code: LdpcCode, crossover: float, point_idx: int,
                 frames: int, seed: int, decoder: DecoderConfig) -> dict:
    ber_out = 0.0
    ber_in_emp = 0.0
    converged = 0
    iterations = 0
    for frame_idx in range(frames):
        rng = np.random.default_rng([seed, point_idx, frame_idx])
        info = rng.integers(0, 2, size=code.k, dtype=np.uint8)
        codeword = ldpc_encode(info, code)
        flips = (rng.random(code.n) < crossover).astype(np.uint8)
        received = codeword ^ flips
        result = ldpc_decode(llr_from_hard_bits(received, crossover), code, decoder)
        ber_out += bit_error_rate(info, result.info_bits)
        ber_in_emp += float(np.mean(flips))
        converged += int(result.converged)
        iterations += result.iterations
    return {
        "ber_in": crossover,
        "ber_out": ber_out / frames,
        "frames": frames,
        "converged_frac": converged / frames,
        "ber_in_empirical": ber_in_emp / frames,
        "mean_iterations": iterations / frames,
    }


def run_coded_experiment(
    crossovers: Sequence[float],
    frames_per_point: int,
    code: LdpcCode,
    seed: int = 0,
    decoder: DecoderConfig = DecoderConfig(),
    workers: int = 1,
) -> ExperimentReport:
    """Post-decoding BER versus raw BER on the binary symmetric channel."""
    crossovers = [float(p) for p in crossovers]
    if not crossovers:
        raise ValueError("empty crossover list")
    for p in crossovers:
        if not 0.0 < p < 0.5:
            raise ValueError(f"crossover {p} outside (0, 0.5)")
    if frames_per_point < 1:
        raise ValueError("frames_per_point must be >= 1")
    params = _snapshot(decoder=decoder) | {
        "n": code.n,
        "k": code.k,
        "crossovers": crossovers,
        "frames_per_point": frames_per_point,
        "seed": seed,
    }
    args = [(code, p, i, frames_per_point, seed, decoder) for i, p in enumerate(crossovers)]
    records = _run_units(_coded_point, args, workers)
    for rec in records:
        rec["params"] = {**params, "crossover": rec["ber_in"]}
    return ExperimentReport("coded-ber", params, records)


# --- full coded link over the sampled photon channel -------------------------

def _packing_widths(grid: GridSpec, gmap: GrayMap) -> tuple[int, int]:
    """Per-axis word widths for loss-free packing: arbitrary codeword bits can
    only be represented if every word addresses a real grid position, so each
    width is capped at the largest power of two that fits the axis."""
    bx = min(gmap.bits_x, grid.n_cols.bit_length() - 1)
    by = min(gmap.bits_y, grid.n_rows.bit_length() - 1)
    return max(bx, 1), max(by, 1)


def run_full_pipeline(
    message,
    grid: GridSpec,
    psf: PointSpread,
    noise: NoiseModel,
    gmap: GrayMap,
    code: LdpcCode,
    seed: int = 0,
    decoder: DecoderConfig | None = None,
):
    """Send a message end to end: pad, encode, pack to symbols, sample one
    detection per symbol, unpack, form LLRs, decode, unpad.

    Returns (decoded_message, diagnostics).  Packing uses the grid's largest
    power-of-two sub-grid (12 bits per symbol at the default geometry) so
    that every codeword word maps to a sendable symbol; received symbols
    outside the sub-grid are clamped onto it and counted.

    The decode stage defaults to sum-product rather than min-sum: a dark
    count flips several bits of one word at once, and those correlated
    bursts park normalized min-sum in stable wrong fixed points along the
    parity accumulator chain (the message still decodes, but the syndrome
    never clears).  Exact sum-product resolves them.
    """
    if decoder is None:
        decoder = DecoderConfig(algorithm="sum-product")
    message = np.asarray(message, dtype=np.uint8)
    if message.ndim != 1 or message.size == 0:
        raise ValueError("message must be a nonempty 1-D bit sequence")
    if message.size > code.k:
        raise ValueError(f"message of {message.size} bits exceeds frame capacity {code.k}")
    if grid.n_cols < 2 or grid.n_rows < 2:
        raise ValueError("grid must span at least 2x2 symbols to carry codeword bits")

    channel = build_channel_matrix(grid, psf, noise)
    frame = BitFrame.pad(message, code.k)
    codeword = ldpc_encode(frame.bits, code)

    bx, by = _packing_widths(grid, gmap)
    width = bx + by
    n_pad_bits = (-code.n) % width
    word_bits = BitFrame.pad(codeword, code.n + n_pad_bits).bits.reshape(-1, width)

    # word -> sub-grid coordinates (always valid by construction)
    tx_table = _gray_table(bx)
    ty_table = _gray_table(by)
    def _decode_gray_block(block: np.ndarray) -> np.ndarray:
        acc = np.cumsum(block, axis=1, dtype=np.int64) & 1  # prefix XOR
        weights = 1 << np.arange(block.shape[1] - 1, -1, -1, dtype=np.int64)
        return acc @ weights

    cols = _decode_gray_block(word_bits[:, :bx])
    rows = _decode_gray_block(word_bits[:, bx:])
    sent_symbols = rows * grid.n_cols + cols

    received = np.empty_like(sent_symbols)
    for pos, sym in enumerate(sent_symbols):
        counts = sample_detections(channel, int(sym), 1, (seed, pos))
        received[pos] = int(np.argmax(counts))

    rx_rows, rx_cols = np.divmod(received, grid.n_cols)
    over = (rx_cols >= (1 << bx)) | (rx_rows >= (1 << by))
    rx_cols = np.minimum(rx_cols, (1 << bx) - 1)
    rx_rows = np.minimum(rx_rows, (1 << by) - 1)
    rx_bits = np.concatenate([tx_table[rx_cols], ty_table[rx_rows]], axis=1).ravel()
    rx_codeword = rx_bits[: code.n]

    crossover = min(max(_subgrid_expected_ber(channel, gmap, bx, by), 1e-9), 0.499)
    result = ldpc_decode(llr_from_hard_bits(rx_codeword, crossover), code, decoder)
    decoded = result.info_bits[: message.size]

    diagnostics = {
        "n_symbols_sent": int(sent_symbols.size),
        "symbol_errors": int(np.sum(received != sent_symbols)),
        "out_of_alphabet": int(np.sum(over)),
        "raw_ber": bit_error_rate(codeword, rx_codeword),
        "crossover_used": crossover,
        "post_ber": bit_error_rate(message, decoded),
        "converged": result.converged,
        "iterations": result.iterations,
        "packing_bits_x": bx,
        "packing_bits_y": by,
    }
    return decoded, diagnostics


def _subgrid_expected_ber(channel: ChannelMatrix, gmap: GrayMap, bx: int, by: int) -> float:
    """Model-expected raw BER of the pipeline's sub-grid transmission,
    including receive-side clamping; this is what the receiver uses as the
    LLR crossover (it knows the channel model but not the sent bits)."""
    grid = channel.grid

    def axis_terms(trans: np.ndarray, n_axis: int, bits: int) -> tuple[float, float]:
        n_sub = 1 << bits
        table = _gray_table(bits)
        clamped = np.minimum(np.arange(n_axis), n_sub - 1)
        # Hamming between sent sub-grid pattern and clamped received pattern
        ham = (table[:n_sub, None, :] != table[clamped][None, :, :]).sum(axis=2)
        sig = float(np.mean(np.sum(trans[:n_sub, :n_axis] * ham, axis=1)))
        dark = float(np.mean(ham))
        return sig, dark

    sx, dx = axis_terms(channel.col_given_col, grid.n_cols, bx)
    sy, dy = axis_terms(channel.row_given_row, grid.n_rows, by)
    a, b = channel.signal_fraction, channel.dark_fraction
    return (a * (sx + sy) + b * (dx + dy)) / (bx + by)
