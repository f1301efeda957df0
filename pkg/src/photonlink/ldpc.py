"""Rate-1/2 LDPC encoder and iterative decoder (DVB-S.2 normal frame).

The parity-check structure is the irregular repeat-accumulate construction
of the digital-TV satellite broadcast standard: information bits come in
groups of 360; the bundled address table lists, per group, the parity
accumulators touched by the group's first bit, and bit t of the group
touches (addr + t*q) mod (n-k).  Parity bits are chained, so check j
involves parity bits j and j-1.  Encoding is therefore a scatter-XOR of the
information bits followed by a running XOR over the accumulators; decoding
is belief propagation on the sparse bipartite graph, by default normalized
min-sum with a flooding schedule and early stop once every check is
satisfied.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import NamedTuple, Sequence

import numpy as np

__all__ = [
    "LdpcTableError",
    "DecoderConfig",
    "LdpcCode",
    "DecodeResult",
    "load_parity_table",
    "load_dvbs2_rate12",
    "ldpc_encode",
    "ldpc_decode",
    "parity_syndrome",
    "llr_from_hard_bits",
    "write_frame_dump",
    "read_frame_dump",
]

_GROUP = 360
_DATA_ASSET = "dvbs2_r12_n64800.txt"


class LdpcTableError(ValueError):
    """Parity address table that fails structural validation."""


@dataclass(frozen=True)
class DecoderConfig:
    """Belief-propagation settings.

    ``min-sum`` scales check messages by ``normalization`` (0.75 is standard
    practice); ``sum-product`` runs the exact tanh rule for accuracy
    comparisons and ignores the normalization factor.
    """

    algorithm: str = "min-sum"
    normalization: float = 0.75
    max_iterations: int = 50

    def __post_init__(self) -> None:
        if self.algorithm not in ("min-sum", "sum-product"):
            raise ValueError(f"unknown decoder algorithm {self.algorithm!r}")
        if not 0.0 < self.normalization <= 1.0:
            raise ValueError(f"normalization must be in (0, 1], got {self.normalization}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


class LdpcCode:
    """Parity structure of a repeat-accumulate LDPC code plus edge adjacency.

    Construction precomputes the flat edge lists (check index, variable
    index per edge) and a zero-padded per-check edge matrix used by the
    vectorized decoder.  Instances are immutable and safe to share across
    concurrently decoded frames.
    """

    def __init__(self, n: int, k: int, table: Sequence[Sequence[int]]):
        if n <= 0 or not 0 < k < n:
            raise LdpcTableError(f"invalid code dimensions n={n}, k={k}")
        m = n - k
        if k % _GROUP or m % _GROUP:
            raise LdpcTableError(f"n={n}, k={k} are not multiples of the group size {_GROUP}")
        q = m // _GROUP
        groups = tuple(tuple(int(a) for a in row) for row in table)
        if len(groups) != k // _GROUP:
            raise LdpcTableError(f"expected {k // _GROUP} address groups, got {len(groups)}")
        for g, row in enumerate(groups):
            if not row:
                raise LdpcTableError(f"group {g} is empty")
            if len(set(row)) != len(row):
                raise LdpcTableError(f"group {g} repeats a parity address")
            for a in row:
                if not 0 <= a < m:
                    raise LdpcTableError(f"group {g}: address {a} outside [0, {m})")
        # check-node degree statistics: with the q-strided replication each
        # table address feeds one full residue class mod q, so uniform
        # coverage of the residues is exactly "every check sees the same
        # number of information bits" (5 for the rate-1/2 standard table)
        residues = np.bincount([a % q for row in groups for a in row], minlength=q)
        if residues.min() != residues.max():
            raise LdpcTableError(
                "information-edge count varies across checks "
                f"(min {residues.min()}, max {residues.max()}); table is corrupt"
            )

        self.n = n
        self.k = k
        self.m = m
        self.q = q
        self.table = groups

        t = np.arange(_GROUP, dtype=np.int64)
        info_var = []
        info_check = []
        for g, row in enumerate(groups):
            cols = g * _GROUP + t
            for a in row:
                info_var.append(cols)
                info_check.append((a + t * q) % m)
        self._enc_col = np.concatenate(info_var)
        self._enc_addr = np.concatenate(info_check)

        # accumulator chain: check j sees parity bits j and j-1
        edge_var = np.concatenate([self._enc_col, k + np.arange(m), k + np.arange(m - 1)])
        edge_check = np.concatenate([self._enc_addr, np.arange(m), np.arange(1, m)])
        self._edge_var = edge_var.astype(np.int64)
        self._edge_check = edge_check.astype(np.int64)
        self.n_edges = len(edge_var)

        deg = np.bincount(self._edge_check, minlength=m)
        dmax = int(deg.max())
        order = np.argsort(self._edge_check, kind="stable")
        starts = np.zeros(m + 1, dtype=np.int64)
        np.cumsum(deg, out=starts[1:])
        slot = np.arange(self.n_edges) - starts[self._edge_check[order]]
        pad_idx = np.zeros((m, dmax), dtype=np.int64)
        pad_mask = np.zeros((m, dmax), dtype=bool)
        pad_idx[self._edge_check[order], slot] = order
        pad_mask[self._edge_check[order], slot] = True
        self._pad_idx = pad_idx
        self._pad_mask = pad_mask
        self._flat_edge = pad_idx[pad_mask]
        for arr in (self._enc_col, self._enc_addr, self._edge_var, self._edge_check,
                    self._pad_idx, self._pad_mask, self._flat_edge):
            arr.setflags(write=False)

    @property
    def rate(self) -> float:
        return self.k / self.n

    def __repr__(self) -> str:  # pragma: no cover
        return f"LdpcCode(n={self.n}, k={self.k}, rate={self.rate:g})"


def load_parity_table(path_or_file) -> LdpcCode:
    """Parse a plain-text parity table: header line 'n k', then one line of
    space-separated check addresses per 360-bit information group."""
    if hasattr(path_or_file, "read"):
        text = path_or_file.read()
    else:
        with open(path_or_file) as f:
            text = f.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise LdpcTableError("empty parity table file")
    header = lines[0].split()
    if len(header) != 2:
        raise LdpcTableError(f"bad header {lines[0]!r}, expected 'n k'")
    n, k = int(header[0]), int(header[1])
    try:
        table = [[int(tok) for tok in ln.split()] for ln in lines[1:]]
    except ValueError as e:
        raise LdpcTableError(f"non-integer address in table: {e}") from None
    return LdpcCode(n, k, table)


@lru_cache(maxsize=1)
def load_dvbs2_rate12() -> LdpcCode:
    """The bundled rate-1/2 normal-frame code (n=64800, k=32400)."""
    ref = resources.files("photonlink.data").joinpath(_DATA_ASSET)
    with ref.open("r") as f:
        code = load_parity_table(f)
    if (code.n, code.k) != (64800, 32400):
        raise LdpcTableError("bundled asset does not declare the rate-1/2 normal frame")
    return code


def _check_bits(bits, length: int, name: str) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.shape != (length,):
        raise ValueError(f"{name} must have shape ({length},), got {arr.shape}")
    arr = arr.astype(np.uint8)
    if np.any(arr > 1):
        raise ValueError(f"{name} must be 0/1 valued")
    return arr


def ldpc_encode(info_bits, code: LdpcCode) -> np.ndarray:
    """Systematic encoding: information bits followed by accumulator parity bits."""
    info = _check_bits(info_bits, code.k, "info_bits")
    adds = np.bincount(code._enc_addr, weights=info[code._enc_col].astype(np.float64),
                       minlength=code.m).astype(np.int64)
    parity = (np.cumsum(adds) & 1).astype(np.uint8)
    return np.concatenate([info, parity])


def parity_syndrome(bits, code: LdpcCode) -> np.ndarray:
    """Per-check parity of a candidate codeword (all zero iff valid)."""
    cw = _check_bits(bits, code.n, "codeword")
    sums = np.bincount(code._edge_check, weights=cw[code._edge_var].astype(np.float64),
                       minlength=code.m).astype(np.int64)
    return (sums & 1).astype(np.uint8)


class DecodeResult(NamedTuple):
    info_bits: np.ndarray
    converged: bool
    iterations: int


def ldpc_decode(llrs, code: LdpcCode, config: DecoderConfig = DecoderConfig()) -> DecodeResult:
    """Belief propagation over the code graph; positive LLR means bit 0 more likely.

    Stops as soon as the hard decisions satisfy every parity check;
    non-convergence within ``config.max_iterations`` is reported through the
    flag, and the hard decisions on the information bits are returned either
    way.
    """
    L = np.asarray(llrs, dtype=np.float64)
    if L.shape != (code.n,):
        raise ValueError(f"expected {code.n} LLRs, got shape {L.shape}")
    if not np.all(np.isfinite(L)):
        raise ValueError("LLRs must be finite")

    hard = (L < 0).astype(np.uint8)
    # a tied (exactly zero) total is an erasure: never report convergence on it
    if not np.any(L == 0.0) and not parity_syndrome(hard, code).any():
        return DecodeResult(hard[: code.k], True, 0)

    pad_idx = code._pad_idx
    mask = code._pad_mask
    m, dmax = pad_idx.shape
    rows = np.arange(m)
    col_ids = np.arange(dmax)[None, :]
    min_sum = config.algorithm == "min-sum"

    msg_vc = L[code._edge_var]
    msg_cv = np.zeros(code.n_edges)
    for iteration in range(1, config.max_iterations + 1):
        M = msg_vc[pad_idx]
        if min_sum:
            mag = np.where(mask, np.abs(M), np.inf)
            sgn = np.where(mask & (M < 0), -1.0, 1.0)
            first = np.argmin(mag, axis=1)
            min1 = mag[rows, first]
            mag2 = mag.copy()
            mag2[rows, first] = np.inf
            min2 = mag2.min(axis=1)
            ext_mag = np.where(col_ids == first[:, None], min2[:, None], min1[:, None])
            ext = config.normalization * np.prod(sgn, axis=1)[:, None] * sgn * ext_mag
        else:
            T = np.where(mask, np.tanh(np.clip(M, -38.0, 38.0) / 2.0), 1.0)
            zero = mask & (T == 0.0)
            n_zero = zero.sum(axis=1)
            prod_nz = np.prod(np.where(zero, 1.0, T), axis=1)
            with np.errstate(divide="ignore", invalid="ignore"):
                ext_t = np.where(
                    n_zero[:, None] == 0,
                    prod_nz[:, None] / T,
                    np.where(zero & (n_zero[:, None] == 1), prod_nz[:, None], 0.0),
                )
            ext = 2.0 * np.arctanh(np.clip(ext_t, -1.0 + 1e-15, 1.0 - 1e-15))
        msg_cv[code._flat_edge] = ext[mask]

        totals = L + np.bincount(code._edge_var, weights=msg_cv, minlength=code.n)
        msg_vc = totals[code._edge_var] - msg_cv
        hard = (totals < 0).astype(np.uint8)
        if not np.any(totals == 0.0) and not parity_syndrome(hard, code).any():
            return DecodeResult(hard[: code.k], True, iteration)
    return DecodeResult(hard[: code.k], False, config.max_iterations)


def llr_from_hard_bits(bits, crossover: float) -> np.ndarray:
    """Binary-symmetric-channel LLRs: +log((1-p)/p) for a received 0, minus for a 1."""
    if not 0.0 < crossover < 0.5:
        raise ValueError(f"crossover must be in (0, 0.5), got {crossover}")
    arr = np.asarray(bits, dtype=np.uint8)
    magnitude = math.log((1.0 - crossover) / crossover)
    return magnitude * (1.0 - 2.0 * arr.astype(np.float64))


# --- golden-test frame dumps: one hexadecimal codeword per line ------------

def write_frame_dump(path_or_file, frames: Sequence[np.ndarray], n: int = 64800) -> None:
    def _write(f):
        for frame in frames:
            cw = _check_bits(frame, n, "codeword")
            f.write(np.packbits(cw).tobytes().hex() + "\n")

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="") as f:
            _write(f)


def read_frame_dump(path_or_file, n: int = 64800) -> list[np.ndarray]:
    if hasattr(path_or_file, "read"):
        lines = path_or_file.read().split()
    else:
        with open(path_or_file) as f:
            lines = f.read().split()
    frames = []
    for line in lines:
        bits = np.unpackbits(np.frombuffer(bytes.fromhex(line), dtype=np.uint8))
        if bits.size < n:
            raise ValueError(f"frame line holds {bits.size} bits, expected {n}")
        frames.append(bits[:n])
    return frames
