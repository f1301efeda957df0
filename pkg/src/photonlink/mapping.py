"""Gray-coded symbol/bit mapping and codeword-to-symbol packing.

Column and row of a grid symbol are encoded independently with a
binary-reflected Gray code, x-coordinate bits first, most significant bit
first.  Crosstalk is dominated by the four nearest neighbors, and each of
those differs from the target in exactly one bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import GridSpec

__all__ = [
    "GrayMap",
    "BitFrame",
    "gray_encode",
    "gray_decode",
    "symbol_to_bits",
    "bits_to_symbol",
    "symbols_to_bits",
    "bits_to_symbols",
    "pack_bits_to_symbols",
    "unpack_symbols_to_bits",
    "bit_error_rate",
]


def gray_encode(value: int, width: int) -> np.ndarray:
    """Binary-reflected Gray code of ``value`` as a uint8 bit array, MSB first."""
    if value < 0 or value >= (1 << width):
        raise ValueError(f"value {value} does not fit in {width} bits")
    g = value ^ (value >> 1)
    return np.array([(g >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def gray_decode(bits) -> int:
    """Inverse of gray_encode (prefix-XOR of the bit sequence)."""
    value = 0
    acc = 0
    for b in np.asarray(bits, dtype=np.uint8):
        acc ^= int(b)
        value = (value << 1) | acc
    return value


@dataclass(frozen=True)
class GrayMap:
    """Bit widths for the independently coded x and y coordinates."""

    bits_x: int = 7
    bits_y: int = 7

    def __post_init__(self) -> None:
        if self.bits_x < 1 or self.bits_y < 1:
            raise ValueError("bit widths must be >= 1")

    @property
    def width(self) -> int:
        return self.bits_x + self.bits_y

    def check_grid(self, grid: GridSpec) -> None:
        if (1 << self.bits_x) < grid.n_cols or (1 << self.bits_y) < grid.n_rows:
            raise ValueError(
                f"map {self.bits_x}+{self.bits_y} bits cannot address a "
                f"{grid.n_cols}x{grid.n_rows} grid"
            )

    @classmethod
    def for_grid(cls, grid: GridSpec) -> "GrayMap":
        return cls(
            bits_x=max(1, int(grid.n_cols - 1).bit_length()),
            bits_y=max(1, int(grid.n_rows - 1).bit_length()),
        )


def symbol_to_bits(symbol: int, grid: GridSpec, gmap: GrayMap) -> np.ndarray:
    """Concatenated gray(col) ++ gray(row) bit pattern for one symbol."""
    gmap.check_grid(grid)
    if not 0 <= symbol < grid.n_symbols:
        raise IndexError(f"symbol {symbol} out of range for {grid.n_symbols}-symbol grid")
    row, col = divmod(symbol, grid.n_cols)
    return np.concatenate([gray_encode(col, gmap.bits_x), gray_encode(row, gmap.bits_y)])


def bits_to_symbol(bits, grid: GridSpec, gmap: GrayMap) -> tuple[int, bool]:
    """Decode a bit pattern to (symbol, out_of_alphabet).

    Coordinates that decode beyond the grid are clamped to the nearest valid
    coordinate; the flag reports that clamping happened rather than failing,
    since the receiver always outputs some grid position.
    """
    gmap.check_grid(grid)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (gmap.width,):
        raise ValueError(f"expected {gmap.width} bits, got shape {bits.shape}")
    col = gray_decode(bits[: gmap.bits_x])
    row = gray_decode(bits[gmap.bits_x :])
    clamped = col >= grid.n_cols or row >= grid.n_rows
    col = min(col, grid.n_cols - 1)
    row = min(row, grid.n_rows - 1)
    return row * grid.n_cols + col, clamped


def _gray_table(width: int) -> np.ndarray:
    """(2^width, width) table of Gray bit patterns."""
    values = np.arange(1 << width, dtype=np.int64)
    g = values ^ (values >> 1)
    shifts = np.arange(width - 1, -1, -1)
    return ((g[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def symbols_to_bits(symbols: np.ndarray, grid: GridSpec, gmap: GrayMap) -> np.ndarray:
    """Vectorized symbol_to_bits: (n,) symbols -> (n, width) uint8 bits."""
    gmap.check_grid(grid)
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= grid.n_symbols):
        raise IndexError("symbol index out of range")
    rows, cols = np.divmod(symbols, grid.n_cols)
    tx = _gray_table(gmap.bits_x)
    ty = _gray_table(gmap.bits_y)
    return np.concatenate([tx[cols], ty[rows]], axis=1)


def bits_to_symbols(bits: np.ndarray, grid: GridSpec, gmap: GrayMap) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized bits_to_symbol: (n, width) bits -> (symbols, out_of_alphabet flags)."""
    gmap.check_grid(grid)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 2 or bits.shape[1] != gmap.width:
        raise ValueError(f"expected (n, {gmap.width}) bit array, got shape {bits.shape}")

    def decode_block(block: np.ndarray) -> np.ndarray:
        acc = np.zeros(block.shape[0], dtype=np.int64)
        out = np.zeros(block.shape[0], dtype=np.int64)
        for i in range(block.shape[1]):
            acc ^= block[:, i]
            out = (out << 1) | acc
        return out

    cols = decode_block(bits[:, : gmap.bits_x].astype(np.int64))
    rows = decode_block(bits[:, gmap.bits_x :].astype(np.int64))
    clamped = (cols >= grid.n_cols) | (rows >= grid.n_rows)
    cols = np.minimum(cols, grid.n_cols - 1)
    rows = np.minimum(rows, grid.n_rows - 1)
    return rows * grid.n_cols + cols, clamped


@dataclass(frozen=True)
class BitFrame:
    """A bit sequence padded up to a block boundary with zeros."""

    bits: np.ndarray
    n_padding: int

    def __post_init__(self) -> None:
        self.bits.setflags(write=False)
        if self.n_padding:
            if not np.all(self.bits[len(self.bits) - self.n_padding :] == 0):
                raise ValueError("padding bits must be zero")

    @property
    def payload(self) -> np.ndarray:
        return self.bits[: len(self.bits) - self.n_padding]

    @classmethod
    def pad(cls, payload, block_length: int) -> "BitFrame":
        payload = np.asarray(payload, dtype=np.uint8)
        if payload.ndim != 1:
            raise ValueError("payload must be a 1-D bit sequence")
        if len(payload) > block_length:
            raise ValueError(f"payload of {len(payload)} bits exceeds block of {block_length}")
        n_pad = block_length - len(payload)
        return cls(np.concatenate([payload, np.zeros(n_pad, dtype=np.uint8)]), n_pad)


def pack_bits_to_symbols(bits, grid: GridSpec, gmap: GrayMap) -> tuple[np.ndarray, int, int]:
    """Pack a bit string into grid symbols, zero-padding the final partial symbol.

    Returns (symbols, n_padding_bits, n_clamped); a 64800-bit codeword on the
    default 14-bit map becomes 4629 symbols with 6 trailing pad bits.  Words
    whose coordinates fall outside the grid are clamped and counted, never
    fatal.  Note that arbitrary bit strings hit such words whenever a grid
    dimension is not a power of two; see link.run_full_pipeline for the
    loss-free packing used on the end-to-end channel.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    w = gmap.width
    n_pad = (-len(bits)) % w
    frame = BitFrame.pad(bits, len(bits) + n_pad)
    symbols, clamped = bits_to_symbols(frame.bits.reshape(-1, w), grid, gmap)
    return symbols, n_pad, int(np.sum(clamped))


def unpack_symbols_to_bits(symbols: np.ndarray, grid: GridSpec, gmap: GrayMap, n_bits: int) -> np.ndarray:
    """Inverse of pack_bits_to_symbols; ``n_bits`` strips the trailing pad bits."""
    bits = symbols_to_bits(symbols, grid, gmap).ravel()
    if n_bits > bits.size:
        raise ValueError(f"cannot take {n_bits} bits from {bits.size} unpacked bits")
    return bits[:n_bits]


def bit_error_rate(sent, received) -> float:
    """Fraction of differing bits between two equal-length bit strings."""
    a = np.asarray(sent, dtype=np.uint8)
    b = np.asarray(received, dtype=np.uint8)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"bit strings must be 1-D and equal length, got {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty bit strings")
    return float(np.mean(a != b))
