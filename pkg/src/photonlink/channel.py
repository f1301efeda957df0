"""Symbol grid, Gaussian crosstalk and dark counts of the spatial single-photon channel.

The transmission alphabet is a rectangular grid of binned detector pixels,
numbered row-major (left to right, top to bottom).  A photon aimed at the
center of one bin lands according to a separable 2-D Gaussian point spread,
so the probability of hitting any bin is a product of one-dimensional
error-function differences.  Detector dark counts add a uniform background
over the symbol alphabet.  Everything is expressed conditioned on a
detection event: mass that falls off the binned region is treated as "no
detection" and each row of the channel matrix is renormalized.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence, TextIO

import numpy as np
from scipy.special import erf

__all__ = [
    "InvalidDimensionError",
    "GridSpec",
    "PointSpread",
    "NoiseModel",
    "ChannelMatrix",
    "DetectionEvent",
    "grid_from_config",
    "symbol_to_bin",
    "bin_to_symbol",
    "bin_hit_probability",
    "build_channel_matrix",
    "sample_detections",
    "write_counts_csv",
    "read_counts_csv",
    "write_channel_matrix_csv",
]

# Gaussian FWHM = 2*sqrt(2*ln 2) * sigma
_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))

# Reference geometry: 896x648 px sensor, 8x8 binning -> 112x81 = 9072 symbols
DEFAULT_DETECTOR_WIDTH = 896
DEFAULT_DETECTOR_HEIGHT = 648
DEFAULT_BIN_SIZE = 8
DEFAULT_FWHM = 8.0
DEFAULT_SIGNAL_TO_DARK_RATIO = 10.07


class InvalidDimensionError(ValueError):
    """Detector/bin geometry that cannot form a symbol grid."""


@dataclass(frozen=True)
class GridSpec:
    """Detector geometry and pixel binning defining the symbol alphabet."""

    detector_width: int
    detector_height: int
    bin_size: int
    n_cols: int
    n_rows: int
    n_symbols: int


def grid_from_config(detector_width: int, detector_height: int, bin_size: int) -> GridSpec:
    """Build a GridSpec by integer division of the detector into square bins.

    Leftover pixels at the right/bottom edges belong to no symbol.
    """
    if detector_width < 1 or detector_height < 1 or bin_size < 1:
        raise InvalidDimensionError(
            f"detector {detector_width}x{detector_height} px with bin size "
            f"{bin_size} px: all dimensions must be >= 1"
        )
    if bin_size > min(detector_width, detector_height):
        raise InvalidDimensionError(
            f"bin size {bin_size} px exceeds detector "
            f"{detector_width}x{detector_height} px"
        )
    n_cols = detector_width // bin_size
    n_rows = detector_height // bin_size
    return GridSpec(
        detector_width=detector_width,
        detector_height=detector_height,
        bin_size=bin_size,
        n_cols=n_cols,
        n_rows=n_rows,
        n_symbols=n_cols * n_rows,
    )


def symbol_to_bin(symbol: int, grid: GridSpec) -> tuple[int, int, float, float]:
    """Return (col, row, center_x, center_y) of a symbol's detection area in pixels."""
    if not 0 <= symbol < grid.n_symbols:
        raise IndexError(f"symbol {symbol} out of range for {grid.n_symbols}-symbol grid")
    row, col = divmod(symbol, grid.n_cols)
    b = grid.bin_size
    return col, row, (col + 0.5) * b, (row + 0.5) * b


def bin_to_symbol(col: int, row: int, grid: GridSpec) -> int:
    """Inverse of symbol_to_bin for valid (col, row) coordinates."""
    if not (0 <= col < grid.n_cols and 0 <= row < grid.n_rows):
        raise IndexError(f"bin ({col}, {row}) outside {grid.n_cols}x{grid.n_rows} grid")
    return row * grid.n_cols + col


@dataclass(frozen=True)
class PointSpread:
    """Separable Gaussian focal spot, parameterized by FWHM in detector pixels.

    ``pointing_offset_*`` is a systematic aim error added to the target bin
    center (0 = photon aimed exactly at the center).
    """

    fwhm_x: float = DEFAULT_FWHM
    fwhm_y: float = DEFAULT_FWHM
    pointing_offset_x: float = 0.0
    pointing_offset_y: float = 0.0

    def __post_init__(self) -> None:
        if not (self.fwhm_x > 0 and self.fwhm_y > 0):
            raise ValueError(f"FWHM must be positive, got {self.fwhm_x} x {self.fwhm_y}")

    @property
    def sigma_x(self) -> float:
        return self.fwhm_x * _FWHM_TO_SIGMA

    @property
    def sigma_y(self) -> float:
        return self.fwhm_y * _FWHM_TO_SIGMA


@dataclass(frozen=True)
class NoiseModel:
    """Signal-to-dark-count ratio R and the spatial law of the dark counts.

    Of all detection events, a fraction R/(R+1) are signal photons and
    1/(R+1) are dark counts.  ``math.inf`` is accepted for a noiseless
    detector.  Dark counts are spread uniformly over the symbol alphabet
    (the only law currently implemented; the field is an extension point).
    """

    signal_to_dark_ratio: float = DEFAULT_SIGNAL_TO_DARK_RATIO
    dark_spatial_law: str = "uniform-over-symbols"

    def __post_init__(self) -> None:
        if not self.signal_to_dark_ratio > 0:
            raise ValueError(f"signal-to-dark ratio must be > 0, got {self.signal_to_dark_ratio}")
        if self.dark_spatial_law != "uniform-over-symbols":
            raise ValueError(f"unsupported dark spatial law {self.dark_spatial_law!r}")

    @property
    def signal_fraction(self) -> float:
        r = self.signal_to_dark_ratio
        return 1.0 if math.isinf(r) else r / (r + 1.0)

    @property
    def dark_fraction(self) -> float:
        return 1.0 - self.signal_fraction


def _axis_cell(delta: np.ndarray | int, bin_size: int, sigma: float, offset: float) -> np.ndarray | float:
    """Probability mass of a 1-D Gaussian inside the bin ``delta`` bins away.

    The Gaussian is centered at ``offset`` pixels from the center of bin 0 and
    the landing bin spans [(delta-1/2)*b, (delta+1/2)*b] around it.  Working in
    bin-index differences keeps values bit-identical under translation.
    """
    inv = 1.0 / (sigma * math.sqrt(2.0))
    center = (np.asarray(delta, dtype=np.float64) * bin_size - offset) * inv
    half = 0.5 * bin_size * inv
    return 0.5 * (erf(center + half) - erf(center - half))


def _axis_transitions(n_bins: int, bin_size: int, sigma: float, offset: float) -> np.ndarray:
    """(n_bins, n_bins) matrix of 1-D landing probabilities, aim bin -> landing bin."""
    delta = np.arange(-(n_bins - 1), n_bins)
    cell = _axis_cell(delta, bin_size, sigma, offset)
    idx = (n_bins - 1) + np.arange(n_bins)[None, :] - np.arange(n_bins)[:, None]
    return cell[idx]


def bin_hit_probability(psf: PointSpread, grid: GridSpec, target: int, landing: int) -> float:
    """Probability that a photon aimed at ``target`` lands inside bin ``landing``.

    Integral of the separable 2-D Gaussian over the landing rectangle,
    evaluated as a product of one-dimensional error-function differences.
    """
    tc, tr, _, _ = symbol_to_bin(target, grid)
    lc, lr, _, _ = symbol_to_bin(landing, grid)
    px = _axis_cell(lc - tc, grid.bin_size, psf.sigma_x, psf.pointing_offset_x)
    py = _axis_cell(lr - tr, grid.bin_size, psf.sigma_y, psf.pointing_offset_y)
    return float(px) * float(py)


@dataclass(frozen=True)
class ChannelMatrix:
    """Row-stochastic p(received | sent), conditioned on a detection event.

    The signal part is separable: ``col_given_col`` and ``row_given_row`` are
    the per-axis transition matrices renormalized over the grid (mass beyond
    the detector edges counts as no detection), so the full signal row for
    sent symbol x is their outer product.  A row of the matrix is

        p(y|x) = signal_fraction * col_given_col[cx, cy] * row_given_row[rx, ry]
                 + dark_fraction / n_symbols

    ``detect_prob[x]`` is the raw probability (before renormalization and
    dark-count mixing) that the signal photon lands inside any bin.  Rows can
    be materialized one at a time; ``dense()`` builds the full matrix and is
    meant for small grids.
    """

    grid: GridSpec
    col_given_col: np.ndarray
    row_given_row: np.ndarray
    signal_fraction: float
    dark_fraction: float
    detect_prob: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.col_given_col, self.row_given_row, self.detect_prob):
            arr.setflags(write=False)

    def row(self, sent: int) -> np.ndarray:
        """Dense probability row p(. | sent) of length n_symbols."""
        if not 0 <= sent < self.grid.n_symbols:
            raise IndexError(f"symbol {sent} out of range")
        rx, cx = divmod(sent, self.grid.n_cols)
        signal = np.multiply.outer(self.row_given_row[rx], self.col_given_col[cx]).ravel()
        return self.signal_fraction * signal + self.dark_fraction / self.grid.n_symbols

    def dense(self) -> np.ndarray:
        """Full (n_symbols, n_symbols) matrix; O(n_symbols^2) memory."""
        signal = np.kron(self.row_given_row, self.col_given_col)
        return self.signal_fraction * signal + self.dark_fraction / self.grid.n_symbols


def build_channel_matrix(grid: GridSpec, psf: PointSpread, noise: NoiseModel) -> ChannelMatrix:
    """Construct the detection-conditioned channel matrix for a grid/PSF/noise triple."""
    u_raw = _axis_transitions(grid.n_cols, grid.bin_size, psf.sigma_x, psf.pointing_offset_x)
    v_raw = _axis_transitions(grid.n_rows, grid.bin_size, psf.sigma_y, psf.pointing_offset_y)
    dx = u_raw.sum(axis=1)
    dy = v_raw.sum(axis=1)
    if np.any(dx <= 0.0) or np.any(dy <= 0.0):
        raise ValueError("pointing offset leaves no probability mass on the detector")
    return ChannelMatrix(
        grid=grid,
        col_given_col=u_raw / dx[:, None],
        row_given_row=v_raw / dy[:, None],
        signal_fraction=noise.signal_fraction,
        dark_fraction=noise.dark_fraction,
        detect_prob=np.multiply.outer(dy, dx).ravel(),
    )


def sample_detections(
    channel: ChannelMatrix,
    sent: int,
    n_events: int,
    seed: int | Sequence[int],
) -> np.ndarray:
    """Draw ``n_events`` detections for one sent symbol; returns counts per received symbol.

    Draws are inverse-CDF samples over the channel row.  Identical
    (seed, inputs) reproduce identical counts bit for bit; a sequence seed
    selects a derived stream (e.g. ``[root_seed, sent]`` for per-symbol
    streams that are independent of scheduling order).
    """
    if n_events < 0:
        raise ValueError(f"n_events must be >= 0, got {n_events}")
    n = channel.grid.n_symbols
    counts = np.zeros(n, dtype=np.int64)
    if n_events == 0:
        return counts
    rng = np.random.default_rng(seed)
    draws = rng.choice(n, size=n_events, p=channel.row(sent))
    return np.bincount(draws, minlength=n).astype(np.int64)


@dataclass(frozen=True)
class DetectionEvent:
    """A single replayable detection: trial number plus sent/received symbols."""

    sent_symbol: int
    received_symbol: int
    trial: int

    def check(self, grid: GridSpec) -> None:
        for label, idx in (("sent", self.sent_symbol), ("received", self.received_symbol)):
            if not 0 <= idx < grid.n_symbols:
                raise IndexError(f"{label} symbol {idx} outside {grid.n_symbols}-symbol grid")


# ---------------------------------------------------------------------------
# Detection-count table files: header "sent,received,count", one row per
# (sent, received) pair with a nonzero count, row-major symbol labeling.

def _iter_nonzero(counts) -> Iterator[tuple[int, int, int]]:
    try:
        from scipy.sparse import issparse
    except ImportError:  # pragma: no cover
        issparse = lambda _: False  # noqa: E731
    if issparse(counts):
        coo = counts.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for i in order:
            if coo.data[i]:
                yield int(coo.row[i]), int(coo.col[i]), int(coo.data[i])
    else:
        arr = np.asarray(counts)
        for x, y in zip(*np.nonzero(arr)):
            yield int(x), int(y), int(arr[x, y])


def write_counts_csv(path_or_file, counts) -> None:
    """Write a detection-count table (dense array or scipy sparse matrix)."""
    if hasattr(path_or_file, "write"):
        _write_counts(path_or_file, counts)
    else:
        with open(path_or_file, "w", newline="") as f:
            _write_counts(f, counts)


def _write_counts(f: TextIO, counts) -> None:
    f.write("sent,received,count\n")
    for x, y, c in _iter_nonzero(counts):
        f.write(f"{x},{y},{c}\n")


class CountsFormatError(ValueError):
    """Malformed detection-count file; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def read_counts_csv(path_or_file, n_symbols: int | None = None):
    """Read a detection-count table into a scipy COO matrix.

    The table is square over ``n_symbols`` when given, otherwise over the
    largest index seen (trailing all-zero symbols carry no information).
    """
    from scipy.sparse import coo_matrix

    if hasattr(path_or_file, "read"):
        lines = path_or_file.read().splitlines()
    else:
        with open(path_or_file) as f:
            lines = f.read().splitlines()
    if not lines or lines[0].strip() != "sent,received,count":
        raise CountsFormatError(1, "expected header 'sent,received,count'")
    xs: list[int] = []
    ys: list[int] = []
    cs: list[int] = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise CountsFormatError(line_no, f"expected 3 comma-separated fields, got {len(parts)}")
        try:
            x, y, c = (int(p) for p in parts)
        except ValueError:
            raise CountsFormatError(line_no, f"non-integer field in {line!r}") from None
        if x < 0 or y < 0:
            raise CountsFormatError(line_no, "negative symbol index")
        if c < 0:
            raise CountsFormatError(line_no, "negative count")
        if n_symbols is not None and (x >= n_symbols or y >= n_symbols):
            raise CountsFormatError(line_no, f"symbol index exceeds declared alphabet size {n_symbols}")
        xs.append(x)
        ys.append(y)
        cs.append(c)
    if not xs:
        raise CountsFormatError(len(lines), "no count rows")
    size = n_symbols if n_symbols is not None else max(max(xs), max(ys)) + 1
    return coo_matrix((cs, (xs, ys)), shape=(size, size))


def write_channel_matrix_csv(path_or_file, channel: ChannelMatrix, floor: float = 1e-12) -> None:
    """Export the channel matrix as sparse 'x,y,p' rows with probabilities >= floor.

    With dark counts every entry sits above the default floor; pass a higher
    floor to export only the crosstalk neighborhood.
    """
    if hasattr(path_or_file, "write"):
        _write_matrix(path_or_file, channel, floor)
    else:
        with open(path_or_file, "w", newline="") as f:
            _write_matrix(f, channel, floor)


def _write_matrix(f: TextIO, channel: ChannelMatrix, floor: float) -> None:
    f.write("x,y,p\n")
    for x in range(channel.grid.n_symbols):
        row = channel.row(x)
        for y in np.flatnonzero(row >= floor):
            f.write(f"{x},{y},{float(row[y])!r}\n")
