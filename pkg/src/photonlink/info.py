"""Joint distributions, mutual information and loss-adjusted photon capacity.

Mutual information here is always *per detection event*:

    I(X:Y) = sum_{x,y} p(x,y) * log2( p(x,y) / (p(x) p(y)) )

with 0*log(0) terms contributing 0.  The per-*sent*-photon figure is a
separate operation that multiplies by the optical throughput of a loss
chain, so the two never get silently mixed.  All entropy sums run in
natural log and convert to bits once at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .channel import ChannelMatrix

__all__ = [
    "JointDistribution",
    "LossChain",
    "DEFAULT_LOSS_CHAIN",
    "joint_from_counts",
    "mutual_information",
    "max_mutual_information",
    "expected_mutual_information",
    "sent_photon_capacity",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class JointDistribution:
    """Normalized joint probabilities p(x, y) held as nonzero triplets.

    ``xs, ys, ps`` list the nonzero cells (sorted by (x, y)); ``p_x`` and
    ``p_y`` are the marginals over the full alphabets.  The triplet storage
    keeps sparsely sampled joints over ~10^4 x 10^4 alphabets cheap; use
    ``dense()`` for small tables.
    """

    n_sent: int
    n_received: int
    xs: np.ndarray
    ys: np.ndarray
    ps: np.ndarray
    p_x: np.ndarray
    p_y: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.xs, self.ys, self.ps, self.p_x, self.p_y):
            arr.setflags(write=False)

    def dense(self) -> np.ndarray:
        table = np.zeros((self.n_sent, self.n_received))
        table[self.xs, self.ys] = self.ps
        return table

    def transpose(self) -> "JointDistribution":
        order = np.lexsort((self.xs, self.ys))
        return JointDistribution(
            n_sent=self.n_received,
            n_received=self.n_sent,
            xs=self.ys[order].copy(),
            ys=self.xs[order].copy(),
            ps=self.ps[order].copy(),
            p_x=self.p_y.copy(),
            p_y=self.p_x.copy(),
        )


def joint_from_counts(counts) -> JointDistribution:
    """Normalize a table of detection counts into a JointDistribution.

    Accepts a dense 2-D array or a scipy sparse matrix.  Zero rows are
    permitted; an all-zero table is an error.
    """
    from scipy.sparse import issparse

    if issparse(counts):
        coo = counts.tocsr().tocoo()  # CSR round-trip merges duplicate cells
        n_sent, n_received = coo.shape
        xs, ys, data = coo.row, coo.col, coo.data
    else:
        arr = np.asarray(counts)
        if arr.ndim != 2:
            raise ValueError(f"count table must be 2-D, got shape {arr.shape}")
        n_sent, n_received = arr.shape
        xs, ys = np.nonzero(arr)
        data = arr[xs, ys]
    if np.any(data < 0):
        raise ValueError("negative counts in table")
    keep = data > 0
    xs, ys, data = xs[keep], ys[keep], data[keep]
    total = float(np.sum(data))
    if total == 0.0:
        raise ValueError("all-zero count table")
    order = np.lexsort((ys, xs))
    xs = np.ascontiguousarray(xs[order], dtype=np.int64)
    ys = np.ascontiguousarray(ys[order], dtype=np.int64)
    ps = np.asarray(data[order], dtype=np.float64) / total
    p_x = np.zeros(n_sent)
    p_y = np.zeros(n_received)
    np.add.at(p_x, xs, ps)
    np.add.at(p_y, ys, ps)
    return JointDistribution(n_sent, n_received, xs, ys, ps, p_x, p_y)


def mutual_information(joint: JointDistribution) -> float:
    """Plug-in mutual information of a joint distribution, in bits."""
    px = joint.p_x[joint.xs]
    py = joint.p_y[joint.ys]
    # nonzero p(x,y) forces nonzero marginals; anything else is a bug upstream
    assert np.all(px > 0) and np.all(py > 0)
    p = joint.ps
    return float(np.sum(p * np.log(p / (px * py)))) / _LN2


def max_mutual_information(n_symbols: int) -> float:
    """log2(N), the noiseless information content of an N-symbol alphabet."""
    if n_symbols < 1:
        raise ValueError(f"n_symbols must be >= 1, got {n_symbols}")
    return math.log2(n_symbols)


def _window_entropy_nats(sig: np.ndarray, dark_cell: float, n_total: int) -> float:
    """Entropy of one channel row: signal window values plus a flat dark floor."""
    w = sig + dark_cell
    h = -float(np.sum(w[w > 0] * np.log(w[w > 0])))
    n_rest = n_total - sig.size
    if dark_cell > 0.0 and n_rest:
        h -= n_rest * dark_cell * math.log(dark_cell)
    return h


def expected_mutual_information(channel: ChannelMatrix, input_law: np.ndarray | None = None) -> float:
    """Exact mutual information of the channel under a known input law (no sampling).

    Defaults to the uniform law, matching a scan protocol that dwells equally
    on every symbol.  Evaluated as H(Y) - H(Y|X) on the separable structure
    of the matrix: the output law has the closed form

        p(y) = a * (V^T L U)[ry, cy] + b / N

    and row entropies depend only on the (clipped) per-axis transition
    slices, so they are computed once per distinct slice pair and reused
    across translated symbols.
    """
    grid = channel.grid
    n = grid.n_symbols
    if input_law is None:
        law_grid = np.full((grid.n_rows, grid.n_cols), 1.0 / n)
    else:
        law = np.asarray(input_law, dtype=np.float64)
        if law.shape != (n,):
            raise ValueError(f"input law must have shape ({n},), got {law.shape}")
        if np.any(law < 0) or abs(law.sum() - 1.0) > 1e-9:
            raise ValueError("input law must be nonnegative and sum to 1")
        law_grid = law.reshape(grid.n_rows, grid.n_cols)

    a = channel.signal_fraction
    u = channel.col_given_col
    v = channel.row_given_row
    dark_cell = channel.dark_fraction / n

    p_y = a * (v.T @ law_grid @ u) + channel.dark_fraction * law_grid.sum() / n
    h_y = -float(np.sum(np.where(p_y > 0, p_y * np.log(np.maximum(p_y, 1e-300)), 0.0)))

    # nonzero support per axis; erf saturation makes far cells exactly 0.0
    def supports(mat: np.ndarray) -> list[tuple[int, int]]:
        spans = []
        for r in mat:
            nz = np.flatnonzero(r)
            spans.append((int(nz[0]), int(nz[-1]) + 1))
        return spans

    u_span = supports(u)
    v_span = supports(v)
    cache: dict[tuple[bytes, bytes], float] = {}
    h_y_given_x = 0.0
    for rx in range(grid.n_rows):
        v_lo, v_hi = v_span[rx]
        sv = v[rx, v_lo:v_hi]
        sv_key = sv.tobytes()
        weights = law_grid[rx]
        for cx in range(grid.n_cols):
            w = weights[cx]
            if w == 0.0:
                continue
            u_lo, u_hi = u_span[cx]
            su = u[cx, u_lo:u_hi]
            key = (su.tobytes(), sv_key)
            h = cache.get(key)
            if h is None:
                h = _window_entropy_nats(a * np.multiply.outer(sv, su).ravel(), dark_cell, n)
                cache[key] = h
            h_y_given_x += w * h
    return float((h_y - h_y_given_x) / _LN2) + 0.0  # +0.0 normalizes -0.0


@dataclass(frozen=True)
class LossChain:
    """Ordered sequence of named loss fractions between source and detector.

    Fractions are losses (not transmissions) in [0, 1); the chain throughput
    is the product of the complements.
    """

    losses: tuple[tuple[str, float], ...]

    def __post_init__(self) -> None:
        for name, frac in self.losses:
            if not 0.0 <= frac < 1.0:
                raise ValueError(f"loss {name!r} must be in [0, 1), got {frac}")

    @classmethod
    def from_mapping(cls, losses: Mapping[str, float] | Iterable[tuple[str, float]]) -> "LossChain":
        items = losses.items() if isinstance(losses, Mapping) else losses
        return cls(tuple((str(k), float(v)) for k, v in items))

    @property
    def throughput(self) -> float:
        out = 1.0
        for _, frac in self.losses:
            out *= 1.0 - frac
        return out


# Measured loss budget of the reference setup: fiber coupling, SLM diffraction,
# spectral filter, and the complement of the detector quantum efficiency.
DEFAULT_LOSS_CHAIN = LossChain(
    (
        ("fiber_coupling", 0.551),
        ("slm_diffraction", 0.24),
        ("spectral_filter", 0.30),
        ("detector_qe", 0.95),
    )
)


def sent_photon_capacity(mi_per_detection: float, chain: LossChain) -> float:
    """Bits per *sent* photon: MI per detection scaled by the chain throughput."""
    if mi_per_detection < 0:
        raise ValueError(f"mutual information must be >= 0, got {mi_per_detection}")
    return mi_per_detection * chain.throughput
