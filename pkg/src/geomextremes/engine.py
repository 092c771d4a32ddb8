"""Tuple scanning engine: enumerate k-subsets of a configuration, evaluate
the model functional, and extract the smallest order statistics, with grid
acceleration for the pair-distance case and a batched survey kernel for
large replication counts.

Evaluator conventions:
    float value  ->  accepted, contributes to the order statistics
    None         ->  rejected (for example a containment cut), contributes
                     nothing
    NaN          ->  degenerate geometry, excluded AND counted

Unordered-subset iteration carries the 1/k! normalization exactly: each
multiset of k distinct atoms is visited once.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from .rng import substream
from .sampling import PointConfiguration

GRID_CELL_FACTOR = 0.5
_MAX_RUN_FALLBACK = 64


@dataclass
class FunctionalSpec:
    """A symmetric functional of k atoms of a configuration.

    Attributes:
        arity: Tuple size k.
        evaluator: Callable on k atoms returning float, None (rejected) or
            NaN (degenerate). Must be symmetric in its arguments.
        model_tag: Short name for reports.
        prefilter: Optional cheap cut; False means rejected without calling
            the evaluator. Never changes accepted values.
        batch_evaluator: Optional fast path: config -> (values, n_degenerate)
            where values holds every accepted tuple's value (rejected tuples
            omitted, degenerate ones excluded and counted).
    """

    arity: int
    evaluator: object
    model_tag: str = ""
    prefilter: object = None
    batch_evaluator: object = None


@dataclass
class ScaledOrderStatistics:
    """The m_max smallest functional values of one replication.

    raw is padded with +inf when fewer tuples exist; scaled = raw * scale
    exactly, where scale is t^gamma (or n^gamma).
    """

    model_tag: str
    gamma: float
    scale: float
    raw: np.ndarray
    scaled: np.ndarray
    seed_info: str = ""
    degenerate_count: int = 0

    def __post_init__(self):
        if np.any(np.diff(self.raw[np.isfinite(self.raw)]) < 0):
            raise ValueError("order statistics must be sorted ascending")


def _config_atoms(config) -> list:
    """Atoms of a configuration: point rows or the listed geometric objects."""
    if isinstance(config, PointConfiguration):
        return list(config.points)
    return list(config)


def _finalize(values: np.ndarray, m_max: int) -> np.ndarray:
    """Smallest m_max entries, sorted, padded with +inf."""
    out = np.full(m_max, np.inf)
    if values.size:
        k = min(m_max, values.size)
        part = np.partition(values, k - 1)[:k]
        part.sort()
        out[:k] = part
    return out


def scan_tuples(
    config,
    fspec: FunctionalSpec,
    m_max: int,
    scale: float = 1.0,
    gamma: float = float("nan"),
    seed_info: str = "",
) -> ScaledOrderStatistics:
    """Order statistics of the functional over unordered k-subsets.

    Uses the batch path when the spec provides one; the generic path keeps a
    bounded max-heap of the m_max smallest accepted values.
    """
    if m_max < 1:
        raise ValueError("m_max must be at least 1")
    if fspec.batch_evaluator is not None:
        values, ndeg = fspec.batch_evaluator(config)
        raw = _finalize(np.asarray(values, dtype=float), m_max)
        return ScaledOrderStatistics(
            fspec.model_tag, gamma, scale, raw, raw * scale, seed_info, int(ndeg)
        )
    atoms = _config_atoms(config)
    k = fspec.arity
    heap: list[float] = []
    ndeg = 0
    for idx in itertools.combinations(range(len(atoms)), k):
        tup = tuple(atoms[i] for i in idx)
        if fspec.prefilter is not None and not fspec.prefilter(*tup):
            continue
        v = fspec.evaluator(*tup)
        if v is None:
            continue
        v = float(v)
        if np.isnan(v):
            ndeg += 1
            continue
        if len(heap) < m_max:
            heapq.heappush(heap, -v)
        elif v < -heap[0]:
            heapq.heapreplace(heap, -v)
    raw = _finalize(-np.asarray(heap, dtype=float), m_max)
    return ScaledOrderStatistics(
        fspec.model_tag, gamma, scale, raw, raw * scale, seed_info, ndeg
    )


def count_in_window(
    config, fspec: FunctionalSpec, y1: float, y2: float, scale: float = 1.0
) -> int:
    """Number of k-subsets whose scaled value falls in (y1, y2].

    The replication mean of this count is the Monte Carlo counterpart of the
    expected-count curve the limit intensity integrates to.
    """
    if not y1 < y2:
        if y1 == y2:
            return 0
        raise ValueError("window needs y1 < y2")
    if fspec.batch_evaluator is not None:
        values, _ = fspec.batch_evaluator(config)
        scaled = np.asarray(values, dtype=float) * scale
        return int(np.count_nonzero((scaled > y1) & (scaled <= y2)))
    atoms = _config_atoms(config)
    count = 0
    for idx in itertools.combinations(range(len(atoms)), fspec.arity):
        tup = tuple(atoms[i] for i in idx)
        if fspec.prefilter is not None and not fspec.prefilter(*tup):
            continue
        v = fspec.evaluator(*tup)
        if v is None:
            continue
        v = float(v)
        if np.isnan(v):
            continue
        sv = v * scale
        if y1 < sv <= y2:
            count += 1
    return count


# ---------------------------------------------------------------------------
# pair distances: grid acceleration
# ---------------------------------------------------------------------------


def _brute_pair_distances(points: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    i, j = np.triu_indices(n, k=1)
    diff = points[i] - points[j]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _expand_ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Concatenate arange(start, start+count) for every row, vectorized."""
    total = int(counts.sum())
    base = np.repeat(starts, counts)
    within = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return base + within


def _grid_candidate_pairs(points: np.ndarray, s: float) -> tuple:
    """Index pairs of all points within L2 distance s of each other, found by
    comparing only same-cell and neighboring-cell points on a grid of cell
    size s. Returns (i, j, ok) where ok signals the run-length fallback."""
    n, d = points.shape
    lo = points.min(axis=0)
    cells = np.floor((points - lo) / s).astype(np.int64)
    dims = cells.max(axis=0) + 1
    key = cells[:, 0].copy()
    for a in range(1, d):
        key = key * dims[a] + cells[:, a]
    order = np.argsort(key, kind="stable")
    sk = key[order]
    run_change = np.flatnonzero(np.diff(sk)) + 1
    starts = np.concatenate([[0], run_change])
    ends = np.concatenate([run_change, [n]])
    longest = int((ends - starts).max()) if n else 0
    if longest > _MAX_RUN_FALLBACK:
        return None, None, False
    pi: list[np.ndarray] = []
    pj: list[np.ndarray] = []
    for off in range(1, longest):
        same = sk[off:] == sk[:-off]
        if not same.any():
            break
        pi.append(order[:-off][same])
        pj.append(order[off:][same])
    strides = np.ones(d, dtype=np.int64)
    for a in range(d - 2, -1, -1):
        strides[a] = strides[a + 1] * dims[a + 1]
    for delta in itertools.product(*([(-1, 0, 1)] * d)):
        if delta <= (0,) * d:  # lexicographic forward half, skip zero
            continue
        dvec = np.asarray(delta, dtype=np.int64)
        shifted = cells + dvec
        valid = np.all((shifted >= 0) & (shifted < dims), axis=1)
        src = np.flatnonzero(valid)
        if src.size == 0:
            continue
        tkeys = key[src] + int(dvec @ strides)
        left = np.searchsorted(sk, tkeys, side="left")
        right = np.searchsorted(sk, tkeys, side="right")
        counts = right - left
        nz = counts > 0
        if not nz.any():
            continue
        pos = _expand_ranges(left[nz], counts[nz])
        pi.append(np.repeat(src[nz], counts[nz]))
        pj.append(order[pos])
    if pi:
        return np.concatenate(pi), np.concatenate(pj), True
    empty = np.empty(0, dtype=np.int64)
    return empty, empty, True


def min_pair_distance_grid(
    points,
    m_max: int,
    scale: float = 1.0,
    gamma: float = float("nan"),
    seed_info: str = "",
    cell_factor: float = GRID_CELL_FACTOR,
    model_tag: str = "pair-distance",
) -> ScaledOrderStatistics:
    """The m_max smallest pairwise distances of a point set.

    Identical output to scan_tuples with the pair-distance functional. The
    grid starts at cell size cell_factor * n^(-1/d) * diam and doubles until
    at least m_max pairs within one cell size are found (or the cells cover
    the whole extent, in which case remaining pairs come from a dense scan).
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raw = np.full(m_max, np.inf)
        return ScaledOrderStatistics(
            model_tag, gamma, scale, raw, raw * scale, seed_info, 0
        )
    n, d = pts.shape
    total_pairs = n * (n - 1) // 2
    extent = pts.max(axis=0) - pts.min(axis=0)
    diam_box = float(np.linalg.norm(extent))
    if diam_box == 0.0:
        raw = _finalize(np.zeros(min(m_max, total_pairs)), m_max)
        return ScaledOrderStatistics(
            model_tag, gamma, scale, raw, raw * scale, seed_info, 0
        )
    s = cell_factor * n ** (-1.0 / d) * diam_box
    while True:
        if s >= float(extent.max()):
            dist = _brute_pair_distances(pts)
            raw = _finalize(dist, m_max)
            break
        i, j, ok = _grid_candidate_pairs(pts, s)
        if not ok:
            dist = _brute_pair_distances(pts)
            raw = _finalize(dist, m_max)
            break
        if i.size:
            diff = pts[i] - pts[j]
            dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
            dist = dist[dist <= s]
        else:
            dist = np.empty(0)
        if dist.size >= min(m_max, total_pairs):
            raw = _finalize(dist, m_max)
            break
        s *= 2.0
    return ScaledOrderStatistics(
        model_tag, gamma, scale, raw, raw * scale, seed_info, 0
    )


# ---------------------------------------------------------------------------
# batched minimum-distance survey
# ---------------------------------------------------------------------------


def min_distance_survey(
    body,
    t: float,
    reps: int,
    delta_max: float,
    master_seed: int,
    stream_tag: int = 606,
    chunk_points: int = 1 << 22,
) -> np.ndarray:
    """Per-replication minimum pairwise distance, truncated at delta_max.

    Simulates ``reps`` independent Poisson(t * Lebesgue) point sets in the
    body and returns an array of length reps holding each set's minimum
    pairwise distance, or +inf when no pair comes within delta_max. Built for
    survival-curve surveys at replication counts where per-replication
    scanning would be too slow; processes many replications per numpy pass
    using 2^d half-cell-shifted grids of cell size 2 * delta_max (a pair
    within delta_max shares a cell in at least one shifted grid).

    Deterministic for fixed (master_seed, stream_tag) and parameters.
    """
    from .sampling import _uniform_in_body

    if delta_max <= 0 or t <= 0 or reps < 1:
        raise ValueError("need positive t, delta_max and reps >= 1")
    d = body.dimension
    mean_n = t * body.volume
    reps_per_chunk = max(1, min(reps, int(chunk_points / max(mean_n, 1.0))))
    cell = 2.0 * delta_max
    lo, hi = body.bounding_box()
    dims = np.floor((hi - lo) / cell).astype(np.int64) + 2
    out = np.full(reps, np.inf)
    delta2 = delta_max * delta_max
    shifts = list(itertools.product((0, 1), repeat=d))
    n_chunks = (reps + reps_per_chunk - 1) // reps_per_chunk
    for chunk_idx in range(n_chunks):
        rep0 = chunk_idx * reps_per_chunk
        m = min(reps_per_chunk, reps - rep0)
        rng = substream(master_seed, stream_tag, chunk_idx)
        counts = rng.poisson(mean_n, m)
        total = int(counts.sum())
        if total == 0:
            continue
        pts = _uniform_in_body(body, total, rng)
        rep_local = np.repeat(np.arange(m, dtype=np.int64), counts)
        q = (pts - lo) / cell
        c0 = np.floor(q).astype(np.int64)
        c1 = np.floor(q + 0.5).astype(np.int64)
        idx_bits = max(total.bit_length(), 1)
        idx_mask = (1 << idx_bits) - 1
        point_idx = np.arange(total, dtype=np.int64)
        dmin = np.full(m, np.inf)
        for mask in shifts:
            key = rep_local
            for a in range(d):
                cc = c1[:, a] if mask[a] else c0[:, a]
                key = key * dims[a] + cc
            comb = (key << idx_bits) | point_idx
            comb.sort()
            kk = comb >> idx_bits
            off = 1
            while off < total:
                same = kk[off:] == kk[:-off]
                if not same.any():
                    break
                ii = comb[:-off][same] & idx_mask
                jj = comb[off:][same] & idx_mask
                diff = pts[ii] - pts[jj]
                d2 = np.einsum("ij,ij->i", diff, diff)
                close = d2 <= delta2
                if close.any():
                    np.minimum.at(
                        dmin, rep_local[ii[close]], np.sqrt(d2[close])
                    )
                off += 1
        out[rep0 : rep0 + m] = dmin
    return out
