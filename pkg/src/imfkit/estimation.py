"""Intensity mapping estimators: weighted histogram averaging plus two baselines.

All estimators process one channel at a time and return a lookup table per
channel.  The weighted-histogram and geometric estimators leave table
entries absent wherever the source histogram bin is empty; the
cumulative-matching baseline is total by construction.  Filling the gaps
lives in :mod:`imfkit.completion`.

How the weighted estimator works, in one paragraph: because an exposure
change maps intensities monotonically, sorting pixels of both overlap
crops by intensity lines the two histograms up against each other.  Each
source bin therefore corresponds to a contiguous run of target bins, where
the first and last bin of the run may be shared with the neighboring
source bins (a "sub-bin").  The mapped value of a source level is the mean
target level over that run, weighted by how much of each target bin's
count falls inside it.
"""

from __future__ import annotations

import numpy as np

from .errors import GeometryError, TableError
from .image import LEVELS, Image, cumulate, histogram
from .table import ImfTable


def _check_same_shape(a: Image, b: Image) -> None:
    if (a.width, a.height, a.n_channels) != (b.width, b.height, b.n_channels):
        raise GeometryError(
            f"overlap crops differ: {a.width}x{a.height}x{a.n_channels} vs "
            f"{b.width}x{b.height}x{b.n_channels}"
        )


def segment_map(cum_src: np.ndarray, cum_ref: np.ndarray) -> np.ndarray:
    """For each source level, find the last target bin of its matched run.

    Entry z is the smallest level whose target cumulative count reaches the
    source cumulative count at z.  Levels with an all-empty prefix
    (cumulative count 0) map to 0.  Requires equal pixel totals so a
    matching level always exists.
    """
    cum_src = np.asarray(cum_src, dtype=np.int64)
    cum_ref = np.asarray(cum_ref, dtype=np.int64)
    if cum_src[-1] != cum_ref[-1]:
        raise GeometryError(
            f"cumulative totals differ ({int(cum_src[-1])} vs {int(cum_ref[-1])}); "
            "both overlap crops must have the same pixel count"
        )
    return np.searchsorted(cum_ref, cum_src, side="left").astype(np.int64)


def sub_bin_masses(
    cum_src: np.ndarray,
    cum_ref: np.ndarray,
    hist_src: np.ndarray,
    hist_ref: np.ndarray,
    seg_end: np.ndarray,
    z: int,
) -> list[tuple[int, int]]:
    """Split the count of source bin z over its matched run of target bins.

    Returns (target level, mass) pairs covering the run from the end of
    the previous bin's run through ``seg_end[z]``.  Masses are exact
    integers, non-negative, and sum to the source bin count.
    """
    if hist_src[z] == 0:
        raise ValueError(f"source bin {z} is empty; masses are undefined")
    lo = int(seg_end[z - 1]) if z > 0 else 0
    hi = int(seg_end[z])
    if lo == hi:
        return [(hi, int(hist_src[z]))]
    cum_src_prev = int(cum_src[z - 1]) if z > 0 else 0
    out: list[tuple[int, int]] = []
    for k in range(lo, hi + 1):
        if k == lo:
            mass = int(cum_ref[k]) - cum_src_prev
        elif k == hi:
            mass = int(cum_src[z]) - int(cum_ref[k - 1])
        else:
            mass = int(hist_ref[k])
        out.append((k, mass))
    return out


def wha_table(hist_src: np.ndarray, hist_ref: np.ndarray) -> ImfTable:
    """Weighted-histogram-averaging table for one channel's histogram pair."""
    cum_src = cumulate(hist_src)
    cum_ref = cumulate(hist_ref)
    seg_end = segment_map(cum_src, cum_ref)
    values = np.full(LEVELS, np.nan)
    present = np.asarray(hist_src) > 0
    for z in np.flatnonzero(present):
        acc = 0
        for k, mass in sub_bin_masses(cum_src, cum_ref, hist_src, hist_ref, seg_end, z):
            acc += k * mass
        values[z] = acc / int(hist_src[z])
    return ImfTable(values, present)


def estimate_wha(overlap_src: Image, overlap_ref: Image) -> list[ImfTable]:
    """Estimate per-channel mapping tables by weighted histogram averaging.

    Only the intensity histograms of the two crops matter, which makes the
    estimate invariant to pixel rearrangement and hence robust to camera
    or object motion inside the overlap.
    """
    _check_same_shape(overlap_src, overlap_ref)
    return [
        wha_table(histogram(ps), histogram(pr))
        for ps, pr in zip(overlap_src.planes, overlap_ref.planes)
    ]


def chm_table(hist_src: np.ndarray, hist_ref: np.ndarray) -> ImfTable:
    """Cumulative-histogram-matching table (total; ties go to the smallest level)."""
    cum_src = cumulate(hist_src)
    cum_ref = cumulate(hist_ref)
    diff = np.abs(cum_src[:, None] - cum_ref[None, :])
    values = diff.argmin(axis=1).astype(np.float64)  # argmin takes the first, i.e. smallest
    return ImfTable(values, np.ones(LEVELS, dtype=bool))


def estimate_chm(overlap_src: Image, overlap_ref: Image) -> list[ImfTable]:
    """Baseline: map each level to the target level of nearest cumulative count."""
    _check_same_shape(overlap_src, overlap_ref)
    return [
        chm_table(histogram(ps), histogram(pr))
        for ps, pr in zip(overlap_src.planes, overlap_ref.planes)
    ]


def chm_via_segments(hist_src: np.ndarray, hist_ref: np.ndarray) -> ImfTable:
    """Recompute the cumulative-matching table through the matched-run route.

    For each non-empty source bin the candidate target levels are the last
    bin of its matched run and the one just below it (clipped to level 0);
    the winner is the candidate with the nearest cumulative count, smallest
    level on ties.  Used as a cross-check against :func:`chm_table`: the two
    agree whenever the target cumulative curve is strictly increasing below
    the run boundary, and can differ on flat runs (documented in tests).
    """
    hist_src = np.asarray(hist_src, dtype=np.int64)
    cum_src = cumulate(hist_src)
    cum_ref = cumulate(hist_ref)
    seg_end = segment_map(cum_src, cum_ref)
    values = np.full(LEVELS, np.nan)
    present = hist_src > 0
    for z in np.flatnonzero(present):
        hi = int(seg_end[z])
        candidates = [hi - 1, hi] if hi > 0 else [hi]
        best = min(candidates, key=lambda c: (abs(int(cum_src[z]) - int(cum_ref[c])), c))
        values[z] = best
    return ImfTable(values, present)


def estimate_gc(overlap_src: Image, overlap_ref: Image) -> list[ImfTable]:
    """Baseline: average co-located target pixels over each source-intensity class.

    Exact for perfectly aligned crops (it is the least-squares optimum per
    bin) but fragile under motion since it relies on positional pairing.
    """
    _check_same_shape(overlap_src, overlap_ref)
    tables = []
    for ps, pr in zip(overlap_src.planes, overlap_ref.planes):
        hist_src = histogram(ps)
        sums = np.bincount(
            ps.ravel(), weights=pr.ravel().astype(np.float64), minlength=LEVELS
        )
        values = np.full(LEVELS, np.nan)
        present = hist_src > 0
        values[present] = sums[present] / hist_src[present]
        tables.append(ImfTable(values, present))
    return tables


def gc_correct(raw: ImfTable, *, window: int = 5, enforce_monotone: bool = True) -> ImfTable:
    """Clean up a raw geometric-correspondence table and make it total.

    Step 1 runs a shrinking odd-width median over the estimated entries,
    working outward from the middle entry in both directions; with
    ``enforce_monotone`` each smoothed value is additionally clamped
    against its already-processed neighbor so the pass cannot introduce
    decreases (our addition; disable to get the plain directional median).
    Step 2 fills interior gaps by linear interpolation and extends both
    ends with the slope of the nearest two entries, clamped to 0..255.
    """
    idx = raw.present_indices()
    if idx.size < 2:
        raise TableError(f"need at least 2 estimated entries to correct, have {idx.size}")
    vals = raw.values[idx].copy()
    n = idx.size
    half = window // 2
    mid = n // 2
    smoothed = np.empty(n)

    def window_median(p: int) -> float:
        r = min(half, p, n - 1 - p)
        return float(np.median(vals[p - r : p + r + 1]))

    smoothed[mid] = window_median(mid)
    for p in range(mid + 1, n):
        med = window_median(p)
        if enforce_monotone:
            med = max(med, smoothed[p - 1])
        smoothed[p] = med
    for p in range(mid - 1, -1, -1):
        med = window_median(p)
        if enforce_monotone:
            med = min(med, smoothed[p + 1])
        smoothed[p] = med

    full = np.full(LEVELS, np.nan)
    full[idx] = smoothed
    z_all = np.arange(LEVELS)
    interior = np.isnan(full) & (z_all > idx[0]) & (z_all < idx[-1])
    full[interior] = np.interp(z_all[interior], idx, smoothed)
    left = z_all < idx[0]
    if left.any():
        slope = (smoothed[1] - smoothed[0]) / (idx[1] - idx[0])
        full[left] = smoothed[0] + slope * (z_all[left] - idx[0])
    right = z_all > idx[-1]
    if right.any():
        slope = (smoothed[-1] - smoothed[-2]) / (idx[-1] - idx[-2])
        full[right] = smoothed[-1] + slope * (z_all[right] - idx[-1])
    return ImfTable(np.clip(full, 0.0, 255.0), np.ones(LEVELS, dtype=bool))
