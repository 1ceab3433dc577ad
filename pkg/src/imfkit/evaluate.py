"""Batch evaluation protocol: misalignment sweeps over image-pair directories.

For every (pair, direction, estimator, n_c) combination the mapping is
estimated from simulated-overlap crops, completed, applied to the full
source image and scored against the full reference.  Timing covers
estimate + complete + apply only; decoding and scoring stay outside.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .application import apply_imf
from .completion import complete_table
from .errors import ImfkitError
from .estimation import estimate_chm, estimate_gc, estimate_wha, gc_correct
from .image import Image, decode_image, simulate_overlap
from .metrics import psnr, ssim, time_op
from .table import ImfTable

METHODS = ("wha", "chm", "gc")
DEFAULT_NC_LIST = (0, 2, 4, 6, 8, 10, 12, 14, 16)
SWEEP_CSV_HEADER = ["pair", "direction", "estimator", "n_c", "psnr", "ssim", "seconds"]


@dataclass
class SweepRecord:
    pair: str
    direction: str
    estimator: str
    n_c: int
    psnr: float
    ssim: float
    seconds: float


def completed_tables(
    overlap_src: Image,
    overlap_ref: Image,
    method: str,
    n_c: int = 0,
    *,
    force_gc_correct: bool = False,
) -> list[ImfTable]:
    """Estimate and totalize tables with the completion route each method uses.

    The geometric estimator gets its median/slope correction only under
    misalignment (or when forced); with aligned overlaps its gaps are
    filled by plain interpolation since they are never read back.
    """
    if method == "wha":
        return [complete_table(t) for t in estimate_wha(overlap_src, overlap_ref)]
    if method == "chm":
        return [complete_table(t) for t in estimate_chm(overlap_src, overlap_ref)]
    if method == "gc":
        raw = estimate_gc(overlap_src, overlap_ref)
        if n_c > 0 or force_gc_correct:
            return [gc_correct(t) for t in raw]
        return [complete_table(t) for t in raw]
    raise ImfkitError(f"unknown method {method!r}; expected one of {METHODS}")


def correct_image(src: Image, ref: Image, method: str, n_c: int) -> tuple[Image, float]:
    """Correct ``src`` toward ``ref`` using crops misaligned by ``n_c``; timed."""
    overlap_src, overlap_ref = simulate_overlap(src, ref, n_c)

    def run() -> Image:
        tables = completed_tables(overlap_src, overlap_ref, method, n_c)
        return apply_imf(src, tables)

    return time_op(run)


def discover_pairs(directory: str | Path) -> list[tuple[str, Path, Path]]:
    """Find ``<stem>_a.<ext>`` / ``<stem>_b.<ext>`` image pairs, sorted by stem."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ImfkitError(f"{directory}: not a directory")
    exts = (".png", ".jpg", ".jpeg")
    a_files = {}
    b_files = {}
    for p in sorted(directory.iterdir()):
        if p.suffix.lower() not in exts:
            continue
        if p.stem.endswith("_a"):
            a_files[p.stem[:-2]] = p
        elif p.stem.endswith("_b"):
            b_files[p.stem[:-2]] = p
    names = sorted(set(a_files) & set(b_files))
    if not names:
        raise ImfkitError(
            f"{directory}: no image pairs found (expected <name>_a.png / <name>_b.png)"
        )
    return [(n, a_files[n], b_files[n]) for n in names]


def _eval_one_pair(
    name: str, img_a: Image, img_b: Image, methods: list[str], nc_list: list[int]
) -> list[SweepRecord]:
    records = []
    for n_c in nc_list:
        # The crop geometry is fixed by the pair; directions swap the roles.
        crop_a, crop_b = simulate_overlap(img_a, img_b, n_c)
        for method in methods:
            for direction, src, ref, ov_src, ov_ref in (
                ("a_to_b", img_a, img_b, crop_a, crop_b),
                ("b_to_a", img_b, img_a, crop_b, crop_a),
            ):

                def run(ov_src=ov_src, ov_ref=ov_ref, src=src, method=method, n_c=n_c):
                    tables = completed_tables(ov_src, ov_ref, method, n_c)
                    return apply_imf(src, tables)

                corrected, seconds = time_op(run)
                records.append(
                    SweepRecord(
                        pair=name,
                        direction=direction,
                        estimator=method,
                        n_c=n_c,
                        psnr=psnr(corrected, ref),
                        ssim=ssim(corrected, ref),
                        seconds=seconds,
                    )
                )
    return records


def max_workers() -> int:
    raw = os.environ.get("IMFKIT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def run_sweep(
    pairs_dir: str | Path,
    methods: list[str] | None = None,
    nc_list: list[int] | None = None,
) -> tuple[list[SweepRecord], list[SweepRecord]]:
    """Evaluate every pair in both directions; returns (records, aggregates).

    Records come back sorted by (pair, direction, estimator, n_c) no matter
    how many worker threads ran, so output order is deterministic.
    """
    methods = list(methods or METHODS)
    nc_list = list(nc_list if nc_list is not None else DEFAULT_NC_LIST)
    for m in methods:
        if m not in METHODS:
            raise ImfkitError(f"unknown method {m!r}; expected one of {METHODS}")
    pairs = discover_pairs(pairs_dir)
    loaded = [(name, decode_image(pa), decode_image(pb)) for name, pa, pb in pairs]

    workers = max_workers()
    if workers == 1:
        nested = [_eval_one_pair(n, a, b, methods, nc_list) for n, a, b in loaded]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            nested = list(
                pool.map(lambda t: _eval_one_pair(t[0], t[1], t[2], methods, nc_list), loaded)
            )
    records = [r for group in nested for r in group]
    records.sort(key=lambda r: (r.pair, r.direction, r.estimator, r.n_c))

    aggregates = []
    for method in sorted(methods):
        for n_c in nc_list:
            sub = [r for r in records if r.estimator == method and r.n_c == n_c]
            aggregates.append(
                SweepRecord(
                    pair="aggregate",
                    direction="mean",
                    estimator=method,
                    n_c=n_c,
                    psnr=float(np.mean([r.psnr for r in sub])),
                    ssim=float(np.mean([r.ssim for r in sub])),
                    seconds=float(np.mean([r.seconds for r in sub])),
                )
            )
    return records, aggregates


def write_sweep_csv(
    path: str | Path, records: list[SweepRecord], aggregates: list[SweepRecord]
) -> None:
    """Per-record rows followed by the per-(estimator, n_c) mean rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_HEADER)
        for r in list(records) + list(aggregates):
            writer.writerow(
                [
                    r.pair,
                    r.direction,
                    r.estimator,
                    r.n_c,
                    format(r.psnr, ".12g"),
                    format(r.ssim, ".12g"),
                    format(r.seconds, ".12g"),
                ]
            )
