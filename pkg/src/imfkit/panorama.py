"""Synthesize differently exposed panoramas from overlapping sub-images.

The inputs are exposure-ordered, geometrically aligned sub-images where
each adjacent pair shares a rectangular overlap (registration is out of
scope; the geometry arrives via a stitch spec).  Mapping tables are
estimated per adjacent pair in both directions; for each benchmark index
the other inputs are corrected through composed adjacent-hop tables and
mosaicked with linear feathering, which yields one panorama per exposure.
Fusing those gives the final detail-preserving result.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .application import apply_imf, compose_imf
from .completion import complete_table
from .errors import StitchSpecError
from .estimation import estimate_wha
from .fusion import fuse_exposures
from .image import Image, RegionRect, crop
from .table import ImfTable

MIN_OVERLAP_AREA = 256  # below this the 256-bin histograms are mostly empty


@dataclass(frozen=True)
class PairOverlap:
    """Matching rectangles delimiting the shared area of adjacent inputs."""

    a_rect: RegionRect  # in the earlier image
    b_rect: RegionRect  # in the later image


@dataclass
class StitchSpec:
    """Inputs plus overlap geometry for one stitching run."""

    inputs: list[Path]
    overlaps: list[PairOverlap]
    feather: int = 16


@dataclass
class HopTables:
    """Per-channel tables for one adjacent pair, in both directions."""

    forward: list[ImfTable]  # maps image l intensities onto image l+1
    backward: list[ImfTable]  # maps image l+1 intensities onto image l


@dataclass
class StitchResult:
    fused: Image
    panoramas: list[Image]
    chain: list[HopTables]
    timings: dict = field(default_factory=dict)


def _parse_rect(raw, where: str) -> RegionRect:
    if (
        not isinstance(raw, list)
        or len(raw) != 4
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw)
    ):
        raise StitchSpecError(f"{where}: expected [x0, y0, width, height] integers, got {raw!r}")
    return RegionRect(*raw)


def load_stitch_spec(path: str | Path) -> StitchSpec:
    """Load and validate a stitch spec JSON file."""
    path = Path(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise StitchSpecError(f"{path}: cannot read spec ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise StitchSpecError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise StitchSpecError(f"{path}: top level must be a JSON object")
    inputs = doc.get("inputs")
    if not isinstance(inputs, list) or len(inputs) < 2:
        raise StitchSpecError(f"{path}: 'inputs' must list at least 2 image paths")
    overlaps_raw = doc.get("overlaps")
    if not isinstance(overlaps_raw, list) or len(overlaps_raw) != len(inputs) - 1:
        raise StitchSpecError(
            f"{path}: 'overlaps' must list exactly {len(inputs) - 1} entries "
            f"(one per adjacent pair), got {None if overlaps_raw is None else len(overlaps_raw)}"
        )
    overlaps = []
    for i, ov in enumerate(overlaps_raw):
        if not isinstance(ov, dict) or "a_rect" not in ov or "b_rect" not in ov:
            raise StitchSpecError(f"{path}: overlaps[{i}] needs 'a_rect' and 'b_rect'")
        a_rect = _parse_rect(ov["a_rect"], f"{path}: overlaps[{i}].a_rect")
        b_rect = _parse_rect(ov["b_rect"], f"{path}: overlaps[{i}].b_rect")
        if (a_rect.width, a_rect.height) != (b_rect.width, b_rect.height):
            raise StitchSpecError(
                f"{path}: overlaps[{i}]: a_rect {a_rect.width}x{a_rect.height} and "
                f"b_rect {b_rect.width}x{b_rect.height} must have equal dimensions"
            )
        overlaps.append(PairOverlap(a_rect, b_rect))
    feather = doc.get("feather", 16)
    if not isinstance(feather, int) or isinstance(feather, bool) or feather < 0:
        raise StitchSpecError(f"{path}: 'feather' must be a non-negative integer")
    base = path.parent
    return StitchSpec([base / p for p in inputs], overlaps, feather)


def _check_overlap_geometry(images: list[Image], spec: StitchSpec) -> None:
    for i, ov in enumerate(spec.overlaps):
        for rect, img, name in ((ov.a_rect, images[i], "a_rect"), (ov.b_rect, images[i + 1], "b_rect")):
            if (
                rect.x0 < 0
                or rect.y0 < 0
                or rect.x0 + rect.width > img.width
                or rect.y0 + rect.height > img.height
            ):
                raise StitchSpecError(
                    f"overlaps[{i}].{name} {rect} exceeds its {img.width}x{img.height} image"
                )
        area = ov.a_rect.width * ov.a_rect.height
        if area < MIN_OVERLAP_AREA:
            message = (
                f"overlaps[{i}]: area {area} px is below the {MIN_OVERLAP_AREA} px minimum; "
                "histograms would be too sparse to estimate a mapping"
            )
            warnings.warn(message)
            raise StitchSpecError(message)


def estimate_pairwise(images: list[Image], spec: StitchSpec) -> list[HopTables]:
    """Estimate completed per-channel tables for every adjacent pair, both ways."""
    _check_overlap_geometry(images, spec)
    chain = []
    for i, ov in enumerate(spec.overlaps):
        crop_a = crop(images[i], ov.a_rect)
        crop_b = crop(images[i + 1], ov.b_rect)
        forward = [complete_table(t) for t in estimate_wha(crop_a, crop_b)]
        backward = [complete_table(t) for t in estimate_wha(crop_b, crop_a)]
        chain.append(HopTables(forward, backward))
    return chain


def tables_to_benchmark(chain: list[HopTables], source: int, benchmark: int) -> list[ImfTable]:
    """Compose adjacent-hop tables into the mapping from one input onto another.

    Routing always walks hop by hop through the chain; non-adjacent pairs
    never get a direct estimate.
    """
    if max(source, benchmark) > len(chain):
        raise StitchSpecError(
            f"missing chain entries: routing {source} -> {benchmark} needs "
            f"{max(source, benchmark)} hops, chain has {len(chain)}"
        )
    n_channels = len(chain[0].forward) if chain else 1
    if source == benchmark:
        return [ImfTable.identity() for _ in range(n_channels)]
    tables = []
    for c in range(n_channels):
        if source > benchmark:
            t = chain[source - 1].backward[c]  # source -> source-1
            for k in range(source - 1, benchmark, -1):
                t = compose_imf(chain[k - 1].backward[c], t)
        else:
            t = chain[source].forward[c]  # source -> source+1
            for k in range(source + 1, benchmark):
                t = compose_imf(chain[k].forward[c], t)
        tables.append(t)
    return tables


def _layout_offsets(images: list[Image], spec: StitchSpec) -> list[tuple[int, int]]:
    offsets = [(0, 0)]
    for i, ov in enumerate(spec.overlaps):
        ox, oy = offsets[i]
        offsets.append((ox + ov.a_rect.x0 - ov.b_rect.x0, oy + ov.a_rect.y0 - ov.b_rect.y0))
    min_x = min(o[0] for o in offsets)
    min_y = min(o[1] for o in offsets)
    return [(ox - min_x, oy - min_y) for ox, oy in offsets]


def _feather_weights(
    images: list[Image], offsets: list[tuple[int, int]], feather: int
) -> list[np.ndarray]:
    """Per-image weight maps implementing the left-to-right feather ramps.

    Inside each adjacent pair's intersection a linear ramp of at most
    ``feather`` columns, centered horizontally, hands ownership from the
    earlier image to the later one; pixels outside any intersection keep
    full weight, so exclusive areas always show their own image.
    """
    weights = [np.ones((im.height, im.width), dtype=np.float64) for im in images]
    for i in range(len(images) - 1):
        (lx, ly), (rx, ry) = offsets[i], offsets[i + 1]
        xs = max(lx, rx)
        xe = min(lx + images[i].width, rx + images[i + 1].width)
        ys = max(ly, ry)
        ye = min(ly + images[i].height, ry + images[i + 1].height)
        if xe <= xs or ye <= ys:
            continue
        width = xe - xs
        blend = min(feather, width)
        ramp0 = xs + (width - blend) // 2
        canvas_x = np.arange(xs, xe)
        if blend == 0:
            w_left = (canvas_x < xs + width // 2).astype(np.float64)
        else:
            w_left = np.clip(1.0 - (canvas_x - ramp0 + 0.5) / blend, 0.0, 1.0)
            w_left[canvas_x < ramp0] = 1.0
            w_left[canvas_x >= ramp0 + blend] = 0.0
        left_view = weights[i][ys - ly : ye - ly, xs - lx : xe - lx]
        np.minimum(left_view, w_left[None, :], out=left_view)
        right_view = weights[i + 1][ys - ry : ye - ry, xs - rx : xe - rx]
        np.minimum(right_view, 1.0 - w_left[None, :], out=right_view)
    return weights


def mosaic(images: list[Image], spec: StitchSpec) -> Image:
    """Blend aligned, already-corrected images onto one canvas."""
    offsets = _layout_offsets(images, spec)
    weights = _feather_weights(images, offsets, spec.feather)
    height = max(oy + im.height for (ox, oy), im in zip(offsets, images))
    width = max(ox + im.width for (ox, oy), im in zip(offsets, images))
    n_channels = images[0].n_channels
    acc = np.zeros((height, width, n_channels), dtype=np.float64)
    wsum = np.zeros((height, width), dtype=np.float64)
    for (ox, oy), im, w in zip(offsets, images, weights):
        acc[oy : oy + im.height, ox : ox + im.width, :] += (
            im.data.astype(np.float64) * w[:, :, None]
        )
        wsum[oy : oy + im.height, ox : ox + im.width] += w
    covered = wsum > 0
    out = np.zeros_like(acc)
    out[covered] = acc[covered] / wsum[covered][:, None]
    return Image.from_array(np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8))


def synthesize_benchmark(
    images: list[Image], spec: StitchSpec, chain: list[HopTables], benchmark: int
) -> Image:
    """One panorama whose tone matches the chosen input; that input is never remapped."""
    corrected = [
        im if m == benchmark else apply_imf(im, tables_to_benchmark(chain, m, benchmark))
        for m, im in enumerate(images)
    ]
    return mosaic(corrected, spec)


def synthesize_all(images: list[Image], spec: StitchSpec, chain: list[HopTables]) -> list[Image]:
    """One panorama per benchmark exposure; all share identical dimensions."""
    return [synthesize_benchmark(images, spec, chain, l) for l in range(len(images))]


def stitch_hdr(images: list[Image], spec: StitchSpec) -> StitchResult:
    """Full pipeline: pairwise estimation, per-benchmark panoramas, fusion."""
    timings = {}
    t0 = time.perf_counter()
    chain = estimate_pairwise(images, spec)
    timings["estimate_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    panoramas = synthesize_all(images, spec, chain)
    timings["synthesize_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    fused = fuse_exposures(panoramas)
    timings["fuse_s"] = time.perf_counter() - t0
    return StitchResult(fused, panoramas, chain, timings)
