"""Seeded synthetic scenes, exposure curves, and test pairs/triples.

Stands in for full-scale camera datasets: every generator is driven by a
numpy Generator so outputs are bit-reproducible, and each pair/triple is
saved together with its ground-truth curve for oracle-based checks.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import ImfkitError
from .image import LEVELS, Image, RegionRect
from .panorama import PairOverlap, StitchSpec
from .table import ImfTable

CURVE_KINDS = ("gamma", "sigmoid", "shift")


def smooth_field(rng: np.random.Generator, height: int, width: int, feature_scale: float = 3.0) -> np.ndarray:
    """Random smooth scene in [0, 1] with spatial detail at ``feature_scale`` px."""
    base = rng.random((height, width))
    smo = gaussian_filter(base, feature_scale, mode="reflect")
    lo, hi = smo.min(), smo.max()
    if hi == lo:
        return np.zeros_like(smo)
    return (smo - lo) / (hi - lo)


def curve01(kind: str, strength: float) -> "np.ufunc | object":
    """Monotone [0,1] -> [0,1] tone curve of the requested family."""
    if kind == "gamma":
        g = max(strength, 1e-3)
        return lambda s: np.power(s, g)
    if kind == "sigmoid":
        k = max(strength, 1e-3)

        def f(s):
            raw = 1.0 / (1.0 + np.exp(-k * (s - 0.5)))
            lo = 1.0 / (1.0 + np.exp(k * 0.5))
            hi = 1.0 / (1.0 + np.exp(-k * 0.5))
            return (raw - lo) / (hi - lo)

        return f
    if kind == "shift":
        return lambda s: np.clip(s + strength, 0.0, 1.0)
    raise ImfkitError(f"unknown curve kind {kind!r}; expected one of {CURVE_KINDS}")


def curve_table(kind: str, strength: float) -> ImfTable:
    """Ground-truth mapping as a total table over the 256 integer levels."""
    f = curve01(kind, strength)
    z = np.arange(LEVELS, dtype=np.float64) / 255.0
    return ImfTable(np.clip(f(z) * 255.0, 0.0, 255.0), np.ones(LEVELS, dtype=bool))


def _quantize01(arr: np.ndarray, rng: np.random.Generator | None, noise_sigma: float) -> np.ndarray:
    levels = arr * 255.0
    if noise_sigma > 0 and rng is not None:
        levels = levels + rng.normal(0.0, noise_sigma, size=arr.shape)
    return np.clip(np.floor(levels + 0.5), 0, 255).astype(np.uint8)


def exposure_pair(
    rng: np.random.Generator,
    height: int,
    width: int,
    kind: str = "gamma",
    strength: float = 0.45,
    noise_sigma: float = 1.0,
    channels: int = 3,
    feature_scale: float = 3.0,
    texture_mix: float = 0.5,
) -> tuple[Image, Image, ImfTable]:
    """Two exposures of one scene plus the ground-truth integer-level curve.

    Channels share the curve but carry independent scene fields and noise,
    mimicking an exposure change that acts identically per channel.
    ``texture_mix`` blends per-pixel texture into the smooth field; higher
    values give scenes whose windowed intensity distributions are stabler,
    the way large real photographs behave.
    """
    f = curve01(kind, strength)
    planes_a, planes_b = [], []
    for _ in range(channels):
        smooth = smooth_field(rng, height, width, feature_scale)
        scene = (1.0 - texture_mix) * smooth + texture_mix * rng.random((height, width))
        planes_a.append(_quantize01(scene, rng, noise_sigma))
        planes_b.append(_quantize01(f(scene), rng, noise_sigma))
    return Image.from_planes(planes_a), Image.from_planes(planes_b), curve_table(kind, strength)


def full_range_master(rng: np.random.Generator, height: int, width: int) -> Image:
    """Grayscale master guaranteed to contain every intensity level."""
    n = height * width
    if n < LEVELS:
        raise ImfkitError(f"{height}x{width} master cannot hold all {LEVELS} levels")
    reps = -(-n // LEVELS)
    flat = np.tile(np.arange(LEVELS, dtype=np.uint8), reps)[:n]
    return Image.from_array(rng.permutation(flat).reshape(height, width))


def monotone_int_lut(rng: np.random.Generator) -> np.ndarray:
    """Random monotone non-decreasing integer curve (clamped affine or gamma)."""
    z = np.arange(LEVELS, dtype=np.float64)
    if rng.random() < 0.5:
        a = rng.uniform(0.5, 2.0)
        b = rng.uniform(-40.0, 40.0)
        vals = a * z + b
    else:
        g = rng.uniform(0.4, 2.5)
        vals = 255.0 * np.power(z / 255.0, g)
    return np.clip(np.floor(vals + 0.5), 0, 255).astype(np.uint8)


def exposure_triple(
    rng: np.random.Generator,
    height: int = 192,
    width: int = 256,
    overlap: int = 64,
    noise_sigma: float = 0.0,
    curves: tuple[float, float, float] = (1.8, 1.0, 0.55),
) -> tuple[list[Image], StitchSpec, np.ndarray]:
    """Three horizontally overlapping sub-images with bracketed exposures.

    Returns the sub-images, a stitch spec with their overlap geometry (no
    file paths; fill in ``inputs`` when saving), and the master scene the
    windows were cut from.  ``curves`` are per-input gamma exponents,
    ordered dark to bright.
    """
    if overlap >= width:
        raise ImfkitError("overlap must be smaller than the sub-image width")
    step = width - overlap
    master_w = width + 2 * step
    master = smooth_field(rng, height, master_w, feature_scale=4.0)
    images = []
    for i, g in enumerate(curves):
        window = master[:, i * step : i * step + width]
        exposed = np.power(window, g)
        planes = [_quantize01(exposed, rng, noise_sigma) for _ in range(3)]
        images.append(Image.from_planes(planes))
    rect_a = RegionRect(step, 0, overlap, height)
    rect_b = RegionRect(0, 0, overlap, height)
    spec = StitchSpec(
        inputs=[],
        overlaps=[PairOverlap(rect_a, rect_b), PairOverlap(rect_a, rect_b)],
        feather=16,
    )
    return images, spec, master
