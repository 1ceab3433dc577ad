"""Multi-scale exposure fusion of equally sized differently exposed images.

Per-pixel quality weights combine contrast, saturation and
well-exposedness; the normalized weights then blend the inputs over a
Gaussian/Laplacian pyramid so seams between differently lit regions stay
smooth.  All constants are module-level so run manifests can record them.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve, correlate1d

from .errors import GeometryError
from .image import Image

WEIGHT_EPS = 1e-6
WELL_EXPOSED_SIGMA = 0.2
PYRAMID_KERNEL = np.array([0.05, 0.25, 0.4, 0.25, 0.05])
_LAPLACIAN_STENCIL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])

FUSION_CONSTANTS = {
    "weight_eps": WEIGHT_EPS,
    "well_exposed_sigma": WELL_EXPOSED_SIGMA,
    "pyramid_kernel": PYRAMID_KERNEL.tolist(),
    "depth_rule": "max(1, floor(log2(min_dim)) - 2)",
}


def pyramid_depth(height: int, width: int) -> int:
    return max(1, int(np.floor(np.log2(min(height, width)))) - 2)


def _blur(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    out = correlate1d(arr, kernel, axis=0, mode="reflect")
    return correlate1d(out, kernel, axis=1, mode="reflect")


def _downsample(arr: np.ndarray) -> np.ndarray:
    return _blur(arr, PYRAMID_KERNEL)[::2, ::2]


def _upsample(arr: np.ndarray, shape: tuple) -> np.ndarray:
    out = np.zeros(shape, dtype=arr.dtype)
    out[::2, ::2] = arr
    # Zero insertion halves the energy per axis, so the kernel is doubled.
    return _blur(out, 2.0 * PYRAMID_KERNEL)


def gaussian_pyramid(arr: np.ndarray, levels: int) -> list[np.ndarray]:
    pyr = [np.asarray(arr, dtype=np.float64)]
    for _ in range(levels - 1):
        pyr.append(_downsample(pyr[-1]))
    return pyr


def laplacian_pyramid(arr: np.ndarray, levels: int) -> list[np.ndarray]:
    gp = gaussian_pyramid(arr, levels)
    pyr = [gp[i] - _upsample(gp[i + 1], gp[i].shape) for i in range(levels - 1)]
    pyr.append(gp[-1])
    return pyr


def collapse_pyramid(pyr: list[np.ndarray]) -> np.ndarray:
    out = pyr[-1]
    for level in reversed(pyr[:-1]):
        out = level + _upsample(out, level.shape)
    return out


def quality_weights(img: Image) -> np.ndarray:
    """Contrast x saturation x well-exposedness, each floored by a small eps.

    The eps keeps flat or gray layers from collapsing to zero weight, so
    the ranking falls back to the remaining factors (for a pair of
    constant layers, whichever is better exposed still dominates).
    """
    x = img.data.astype(np.float64) / 255.0
    gray = x.mean(axis=2)
    contrast = np.abs(convolve(gray, _LAPLACIAN_STENCIL, mode="reflect"))
    if img.n_channels == 1:
        saturation = np.zeros_like(gray)
    else:
        saturation = x.std(axis=2)
    well = np.exp(-((x - 0.5) ** 2) / (2.0 * WELL_EXPOSED_SIGMA**2)).prod(axis=2)
    return (contrast + WEIGHT_EPS) * (saturation + WEIGHT_EPS) * (well + WEIGHT_EPS)


def normalized_weights(images: list[Image]) -> list[np.ndarray]:
    """Per-layer weight maps scaled to sum to 1 at every pixel."""
    weights = [quality_weights(im) for im in images]
    total = np.sum(weights, axis=0)
    return [w / total for w in weights]


def fuse_exposures(images: list[Image]) -> Image:
    """Fuse >= 2 equally sized exposure layers into one 8-bit image."""
    if len(images) < 2:
        raise GeometryError("fusion needs at least 2 images")
    first = images[0]
    for im in images[1:]:
        if (im.width, im.height, im.n_channels) != (first.width, first.height, first.n_channels):
            raise GeometryError("fusion inputs differ in size or channel count")
    levels = pyramid_depth(first.height, first.width)
    fused: list[np.ndarray] | None = None
    for im, wn in zip(images, normalized_weights(images)):
        weight_pyr = gaussian_pyramid(wn, levels)
        image_pyr = laplacian_pyramid(im.data.astype(np.float64) / 255.0, levels)
        terms = [wp[..., None] * ip for wp, ip in zip(weight_pyr, image_pyr)]
        if fused is None:
            fused = terms
        else:
            fused = [f + t for f, t in zip(fused, terms)]
    out = np.clip(collapse_pyramid(fused), 0.0, 1.0)
    return Image.from_array(np.floor(out * 255.0 + 0.5).astype(np.uint8))
