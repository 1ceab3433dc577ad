"""Image quality metrics (PSNR, SSIM) and wall-time measurement.

SSIM uses the standard parameterization: 11x11 Gaussian window with
sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 255, computed per channel
and averaged.  PSNR pools the MSE across all pixels and channels before
the log so each image pair yields a single number.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.ndimage import correlate1d

from .errors import GeometryError
from .image import Image

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DYNAMIC_RANGE = 255.0

EVAL_CSV_HEADER = ["estimator", "n_c", "psnr", "ssim", "seconds"]


@dataclass
class EvalRecord:
    """One experiment row: estimator name, misalignment, scores, wall time."""

    estimator: str
    n_c: int
    psnr: float
    ssim: float
    seconds: float


def _check_comparable(a: Image, b: Image) -> None:
    if (a.width, a.height, a.n_channels) != (b.width, b.height, b.n_channels):
        raise GeometryError(
            f"cannot compare {a.width}x{a.height}x{a.n_channels} with "
            f"{b.width}x{b.height}x{b.n_channels}"
        )


def psnr(a: Image, b: Image) -> float:
    """Peak signal-to-noise ratio in dB; identical images give +inf."""
    _check_comparable(a, b)
    diff = a.data.astype(np.float64) - b.data.astype(np.float64)
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(DYNAMIC_RANGE * DYNAMIC_RANGE / mse)


def _gaussian_kernel() -> np.ndarray:
    t = np.arange(SSIM_WINDOW) - (SSIM_WINDOW - 1) / 2.0
    k = np.exp(-(t * t) / (2.0 * SSIM_SIGMA * SSIM_SIGMA))
    return k / k.sum()


def _local_mean(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Separable Gaussian filter, then crop to where the window fits fully.
    half = SSIM_WINDOW // 2
    t = correlate1d(arr, kernel, axis=0, mode="reflect")
    t = correlate1d(t, kernel, axis=1, mode="reflect")
    return t[half:-half, half:-half]


def _ssim_plane(x: np.ndarray, y: np.ndarray, kernel: np.ndarray) -> float:
    x = x.astype(np.float64)
    y = y.astype(np.float64)
    c1 = (SSIM_K1 * DYNAMIC_RANGE) ** 2
    c2 = (SSIM_K2 * DYNAMIC_RANGE) ** 2
    mu_x = _local_mean(x, kernel)
    mu_y = _local_mean(y, kernel)
    var_x = _local_mean(x * x, kernel) - mu_x * mu_x
    var_y = _local_mean(y * y, kernel) - mu_y * mu_y
    cov = _local_mean(x * y, kernel) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def ssim(a: Image, b: Image) -> float:
    """Mean structural similarity over all channels."""
    _check_comparable(a, b)
    if min(a.width, a.height) < SSIM_WINDOW:
        raise GeometryError(
            f"image {a.width}x{a.height} smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} window"
        )
    kernel = _gaussian_kernel()
    scores = [_ssim_plane(pa, pb, kernel) for pa, pb in zip(a.planes, b.planes)]
    return float(np.mean(scores))


def time_op(fn: Callable, *args, **kwargs):
    """Run ``fn`` and return (result, wall seconds).  Keep I/O outside."""
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start


def append_records_csv(path: str | Path, records: list[EvalRecord]) -> None:
    """Append evaluation rows to a CSV, writing the header on first use."""
    path = Path(path)
    new_file = not path.exists()
    with open(path, "a", newline="") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(EVAL_CSV_HEADER)
        for r in records:
            writer.writerow(
                [r.estimator, r.n_c, format(r.psnr, ".12g"), format(r.ssim, ".12g"),
                 format(r.seconds, ".12g")]
            )
