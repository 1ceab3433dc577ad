"""8-bit image container, PNG/JPEG codecs, histograms and overlap cropping.

Everything downstream works per channel on 2-D uint8 planes with 256
intensity levels.  Images are immutable after construction so they can be
shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image as PilImage
from PIL import UnidentifiedImageError

from .errors import DecodeError, GeometryError, UnsupportedDepthError

LEVELS = 256

# PIL modes wider than 8 bits per channel are rejected instead of silently
# truncated; low-depth modes are widened to 8 bits.
_DEEP_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N", "F"}
_GRAY_MODES = {"1", "L", "LA"}
_ALLOWED_FORMATS = {"PNG", "JPEG"}


@dataclass(frozen=True)
class RegionRect:
    """Axis-aligned rectangle in pixel coordinates, origin at top-left."""

    x0: int
    y0: int
    width: int
    height: int


@dataclass(frozen=True)
class Image:
    """An 8-bit image with 1 (grayscale) or 3 (RGB order) channel planes.

    ``data`` has shape (height, width, channels) and dtype uint8; a
    read-only view is kept so instances are safe to share.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = self.data
        if arr.dtype != np.uint8:
            raise GeometryError(f"image data must be uint8, got {arr.dtype}")
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise GeometryError(f"image data must be (h, w, 1|3), got shape {arr.shape}")
        locked = arr.view()
        locked.flags.writeable = False
        object.__setattr__(self, "data", locked)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Image":
        """Build an Image from a (h, w) or (h, w, c) array of 0..255 values."""
        a = np.asarray(arr)
        if a.dtype != np.uint8:
            if a.size and (a.min() < 0 or a.max() > 255):
                raise GeometryError("intensity values outside 0..255")
            a = a.astype(np.uint8)
        if a.ndim == 2:
            a = a[:, :, None]
        return cls(a)

    @classmethod
    def from_planes(cls, planes: list[np.ndarray]) -> "Image":
        if len(planes) not in (1, 3):
            raise GeometryError(f"expected 1 or 3 planes, got {len(planes)}")
        if any(p.shape != planes[0].shape for p in planes):
            raise GeometryError("channel planes differ in shape")
        return cls.from_array(np.stack(planes, axis=-1))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def n_channels(self) -> int:
        return self.data.shape[2]

    @property
    def planes(self) -> list[np.ndarray]:
        """Per-channel 2-D views, RGB order for color images."""
        return [self.data[:, :, i] for i in range(self.n_channels)]


def decode_image(path: str | Path) -> Image:
    """Decode a PNG or JPEG file into an 8-bit Image.

    Grayscale files yield one channel, color files three.  Files deeper
    than 8 bits per channel raise :class:`UnsupportedDepthError`.
    """
    p = Path(path)
    try:
        with PilImage.open(p) as im:
            if im.format not in _ALLOWED_FORMATS:
                raise DecodeError(f"{p}: unsupported format {im.format!r}, expected PNG or JPEG")
            if im.mode in _DEEP_MODES:
                raise UnsupportedDepthError(
                    f"{p}: unsupported depth (mode {im.mode}); only 8-bit channels are supported"
                )
            if im.mode in _GRAY_MODES:
                arr = np.asarray(im.convert("L"), dtype=np.uint8)
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except DecodeError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"{p}: decode failure ({exc})") from exc
    return Image.from_array(arr)


def write_png(img: Image, path: str | Path) -> None:
    """Write an Image as PNG (the only output format; no re-JPEGing)."""
    arr = img.data[:, :, 0] if img.n_channels == 1 else img.data
    PilImage.fromarray(arr).save(Path(path), format="PNG")


def crop(img: Image, r: RegionRect) -> Image:
    """Extract the sub-image under ``r`` with no resampling."""
    if r.width <= 0 or r.height <= 0:
        raise GeometryError(f"degenerate crop rectangle {r}")
    if r.x0 < 0 or r.y0 < 0 or r.x0 + r.width > img.width or r.y0 + r.height > img.height:
        raise GeometryError(
            f"crop rectangle {r} exceeds image bounds {img.width}x{img.height}"
        )
    return Image(img.data[r.y0 : r.y0 + r.height, r.x0 : r.x0 + r.width, :].copy())


def simulate_overlap(a: Image, b: Image, n_c: int) -> tuple[Image, Image]:
    """Produce misaligned overlap crops from an aligned image pair.

    The first image loses ``n_c`` columns on the left and ``n_c`` rows at
    the bottom; the second loses ``n_c`` columns on the right and ``n_c``
    rows at the top.  Both results are (w - n_c) x (h - n_c); larger
    ``n_c`` means a larger simulated misalignment.
    """
    if (a.width, a.height, a.n_channels) != (b.width, b.height, b.n_channels):
        raise GeometryError("images differ in size or channel count")
    if n_c < 0:
        raise GeometryError(f"n_c must be non-negative, got {n_c}")
    if n_c == 0:
        return a, b
    if 2 * n_c >= min(a.width, a.height):
        raise GeometryError(f"n_c={n_c} too large for a {a.width}x{a.height} image")
    w, h = a.width, a.height
    ca = crop(a, RegionRect(n_c, 0, w - n_c, h - n_c))
    cb = crop(b, RegionRect(0, n_c, w - n_c, h - n_c))
    return ca, cb


def histogram(plane: np.ndarray) -> np.ndarray:
    """Count pixels per intensity level; bin width is 1 by construction."""
    return np.bincount(np.asarray(plane, dtype=np.uint8).ravel(), minlength=LEVELS).astype(np.int64)


def cumulate(hist: np.ndarray) -> np.ndarray:
    """Running sums of a histogram; the last entry equals the pixel count."""
    return np.cumsum(np.asarray(hist, dtype=np.int64))
