"""Apply completed mapping tables to images and chain tables together."""

from __future__ import annotations

import numpy as np

from .completion import quantize_table
from .errors import TableError
from .image import LEVELS, Image
from .table import ImfTable


def apply_imf(img: Image, tables: list[ImfTable]) -> Image:
    """Map every pixel through its channel's table (quantized half-up)."""
    if len(tables) != img.n_channels:
        raise TableError(f"{len(tables)} tables for {img.n_channels} channels")
    luts = [quantize_table(t).values.astype(np.uint8) for t in tables]
    return Image.from_planes([lut[plane] for lut, plane in zip(luts, img.planes)])


def compose_imf(outer: ImfTable, inner: ImfTable) -> ImfTable:
    """Evaluate ``outer`` at every value of ``inner``: result(z) = outer(inner(z)).

    Inner values are real, so the outer table is read by linear
    interpolation between its two bracketing integer entries; the result
    stays real-valued and quantization waits until image application.
    """
    if not outer.is_total or not inner.is_total:
        raise TableError("composition requires total tables")
    vals = np.interp(inner.values, np.arange(LEVELS, dtype=np.float64), outer.values)
    return ImfTable(vals, np.ones(LEVELS, dtype=bool))
