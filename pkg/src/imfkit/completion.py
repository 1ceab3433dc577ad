"""Fill absent lookup-table entries over the full dynamic range.

Interior gaps take the straight line through the nearest estimated entry
on each side; gaps beyond the first or last estimated entry continue the
line through the two nearest entries on that side.  Quantization to
integer intensities is a separate step, applied only when a table finally
touches pixels.
"""

from __future__ import annotations

import numpy as np

from .errors import TableError
from .image import LEVELS
from .table import ImfTable


def complete_table(table: ImfTable, *, clamp: bool = True) -> ImfTable:
    """Return a total table; estimated entries are never touched.

    ``clamp=False`` keeps extrapolated values outside 0..255 (useful for
    checking the raw line continuation); by default fills are clamped into
    the representable range.  Completing an already-total table returns an
    unchanged copy, so the operation is idempotent.
    """
    idx = table.present_indices()
    if idx.size < 2:
        raise TableError(f"under-determined table: need >= 2 entries, have {idx.size}")
    if table.is_total:
        return table.copy()
    vals = table.values[idx]
    out = table.values.copy()
    z_all = np.arange(LEVELS)
    absent = ~table.present

    interior = absent & (z_all > idx[0]) & (z_all < idx[-1])
    out[interior] = np.interp(z_all[interior], idx, vals)

    left = z_all < idx[0]
    if left.any():
        slope = (vals[1] - vals[0]) / (idx[1] - idx[0])
        out[left] = vals[0] + slope * (z_all[left] - idx[0])
    right = z_all > idx[-1]
    if right.any():
        slope = (vals[-1] - vals[-2]) / (idx[-1] - idx[-2])
        out[right] = vals[-1] + slope * (z_all[right] - idx[-1])

    if clamp:
        out[absent] = np.clip(out[absent], 0.0, 255.0)
    return ImfTable(out, np.ones(LEVELS, dtype=bool))


def quantize_table(table: ImfTable) -> ImfTable:
    """Round every value half-up to the nearest integer in 0..255."""
    if not table.is_total:
        raise TableError("cannot quantize a non-total table")
    q = np.clip(np.floor(table.values + 0.5), 0.0, 255.0)
    return ImfTable(q, np.ones(LEVELS, dtype=bool))
