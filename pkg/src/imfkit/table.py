"""Intensity lookup tables with per-entry validity, plus CSV/JSON round-trip.

A table holds one real-valued mapped intensity per source level 0..255.
Entries start out absent wherever an estimator had no pixels to look at;
completion fills them in.  Serialized forms keep full float precision so
tables survive a disk round-trip bit-exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import TableError
from .image import LEVELS


@dataclass(eq=False)
class ImfTable:
    """Per-channel intensity mapping table over the 256-level dynamic range.

    ``values[z]`` is the mapped intensity for source level z (real, kept
    fractional until quantization); ``present[z]`` says whether the entry
    exists yet.  Absent entries hold NaN.
    """

    values: np.ndarray
    present: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (LEVELS,):
            raise TableError(f"table needs {LEVELS} entries, got shape {vals.shape}")
        if self.present is None:
            pres = np.isfinite(vals)
        else:
            pres = np.array(self.present, dtype=bool)
            if pres.shape != (LEVELS,):
                raise TableError(f"presence mask needs {LEVELS} entries, got {pres.shape}")
        vals[~pres] = np.nan
        self.values = vals
        self.present = pres

    @classmethod
    def empty(cls) -> "ImfTable":
        return cls(np.full(LEVELS, np.nan), np.zeros(LEVELS, dtype=bool))

    @classmethod
    def identity(cls) -> "ImfTable":
        return cls(np.arange(LEVELS, dtype=np.float64), np.ones(LEVELS, dtype=bool))

    @property
    def is_total(self) -> bool:
        return bool(self.present.all())

    def present_indices(self) -> np.ndarray:
        return np.flatnonzero(self.present)

    def copy(self) -> "ImfTable":
        return ImfTable(self.values.copy(), self.present.copy())


def save_table_csv(table: ImfTable, path: str | Path) -> None:
    """Write one table as CSV rows ``z,value,present`` at full precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z", "value", "present"])
        for z in range(LEVELS):
            if table.present[z]:
                writer.writerow([z, format(table.values[z], ".17g"), 1])
            else:
                writer.writerow([z, "", 0])


def load_table_csv(path: str | Path) -> ImfTable:
    values = np.full(LEVELS, np.nan)
    present = np.zeros(LEVELS, dtype=bool)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"z", "value", "present"}:
            raise TableError(f"{path}: expected header z,value,present")
        for row in reader:
            z = int(row["z"])
            if not 0 <= z < LEVELS:
                raise TableError(f"{path}: level {z} out of range")
            if row["present"] == "1":
                values[z] = float(row["value"])
                present[z] = True
    return ImfTable(values, present)


def save_tables_json(tables: list[ImfTable], path: str | Path) -> None:
    """Bundle all channel tables into one JSON file (null marks absent)."""
    doc = {
        "channels": [
            {
                "values": [float(v) if p else None for v, p in zip(t.values, t.present)],
            }
            for t in tables
        ]
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_tables_json(path: str | Path) -> list[ImfTable]:
    with open(path) as fh:
        doc = json.load(fh)
    channels = doc.get("channels")
    if not isinstance(channels, list) or not channels:
        raise TableError(f"{path}: missing 'channels' list")
    tables = []
    for ch in channels:
        raw = ch.get("values")
        if not isinstance(raw, list) or len(raw) != LEVELS:
            raise TableError(f"{path}: each channel needs {LEVELS} values")
        values = np.array([np.nan if v is None else float(v) for v in raw])
        tables.append(ImfTable(values, np.array([v is not None for v in raw])))
    return tables
