"""Portable snapshots and the diagnostics CSV.

A snapshot is one raw file per field (little-endian float64, C order: the
first grid axis varies slowest) plus a JSON sidecar holding the grid dims,
lengths, field name, time and config hash.
"""

import csv
import json
import os

import numpy as np

from .grid import Grid
from .state import FluidState

SNAPSHOT_FIELDS = ("vx", "vy", "vz", "rho", "s")
DIAGNOSTICS_VERSION = "metriplectic-diagnostics v1"


def _field_arrays(state):
    return {"vx": state.v[0], "vy": state.v[1], "vz": state.v[2], "rho": state.rho, "s": state.s}


def snapshot_stem(directory, step):
    return os.path.join(directory, f"snap_{step:06d}")


def write_snapshot(directory, state, step, t, config_hash=""):
    os.makedirs(directory, exist_ok=True)
    stem = snapshot_stem(directory, step)
    for name, arr in _field_arrays(state).items():
        np.ascontiguousarray(arr, dtype="<f8").tofile(f"{stem}_{name}.f64")
        meta = {
            "field": name,
            "dims": list(state.grid.dims),
            "lengths": list(state.grid.lengths),
            "t": t,
            "step": step,
            "dtype": "<f8",
            "order": "C",
            "config_hash": config_hash,
        }
        with open(f"{stem}_{name}.json", "w") as fh:
            json.dump(meta, fh, indent=1, sort_keys=True)
    return stem


def read_snapshot(directory, step):
    """Return ``(state, t, metadata)`` for the snapshot written at ``step``."""
    stem = snapshot_stem(directory, step)
    arrays = {}
    meta = None
    for name in SNAPSHOT_FIELDS:
        with open(f"{stem}_{name}.json") as fh:
            meta = json.load(fh)
        dims = tuple(meta["dims"])
        arrays[name] = np.fromfile(f"{stem}_{name}.f64", dtype="<f8").reshape(dims)
    grid = Grid(tuple(meta["dims"]), tuple(meta["lengths"]))
    v = np.stack([arrays["vx"], arrays["vy"], arrays["vz"]])
    return FluidState(grid, v, arrays["rho"], arrays["s"]), meta["t"], meta


class DiagnosticsWriter:
    """Streams records to CSV; floats are written with ``repr`` so they round-trip."""

    def __init__(self, path, columns):
        self.columns = list(columns)
        self._fh = open(path, "w", newline="")
        self._fh.write(f"# {DIAGNOSTICS_VERSION}\n")
        self._w = csv.writer(self._fh, lineterminator="\n")
        self._w.writerow(self.columns)

    def write(self, record):
        self._w.writerow([repr(float(record[c])) for c in self.columns])

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_diagnostics(path):
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError("diagnostics file lacks version comment")
        rows = list(csv.DictReader(fh))
    return [{k: float(v) for k, v in r.items()} for r in rows]
