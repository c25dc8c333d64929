"""CSV and JSON writers.  Floats go out with 17 significant digits."""

from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path

import numpy as np

from .estimators import Histogram1D, Histogram2D
from .sde import Trajectory

FMT = "%.17g"


def _write_rows(path: Path, header: str, columns) -> Path:
    path = Path(path)
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        np.savetxt(fh, data, fmt=FMT, delimiter=",")
    return path


def write_trajectory(path, traj: Trajectory) -> Path:
    cols = [traj.times, traj.s]
    header = "t,S"
    if traj.i is not None:
        cols.append(traj.i)
        header += ",I"
    if traj.r_class is not None:
        cols.append(traj.r_class)
        header += ",R"
    return _write_rows(path, header, cols)


def write_histogram_1d(path, h: Histogram1D) -> Path:
    return _write_rows(path, "bin_lo,bin_hi,mass", [h.edges[:-1], h.edges[1:], h.mass])


def write_histogram_2d(path, h: Histogram2D) -> Path:
    nx, ny = h.mass.shape
    ix, iy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ix, iy = ix.ravel(), iy.ravel()
    return _write_rows(
        path,
        "x_lo,x_hi,y_lo,y_hi,mass",
        [h.x_edges[ix], h.x_edges[ix + 1], h.y_edges[iy], h.y_edges[iy + 1], h.mass.ravel()],
    )


def write_tv_series(path, times, tv) -> Path:
    return _write_rows(path, "t,tv", [times, tv])


def write_table(path, header: str, columns) -> Path:
    return _write_rows(path, header, columns)


def _jsonable(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        # round-trip exact; never more than 17 significant digits
        return float(f"{x:.17g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    with open(path, "w", newline="\n") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
