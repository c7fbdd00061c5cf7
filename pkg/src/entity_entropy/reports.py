"""Tabular report output: CSV/JSON writers, histogram and kernel density data."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclasses.dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray


@dataclasses.dataclass(frozen=True)
class DensityCurve:
    x: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.x))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value)) if math.isfinite(value) else str(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> int:
    """Write rows with a stable float format; returns the number of data rows."""
    n = 0
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
            n += 1
    return n


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_json(path: str | Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def histogram(values: Sequence[float], bins: int = 50, upper: float | None = None) -> Histogram:
    """Uniform bins over ``[0, upper]`` (``upper`` defaults to the data maximum)."""
    v = np.asarray(values, dtype=float)
    hi = upper if upper is not None else (float(v.max()) if v.size else 1.0)
    if hi <= 0:
        hi = 1.0
    counts, edges = np.histogram(v, bins=bins, range=(0.0, hi))
    return Histogram(edges, counts)


def silverman_bandwidth(values: Sequence[float]) -> float:
    """``0.9 * min(std, IQR / 1.34) * n^(-1/5)``; falls back to std when the IQR is 0."""
    v = np.asarray(values, dtype=float)
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    q75, q25 = np.percentile(v, [75, 25]) if v.size else (0.0, 0.0)
    spread = min(sd, (q75 - q25) / 1.34) if q75 > q25 else sd
    return 0.9 * spread * v.size ** (-0.2) if spread > 0 else 0.0


def scott_bandwidth(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=float)
    sd = float(v.std(ddof=1)) if v.size > 1 else 0.0
    return 1.06 * sd * v.size ** (-0.2)


def kde_curve(values: Sequence[float], bandwidth: str | float = "silverman",
              points: int = 512, fallback: float = 0.25, max_points: int = 100_000) -> DensityCurve:
    """Gaussian kernel density evaluated on a grid covering the data +- 4 bandwidths.

    The grid holds at least ``points`` nodes and is refined (up to
    ``max_points``) so that node spacing stays within half a bandwidth.
    ``fallback`` is used when the data have no spread.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise ValueError("no values for density estimate")
    if isinstance(bandwidth, str):
        rules = {"silverman": silverman_bandwidth, "scott": scott_bandwidth}
        if bandwidth not in rules:
            raise ValueError(f"unknown bandwidth rule {bandwidth!r}")
        h = rules[bandwidth](v)
    else:
        h = float(bandwidth)
        if h <= 0:
            raise ValueError("bandwidth must be > 0")
    if h <= 0:
        h = fallback
    lo, hi = v.min() - 4 * h, v.max() + 4 * h
    n = min(max(points, math.ceil(2 * (hi - lo) / h) + 1), max_points)
    x = np.linspace(lo, hi, n)
    density = np.empty(n)
    step = max(1, 4_000_000 // v.size)
    norm = v.size * h * math.sqrt(2 * math.pi)
    for i in range(0, n, step):
        z = (x[i:i + step, None] - v[None, :]) / h
        density[i:i + step] = np.exp(-0.5 * z * z).sum(axis=1) / norm
    return DensityCurve(x, density, h)
