"""Entropy over time: cumulative series, daily deltas, bursts, early growth."""

from __future__ import annotations

import dataclasses
import datetime as dt
from collections import Counter, defaultdict
from typing import Literal, Sequence

import numpy as np

from .corpus import CorpusIndex
from .entropy import entropy_from_counts


class TemporalUnavailable(ValueError):
    """The entity references documents without a creation date."""


@dataclasses.dataclass(frozen=True)
class EntropySeries:
    """Cumulative entropy at each day offset ``0..T`` from the first mention."""

    entity_id: str
    first_mention: dt.date | None
    values: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclasses.dataclass(frozen=True)
class EarlyFinal:
    entity_id: str
    early: float
    final: float
    label: Literal["stable", "growing"]


def entity_day_counts(index: CorpusIndex, entity_id: str) -> tuple[dt.date, dict[int, dict[str, int]]]:
    """Group an entity's fact counts by day offset from its first mention."""
    table = index.tables[entity_id]
    dates = {}
    for doc_id in table.counts:
        d = index.doc_date(doc_id)
        if d is None:
            raise TemporalUnavailable(
                f"temporal analysis unavailable: entity {entity_id!r} references undated "
                f"document {doc_id!r}")
        dates[doc_id] = d
    first = min(dates.values())
    by_day: dict[int, dict[str, int]] = defaultdict(dict)
    for doc_id, n in table.counts.items():
        by_day[(dates[doc_id] - first).days][doc_id] = n
    return first, dict(by_day)


def entropy_series(index: CorpusIndex, entity_id: str, horizon_days: int | None = None) -> EntropySeries:
    """Entropy of the facts accumulated up to each day after first mention.

    With ``horizon_days=None`` the series runs to the entity's last dated document.
    """
    first, by_day = entity_day_counts(index, entity_id)
    if horizon_days is None:
        horizon_days = max(by_day)
    if horizon_days < 0:
        raise ValueError("horizon_days must be >= 0")
    cumulative: Counter = Counter()
    values = []
    h = 0.0
    for t in range(horizon_days + 1):
        if t in by_day:
            cumulative.update(by_day[t])
            h = entropy_from_counts(cumulative.values())
        values.append(h)
    return EntropySeries(entity_id, first, tuple(values))


def series_from_values(values: Sequence[float], entity_id: str = "",
                       first_mention: dt.date | None = None) -> EntropySeries:
    return EntropySeries(entity_id, first_mention, tuple(float(v) for v in values))


def delta_series(series: EntropySeries | Sequence[float]) -> list[float]:
    values = series.values if isinstance(series, EntropySeries) else series
    if len(values) < 2:
        raise ValueError("need at least two values")
    return [float(b - a) for a, b in zip(values[:-1], values[1:])]


def detect_bursts(series: EntropySeries | Sequence[float], threshold: float) -> list[int]:
    """Day offsets where the entropy moved by at least ``threshold`` bits since the previous day."""
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    values = series.values if isinstance(series, EntropySeries) else series
    return [t for t in range(1, len(values)) if abs(values[t] - values[t - 1]) >= threshold]


def early_vs_final(series: EntropySeries, early_day: int = 10, final_day: int = 90) -> EarlyFinal | None:
    """Entropy at ``early_day`` and ``final_day``; ``None`` if the series is too short.

    An entity is *growing* when its entropy at ``early_day`` exceeds its entropy
    on the day of first mention.
    """
    if not 0 <= early_day <= final_day:
        raise ValueError("require 0 <= early_day <= final_day")
    if len(series) <= final_day:
        return None
    v = series.values
    label = "growing" if v[early_day] > v[0] else "stable"
    return EarlyFinal(series.entity_id, v[early_day], v[final_day], label)


def early_final_regression(pairs: Sequence[EarlyFinal] | Sequence[tuple[float, float]],
                           subset: Literal["all", "growing"] = "all") -> tuple[float, float] | None:
    """Least-squares line final ~ early; ``None`` for degenerate input."""
    if subset not in ("all", "growing"):
        raise ValueError(f"unknown subset {subset!r}")
    xs, ys = [], []
    for p in pairs:
        if isinstance(p, EarlyFinal):
            if subset == "growing" and p.label != "growing":
                continue
            xs.append(p.early)
            ys.append(p.final)
        else:
            xs.append(p[0])
            ys.append(p[1])
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 2:
        return None
    dx = x - x.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        return None
    slope = float(dx @ (y - y.mean())) / sxx
    return slope, float(y.mean() - slope * x.mean())


def daily_document_counts(index: CorpusIndex, start: dt.date | None = None,
                          days: int | None = None) -> list[int]:
    """Number of documents created on each day from ``start`` (default: earliest date)."""
    dates = [d.created_at for d in index.documents.values() if d.created_at is not None]
    if not dates:
        return []
    per_day = Counter(dates)
    start = start or min(dates)
    if days is None:
        days = (max(dates) - start).days + 1
    return [per_day.get(start + dt.timedelta(days=t), 0) for t in range(max(days, 0))]
