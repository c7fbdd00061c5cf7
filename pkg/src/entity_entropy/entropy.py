"""Entity entropy and the cross-sectional corpus analytics built on it.

An entity's facts define a distribution over documents,
``p(d) = f(d) / sum_d' f(d')``, and its entropy is the base-2 Shannon entropy
of that distribution. Zero bits means everything known about the entity sits
in one document; ``log2(M)`` bits means it is spread evenly over M documents.
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .corpus import CorpusIndex, FactTable


@dataclasses.dataclass(frozen=True)
class EntityDistribution:
    entity_id: str
    probs: Mapping[str, float]


@dataclasses.dataclass(frozen=True)
class EntropyProfile:
    entity_id: str
    category: str
    entropy_bits: float
    total_facts: int
    doc_count: int
    corpus_max_bits: float


@dataclasses.dataclass(frozen=True)
class CategoryStats:
    category: str
    mean_entropy: float
    median_entropy: float
    std_dev: float
    count: int


@dataclasses.dataclass(frozen=True)
class SizeEntropy:
    pairs: list[tuple[int, float]]
    entity_ids: list[str]
    correlation: float | None
    method: str = "spearman"


def build_distribution(table: FactTable) -> EntityDistribution:
    total = table.total
    if total < 1:
        raise ValueError(f"entity {table.entity_id!r} has no facts")
    return EntityDistribution(table.entity_id, {d: n / total for d, n in table.counts.items()})


def entropy_from_counts(counts: Iterable[float]) -> float:
    """Entropy in bits of the distribution proportional to ``counts``.

    Zero entries are ignored (0 log 0 = 0). The result is clipped to
    ``[0, log2(k)]`` for k nonzero entries to absorb rounding.
    """
    c = np.asarray([x for x in counts if x > 0], dtype=float)
    k = c.size
    if k <= 1:
        return 0.0
    p = c / c.sum()
    h = float(-(p * np.log2(p)).sum())
    return min(max(h, 0.0), math.log2(k))


def entropy(dist: EntityDistribution | Mapping[str, float] | Sequence[float]) -> float:
    """Shannon entropy (bits) of a distribution over documents."""
    if isinstance(dist, EntityDistribution):
        dist = dist.probs
    values = dist.values() if isinstance(dist, Mapping) else dist
    return entropy_from_counts(values)


def table_entropy(table: FactTable) -> float:
    return entropy_from_counts(table.counts.values())


def max_corpus_entropy(n_docs: int) -> float:
    """Largest entropy any entity can reach in a corpus of ``n_docs`` documents."""
    if n_docs < 1:
        raise ValueError("n_docs must be >= 1")
    return math.log2(n_docs)


def coverage_count(table: FactTable | Mapping[str, float], threshold: float) -> int:
    """Fewest documents whose combined facts reach ``threshold`` of the total.

    Taking documents in descending count order is optimal: any k documents
    hold at most as many facts as the k largest.
    """
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must lie in (0, 1]")
    counts = table.counts if isinstance(table, FactTable) else table
    ordered = sorted((c for c in counts.values() if c > 0), reverse=True)
    if not ordered:
        return 0
    # exact arithmetic so 19/20 >= 0.95 does not hinge on float rounding
    need = Fraction(threshold) * Fraction(sum(Fraction(c) for c in ordered))
    acc = Fraction(0)
    for k, c in enumerate(ordered, 1):
        acc += Fraction(c)
        if acc >= need:
            return k
    return len(ordered)


def coverage_rank_table(index: CorpusIndex, threshold: float = 0.95) -> list[tuple[str, int]]:
    """Entities ranked by documents needed for ``threshold`` coverage (descending)."""
    rows = [(t.entity_id, coverage_count(t, threshold)) for t in index]
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def entropy_profiles(index: CorpusIndex) -> list[EntropyProfile]:
    hmax = max_corpus_entropy(index.n_docs) if index.n_docs else 0.0
    return [EntropyProfile(t.entity_id, index.category(t.entity_id), table_entropy(t),
                           t.total, len(t), hmax) for t in index]


def lower_median(values: Sequence[float]) -> float:
    """Median taking the lower of the two middle elements for even sizes."""
    s = sorted(values)
    return float(s[(len(s) - 1) // 2])


def category_stats(index: CorpusIndex) -> list[CategoryStats]:
    """Mean / lower median / population std of entropy per category."""
    groups: dict[str, list[float]] = {}
    for t in index:
        groups.setdefault(index.category(t.entity_id), []).append(table_entropy(t))
    rows = []
    for category in sorted(groups):
        h = np.asarray(groups[category])
        rows.append(CategoryStats(category, float(h.mean()), lower_median(h),
                                  float(h.std(ddof=0)), int(h.size)))
    return rows


def correlation(x: Sequence[float], y: Sequence[float], method: str = "spearman") -> float | None:
    """Rank (or linear) correlation, ``None`` when undefined."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0 or np.ptp(y) == 0:
        return None
    if method == "spearman":
        r = stats.spearmanr(x, y).statistic
    elif method == "pearson":
        r = stats.pearsonr(x, y).statistic
    else:
        raise ValueError(f"unknown correlation method {method!r}")
    return float(np.clip(r, -1.0, 1.0))


def size_entropy_pairs(index: CorpusIndex, method: str = "spearman") -> SizeEntropy:
    ids = index.entity_ids
    pairs = [(index.tables[e].total, table_entropy(index.tables[e])) for e in ids]
    r = correlation([p[0] for p in pairs], [p[1] for p in pairs], method)
    return SizeEntropy(pairs, ids, r, method)
