"""Independent reference computations used only by the tests."""

import itertools
import math
from fractions import Fraction


def entropy_direct(counts):
    """Shannon entropy in bits straight from the definition, in plain Python."""
    total = sum(counts)
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def coverage_bruteforce(counts, threshold):
    """Smallest subset size whose share reaches ``threshold``, by enumeration."""
    counts = [c for c in counts if c > 0]
    total = sum(counts)
    need = Fraction(threshold) * total
    for k in range(1, len(counts) + 1):
        if any(sum(s) >= need for s in itertools.combinations(counts, k)):
            return k
    return len(counts)


def spearman_rank_formula(x, y):
    """1 - 6 sum d^2 / (n (n^2 - 1)); valid for tie-free data."""
    n = len(x)
    rx = {v: i for i, v in enumerate(sorted(x))}
    ry = {v: i for i, v in enumerate(sorted(y))}
    d2 = sum((rx[a] - ry[b]) ** 2 for a, b in zip(x, y))
    return 1 - 6 * d2 / (n * (n * n - 1))


def shared_docs_bruteforce(doc_sets):
    """All pairwise intersections, computed pair by pair."""
    ids = sorted(doc_sets)
    out = {}
    for a, b in itertools.combinations(ids, 2):
        w = len(doc_sets[a] & doc_sets[b])
        if w:
            out[frozenset((a, b))] = w
    return out


def least_squares(xs, ys):
    """Slope/intercept by solving the 2x2 normal equations explicitly."""
    n = len(xs)
    sx, sy = sum(xs), sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    det = n * sxx - sx * sx
    slope = (n * sxy - sx * sy) / det
    intercept = (sxx * sy - sx * sxy) / det
    return slope, intercept
