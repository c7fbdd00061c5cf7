"""Entity-entity graph of shared documents."""

from __future__ import annotations

import dataclasses
from collections import defaultdict
from typing import Mapping, Sequence

import numpy as np

from .corpus import CorpusIndex


@dataclasses.dataclass(frozen=True)
class OverlapGraph:
    """Weighted undirected graph; each edge stored once as ``(a, b)`` with a before b in node order.

    Nodes are ordered by number of associated documents (descending), ties by id.
    """

    nodes: tuple[str, ...]
    edges: Mapping[tuple[str, str], int]

    @property
    def n(self) -> int:
        return len(self.nodes)

    def weight(self, a: str, b: str) -> int:
        return self.edges.get((a, b), self.edges.get((b, a), 0))


def _order_nodes(doc_sets: Mapping[str, frozenset]) -> tuple[str, ...]:
    return tuple(sorted(doc_sets, key=lambda e: (-len(doc_sets[e]), e)))


def graph_from_doc_sets(doc_sets: Mapping[str, frozenset], min_weight: int = 1) -> OverlapGraph:
    nodes = _order_nodes(doc_sets)
    rank = {e: i for i, e in enumerate(nodes)}
    # invert to doc -> entities so cost scales with co-mentions, not n^2 pairs
    by_doc: dict[str, list[str]] = defaultdict(list)
    for e in nodes:
        for d in doc_sets[e]:
            by_doc[d].append(e)
    weights: dict[tuple[str, str], int] = defaultdict(int)
    for members in by_doc.values():
        members.sort(key=rank.__getitem__)
        for i, a in enumerate(members):
            for b in members[i + 1:]:
                weights[(a, b)] += 1
    edges = {k: w for k, w in sorted(weights.items(), key=lambda kv: (rank[kv[0][0]], rank[kv[0][1]]))
             if w >= min_weight}
    return OverlapGraph(nodes, edges)


def build_overlap(index: CorpusIndex, min_weight: int = 1) -> OverlapGraph:
    """Edge weight = number of documents both entities appear in."""
    if min_weight < 1:
        raise ValueError("min_weight must be >= 1")
    return graph_from_doc_sets({t.entity_id: t.doc_ids for t in index}, min_weight)


def connectivity(graph: OverlapGraph) -> float | None:
    """Fraction of possible node pairs joined by an edge; ``None`` for fewer than 2 nodes."""
    n = graph.n
    if n < 2:
        return None
    return len(graph.edges) / (n * (n - 1) / 2)


def top_k_subgraph(graph: OverlapGraph, k: int) -> OverlapGraph:
    if not 1 <= k <= graph.n:
        raise ValueError(f"k must lie in [1, {graph.n}], got {k}")
    keep = set(graph.nodes[:k])
    return OverlapGraph(graph.nodes[:k],
                        {e: w for e, w in graph.edges.items() if e[0] in keep and e[1] in keep})


def adjacency_matrix(graph: OverlapGraph) -> np.ndarray:
    """Dense symmetric weight matrix in node order, zero diagonal."""
    pos = {e: i for i, e in enumerate(graph.nodes)}
    mat = np.zeros((graph.n, graph.n), dtype=np.int64)
    for (a, b), w in graph.edges.items():
        mat[pos[a], pos[b]] = mat[pos[b], pos[a]] = w
    return mat


def graph_from_matrix(nodes: Sequence[str], matrix: np.ndarray) -> OverlapGraph:
    """Inverse of :func:`adjacency_matrix`."""
    nodes = tuple(nodes)
    edges = {}
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if matrix[i, j]:
                edges[(nodes[i], nodes[j])] = int(matrix[i, j])
    return OverlapGraph(nodes, edges)


def edge_list(graph: OverlapGraph) -> list[tuple[str, str, int]]:
    return [(a, b, w) for (a, b), w in graph.edges.items()]
