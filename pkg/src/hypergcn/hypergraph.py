"""Canonical hypergraph container with degree and size bookkeeping.

Vertices are dense 0-based integers. Hyperedges are stored as sorted
tuples of distinct vertex ids; duplicate hyperedges are allowed and their
contributions accumulate in every expansion. Instances are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Hypergraph:
    """Undirected hypergraph H = (V, E) with per-hyperedge positive weights."""

    n: int
    edges: tuple[tuple[int, ...], ...]
    weights: np.ndarray

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Iterable[int]],
        weights: Sequence[float] | None = None,
    ) -> "Hypergraph":
        """Build a hypergraph, canonicalizing each hyperedge to a sorted
        tuple of distinct ids. Weights default to 1.0 per hyperedge."""
        canon = tuple(tuple(sorted({int(v) for v in e})) for e in edges)
        if weights is None:
            w = np.ones(len(canon), dtype=np.float64)
        else:
            w = np.asarray(weights, dtype=np.float64).copy()
        return cls(n=int(n), edges=canon, weights=w)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge_sizes(self) -> np.ndarray:
        return np.array([len(e) for e in self.edges], dtype=np.int64)


def validate(h: Hypergraph) -> list[str]:
    """Check every structural invariant of `h`.

    Returns an empty list when the hypergraph is valid, otherwise one
    message per violation, each naming the offending hyperedge index.
    Downstream expansions are guaranteed to succeed on a valid hypergraph.
    """
    problems: list[str] = []
    if h.n < 0:
        problems.append(f"vertex count {h.n} is negative")
    if len(h.weights) != len(h.edges):
        problems.append(
            f"{len(h.weights)} weights for {len(h.edges)} hyperedges"
        )
    for idx, e in enumerate(h.edges):
        if len(e) < 2:
            problems.append(f"hyperedge {idx}: size {len(e)} < 2")
        if tuple(sorted(set(e))) != e:
            problems.append(f"hyperedge {idx}: ids not sorted and distinct")
        for v in e:
            if not 0 <= v < h.n:
                problems.append(
                    f"hyperedge {idx}: vertex {v} out of range [0, {h.n})"
                )
    for idx, w in enumerate(h.weights[: len(h.edges)]):
        if not np.isfinite(w) or w <= 0:
            problems.append(f"hyperedge {idx}: weight {w} not finite and > 0")
    return problems


def degrees(h: Hypergraph) -> np.ndarray:
    """Vertex degrees d_v = sum of w(e) over hyperedges containing v."""
    d = np.zeros(h.n, dtype=np.float64)
    for e, w in zip(h.edges, h.weights):
        d[list(e)] += w
    return d


def size_counts(h: Hypergraph) -> tuple[int, int, int]:
    """Aggregate hyperedge-size statistics (N, N_m, N_c).

    N is the total incidence count, N_m the pair budget of the mediator
    expansion, N_c the pair budget of the clique expansion:

        N   = sum |e|
        N_m = sum (2|e| - 3)
        N_c = sum |e| (|e| - 1) / 2

    For every hyperedge of size >= 2, 2|e|-3 <= |e|(|e|-1)/2 with
    equality exactly at sizes 2 and 3, hence N_m <= N_c.
    """
    sizes = [len(e) for e in h.edges]
    n_inc = sum(sizes)
    n_med = sum(2 * s - 3 for s in sizes)
    n_clq = sum(s * (s - 1) // 2 for s in sizes)
    return n_inc, n_med, n_clq
