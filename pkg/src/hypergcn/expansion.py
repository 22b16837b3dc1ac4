"""Weighted-graph expansions of a hypergraph and symmetric normalization.

Three expansion rules turn each hyperedge into pairwise edges:

* one-edge: the single signal-extreme pair, weight w(e)/|e|
* mediators: the extreme pair plus its connections to every remaining
  vertex of the hyperedge, each pair weighted w(e)/(2|e|-3)
* clique: every pair inside the hyperedge, weighted 2 w(e)/(|e| (|e|-1))

Pair weights from distinct hyperedges accumulate. Every expansion then
sets self-loops (unit by default, or degree-restoring) and the result is
symmetrically normalized for use in graph convolutions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
import scipy.sparse as sp

from .hypergraph import Hypergraph, degrees

SelfLoopRule = Literal["unit", "degree"]


@dataclass
class WeightedGraph:
    """Accumulated symmetric weighted graph over n vertices.

    `pairs` maps an unordered vertex pair (u, v) with u < v to its
    accumulated weight; `loops` holds per-vertex self-loop weights.
    """

    n: int
    pairs: dict[tuple[int, int], float] = field(default_factory=dict)
    loops: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.loops is None:
            self.loops = np.zeros(self.n, dtype=np.float64)

    def add_pair(self, u: int, v: int, w: float) -> None:
        if u == v:
            raise ValueError(f"self-pair ({u},{v}) is not a pair entry")
        key = (u, v) if u < v else (v, u)
        self.pairs[key] = self.pairs.get(key, 0.0) + w

    @property
    def pair_count(self) -> int:
        return len(self.pairs)

    def incident_pair_weight(self) -> np.ndarray:
        """Per-vertex sum of incident pair weights (loops excluded)."""
        s = np.zeros(self.n, dtype=np.float64)
        for (u, v), w in self.pairs.items():
            s[u] += w
            s[v] += w
        return s


@dataclass(frozen=True)
class NormalizedAdjacency:
    """Symmetrically normalized adjacency D̃^{-1/2} Ã D̃^{-1/2} in CSR form."""

    n: int
    matrix: sp.csr_array

    @classmethod
    def identity(cls, n: int) -> "NormalizedAdjacency":
        """Normalized adjacency of the loops-only graph; turns the
        convolution into a plain MLP layer."""
        return cls(n=n, matrix=sp.eye_array(n, format="csr", dtype=np.float64))


def as_signal(s: np.ndarray, n: int) -> np.ndarray:
    """Coerce a per-vertex signal to a finite n x d float64 matrix."""
    arr = np.asarray(s, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] != n:
        raise ValueError(f"signal shape {arr.shape} incompatible with n={n}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal contains non-finite entries")
    return arr


def _pick_tied(tie_count: int, draw: float) -> int:
    # one uniform draw selects among tied candidates; clip guards draw == 1.0
    return min(int(draw * tie_count), tie_count - 1)


def extreme_pair(
    h: Hypergraph,
    edge_index: int,
    signal: np.ndarray,
    rng: np.random.Generator,
) -> tuple[int, int]:
    """Pair of hyperedge vertices maximizing Euclidean signal distance.

    Ties are broken uniformly at random; exactly one draw is consumed
    from `rng` per call so streams advance deterministically. Returns
    (i, j) with i < j.
    """
    e = h.edges[edge_index]
    s = as_signal(signal, h.n)
    pts = s[list(e)]
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("abk,abk->ab", diff, diff)
    iu, ju = np.triu_indices(len(e), k=1)
    vals = d2[iu, ju]
    tied = np.flatnonzero(vals == vals.max())
    pick = tied[_pick_tied(tied.size, rng.random())]
    return e[iu[pick]], e[ju[pick]]


def extreme_pairs(
    h: Hypergraph, signal: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Extreme pair of every hyperedge, vectorized over same-size groups.

    Consumes exactly one uniform draw per hyperedge in hyperedge order,
    matching a sequence of `extreme_pair` calls draw for draw.
    """
    s = as_signal(signal, h.n)
    m = h.m
    out = np.zeros((m, 2), dtype=np.int64)
    if m == 0:
        return out
    draws = rng.random(m)
    by_size: dict[int, list[int]] = {}
    for idx, e in enumerate(h.edges):
        by_size.setdefault(len(e), []).append(idx)
    for size, idxs in by_size.items():
        members = np.array([h.edges[i] for i in idxs], dtype=np.int64)
        pts = s[members]  # (g, size, d)
        diff = pts[:, :, None, :] - pts[:, None, :, :]
        d2 = np.einsum("gabk,gabk->gab", diff, diff)
        iu, ju = np.triu_indices(size, k=1)
        vals = d2[:, iu, ju]  # (g, size*(size-1)/2)
        best = vals.max(axis=1, keepdims=True)
        for row, idx in enumerate(idxs):
            tied = np.flatnonzero(vals[row] == best[row, 0])
            pick = tied[_pick_tied(tied.size, draws[idx])]
            out[idx, 0] = members[row, iu[pick]]
            out[idx, 1] = members[row, ju[pick]]
    return out


def _finish_loops(g: WeightedGraph, h: Hypergraph, rule: SelfLoopRule) -> None:
    if rule == "unit":
        g.loops = np.ones(h.n, dtype=np.float64)
    elif rule == "degree":
        # restore each vertex degree to d_v; residual is non-negative for
        # all three rules because a hyperedge contributes at most w(e)
        # to any one of its vertices
        g.loops = np.maximum(degrees(h) - g.incident_pair_weight(), 0.0)
    else:
        raise ValueError(f"unknown self-loop rule {rule!r}")


def expand_one_edge(
    h: Hypergraph,
    signal: np.ndarray,
    rng: np.random.Generator,
    self_loops: SelfLoopRule = "unit",
) -> WeightedGraph:
    """Represent each hyperedge by its single extreme pair, weight w(e)/|e|."""
    g = WeightedGraph(n=h.n)
    pairs = extreme_pairs(h, signal, rng)
    for idx, (e, w) in enumerate(zip(h.edges, h.weights)):
        g.add_pair(int(pairs[idx, 0]), int(pairs[idx, 1]), w / len(e))
    _finish_loops(g, h, self_loops)
    return g


def expand_mediators(
    h: Hypergraph,
    signal: np.ndarray,
    rng: np.random.Generator,
    self_loops: SelfLoopRule = "unit",
) -> WeightedGraph:
    """Connect each hyperedge's extreme pair and route every remaining
    vertex through both extremes, each pair weighted w(e)/(2|e|-3).

    Emits max(1, 2|e|-3) pairs per hyperedge; the per-hyperedge weight
    mass always sums to w(e).
    """
    g = WeightedGraph(n=h.n)
    pairs = extreme_pairs(h, signal, rng)
    for idx, (e, w) in enumerate(zip(h.edges, h.weights)):
        i, j = int(pairs[idx, 0]), int(pairs[idx, 1])
        if len(e) == 2:
            g.add_pair(i, j, w)
            continue
        wt = w / (2 * len(e) - 3)
        g.add_pair(i, j, wt)
        for k in e:
            if k != i and k != j:
                g.add_pair(i, k, wt)
                g.add_pair(j, k, wt)
    _finish_loops(g, h, self_loops)
    return g


def expand_clique(
    h: Hypergraph, self_loops: SelfLoopRule = "unit"
) -> WeightedGraph:
    """Replace each hyperedge by a clique, every pair weighted
    2 w(e)/(|e| (|e|-1)). Signal-independent."""
    g = WeightedGraph(n=h.n)
    for e, w in zip(h.edges, h.weights):
        wt = 2.0 * w / (len(e) * (len(e) - 1))
        for u, v in itertools.combinations(e, 2):
            g.add_pair(u, v, wt)
    _finish_loops(g, h, self_loops)
    return g


def normalize(g: WeightedGraph) -> NormalizedAdjacency:
    """Symmetric normalization D̃^{-1/2} Ã D̃^{-1/2} of pair weights plus
    self-loops. No extra identity is added; the expansion already set the
    self-loops. Raises on any vertex with zero total degree."""
    k = len(g.pairs)
    rows = np.empty(2 * k + g.n, dtype=np.int64)
    cols = np.empty(2 * k + g.n, dtype=np.int64)
    vals = np.empty(2 * k + g.n, dtype=np.float64)
    for t, ((u, v), w) in enumerate(g.pairs.items()):
        rows[2 * t], cols[2 * t], vals[2 * t] = u, v, w
        rows[2 * t + 1], cols[2 * t + 1], vals[2 * t + 1] = v, u, w
    rows[2 * k :] = np.arange(g.n)
    cols[2 * k :] = np.arange(g.n)
    vals[2 * k :] = g.loops

    deg = np.zeros(g.n, dtype=np.float64)
    np.add.at(deg, rows, vals)
    bad = np.flatnonzero(deg <= 0.0)
    if bad.size:
        raise ValueError(
            f"isolated vertex with no self-loop: {bad[0]}"
            + (f" (and {bad.size - 1} more)" if bad.size > 1 else "")
        )
    dinv = 1.0 / np.sqrt(deg)
    scaled = vals * dinv[rows] * dinv[cols]
    mat = sp.coo_array((scaled, (rows, cols)), shape=(g.n, g.n)).tocsr()
    return NormalizedAdjacency(n=g.n, matrix=mat)
