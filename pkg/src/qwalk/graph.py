"""Immutable undirected simple graphs in compressed adjacency form.

A ``Graph`` stores sorted per-vertex neighbor lists in CSR layout
(``indptr``/``indices``) with 64-bit counts throughout.  Instances are
frozen after construction, so any number of readers may share one.
Generators are pure functions of their arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import DOMAIN_GNP, uniform_words


class Graph:
    """Undirected simple graph on vertices 0 .. n-1.

    Invariants: symmetric adjacency, no self-loops, no duplicate
    neighbors, and sum of degrees equal to twice ``edge_count``.
    """

    __slots__ = ("n", "indptr", "indices", "edge_count", "_edge_codes")

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.edge_count = int(len(indices) // 2)
        self._edge_codes = None
        indptr.setflags(write=False)
        indices.setflags(write=False)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of v (read-only view)."""
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        row = self.neighbors(u)
        i = np.searchsorted(row, v)
        return bool(i < len(row) and row[i] == v)

    def edge_array(self) -> np.ndarray:
        """All edges as an (m, 2) array with u < v, lexicographically sorted."""
        codes = self.edge_codes()
        return np.column_stack((codes // self.n, codes % self.n))

    def edge_codes(self) -> np.ndarray:
        """Edges packed as u * n + v with u < v, sorted (cached)."""
        if self._edge_codes is None:
            src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
            mask = src < self.indices
            codes = src[mask] * self.n + self.indices[mask]
            codes.sort()
            codes.setflags(write=False)
            self._edge_codes = codes
        return self._edge_codes

    def adjacency_dense(self, dtype=np.float64) -> np.ndarray:
        """Dense adjacency matrix; intended for n at desk scale only."""
        a = np.zeros((self.n, self.n), dtype=dtype)
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        a[src, self.indices] = 1
        return a

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.edge_count})"


@dataclass(frozen=True)
class VertexSet:
    """Subset of {0, ..., n-1} with bitset membership semantics."""

    n: int
    members: frozenset

    def __post_init__(self):
        if self.members and (min(self.members) < 0 or max(self.members) >= self.n):
            raise ValueError("vertex id out of range for VertexSet")

    @classmethod
    def from_iterable(cls, n: int, ids) -> "VertexSet":
        return cls(n, frozenset(int(v) for v in ids))

    @classmethod
    def from_mask(cls, n: int, mask: np.ndarray) -> "VertexSet":
        return cls(n, frozenset(int(v) for v in np.nonzero(mask)[0]))

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls(n, frozenset(range(n)))

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, v: int) -> bool:
        return v in self.members

    def bool_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        if self.members:
            mask[sorted(self.members)] = True
        return mask

    def complement(self) -> "VertexSet":
        return VertexSet(self.n, frozenset(range(self.n)) - self.members)


@dataclass(frozen=True)
class DegreeProfile:
    """Density and the set of degree-balanced vertices at a given epsilon."""

    rho: float
    balanced: VertexSet
    epsilon: float


def build_graph(n: int, edges) -> Graph:
    """Build a Graph from unordered vertex pairs; duplicates collapse.

    Rejects self-loops and out-of-range endpoints.
    """
    if n < 0:
        raise ValueError("vertex count must be non-negative")
    pairs = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64)
    if pairs.size == 0:
        pairs = pairs.reshape(0, 2)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("edges must be pairs of vertex ids")
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        bad = pairs[(pairs < 0).any(1) | (pairs >= n).any(1)][0]
        raise ValueError(f"edge endpoint out of range: {tuple(bad)} with n={n}")
    if pairs.size and (pairs[:, 0] == pairs[:, 1]).any():
        v = int(pairs[pairs[:, 0] == pairs[:, 1]][0, 0])
        raise ValueError(f"self-loop rejected at vertex {v}")
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    codes = np.unique(lo * n + hi)
    lo, hi = codes // n, codes % n
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return Graph(n, np.cumsum(indptr), dst)


def edges_between(g: Graph, a: VertexSet, b: VertexSet) -> int:
    """Ordered-pair edge count e(A, B) = |{(a, b) in A x B : ab in E}|.

    Counts ordered pairs, so an edge with both endpoints in the
    intersection contributes 2.
    """
    if a.n != g.n or b.n != g.n:
        raise ValueError("vertex sets must live on the graph's vertex range")
    amask, bmask = a.bool_mask(), b.bool_mask()
    sel = np.repeat(amask, g.degrees)
    return int(np.count_nonzero(bmask[g.indices] & sel))


def density(g: Graph) -> float:
    """Edge density e(G) / C(n, 2)."""
    if g.n < 2:
        raise ValueError("density requires at least 2 vertices")
    return g.edge_count / (g.n * (g.n - 1) / 2)


def balanced_vertices(g: Graph, eps: float) -> DegreeProfile:
    """Vertices whose degree is within eps*n of rho*n."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    rho = density(g)
    mask = np.abs(g.degrees - rho * g.n) <= eps * g.n
    return DegreeProfile(rho=rho, balanced=VertexSet.from_mask(g.n, mask), epsilon=eps)


def gen_gnp(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each pair present independently with probability p.

    The draw for pair (u, v), u < v, is word v-u-1 of the stream keyed
    (seed, GNP domain, u), so the pair stream is replayable per row.
    """
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    rows = []
    for u in range(n - 1):
        draws = uniform_words(seed, DOMAIN_GNP, u, 0, n - u - 1) < p
        vs = np.nonzero(draws)[0].astype(np.int64) + u + 1
        if len(vs):
            rows.append(np.column_stack((np.full(len(vs), u, dtype=np.int64), vs)))
    edges = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
    return build_graph(n, edges)


def gen_complete(n: int) -> Graph:
    u, v = np.triu_indices(n, k=1)
    return build_graph(n, np.column_stack((u, v)).astype(np.int64))


def small_clique_size(n: int, eps: float) -> int:
    """Order ceil(eps^2 * n / 2) of the two-clique host's small side."""
    # round before the ceiling so 0.2**2 * 100 / 2 counts as exactly 2
    return math.ceil(round(eps * eps * n / 2, 9))


def gen_two_clique_bridge(n: int, eps: float) -> Graph:
    """Two disjoint cliques joined by a single edge.

    The small clique has ceil(eps^2 * n / 2) vertices 0 .. s-1, the large
    clique the rest; the bridge joins the lowest-id vertex of each.
    """
    s = small_clique_size(n, eps)
    if s < 2:
        raise ValueError(f"small clique would have {s} < 2 vertices")
    if n - s < 2:
        raise ValueError("large clique needs at least 2 vertices")
    iu, iv = np.triu_indices(s, k=1)
    ju, jv = np.triu_indices(n - s, k=1)
    edges = np.concatenate([
        np.column_stack((iu, iv)),
        np.column_stack((ju + s, jv + s)),
        np.array([[0, s]]),
    ]).astype(np.int64)
    return build_graph(n, edges)


def connectivity_profile(g: Graph) -> tuple[bool, bool]:
    """(connected, bipartite) via breadth-first 2-coloring.

    Bipartiteness is reported for the whole graph (all components).
    """
    n = g.n
    if n == 0:
        return True, True
    color = np.full(n, -1, dtype=np.int8)
    components = 0
    for root in range(n):
        if color[root] >= 0:
            continue
        components += 1
        color[root] = 0
        frontier = np.array([root], dtype=np.int64)
        c = 0
        while len(frontier):
            c ^= 1
            starts, stops = g.indptr[frontier], g.indptr[frontier + 1]
            slots = np.concatenate([np.arange(a, b) for a, b in zip(starts, stops)])
            nbrs = np.unique(g.indices[slots])
            frontier = nbrs[color[nbrs] < 0]
            color[frontier] = c
    src = np.repeat(np.arange(n, dtype=np.int64), g.degrees)
    bipartite = bool((color[src] != color[g.indices]).all()) if g.edge_count else True
    return components <= 1, bipartite


def save_graph(g: Graph, path: str) -> None:
    """Plain text: first line "n m", then one "u v" line per edge, u < v."""
    with open(path, "w") as fh:
        fh.write(f"{g.n} {g.edge_count}\n")
        for u, v in g.edge_array():
            fh.write(f"{u} {v}\n")


def load_graph(path: str) -> Graph:
    """Load the text format written by save_graph; violations name the line."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}:1: missing header line 'n m'")
    head = lines[0].split()
    if len(head) != 2 or not all(t.lstrip("-").isdigit() for t in head):
        raise ValueError(f"{path}:1: header must be 'n m', got {lines[0]!r}")
    n, m = int(head[0]), int(head[1])
    if len(lines) - 1 != m:
        raise ValueError(f"{path}: header promises {m} edges, found {len(lines) - 1}")
    edges = np.empty((m, 2), dtype=np.int64)
    for i, line in enumerate(lines[1:], start=2):
        toks = line.split()
        if len(toks) != 2 or not all(t.lstrip("-").isdigit() for t in toks):
            raise ValueError(f"{path}:{i}: expected 'u v', got {line!r}")
        u, v = int(toks[0]), int(toks[1])
        if not u < v:
            raise ValueError(f"{path}:{i}: endpoints must satisfy u < v, got {u} {v}")
        if v >= n or u < 0:
            raise ValueError(f"{path}:{i}: endpoint out of range for n={n}")
        edges[i - 2] = (u, v)
    return build_graph(n, edges)
