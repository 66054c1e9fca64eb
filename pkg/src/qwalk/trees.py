"""Rooted trees, random homomorphisms into a host graph, and the
decomposition of a tree into edge-disjoint rooted pieces.

Trees are stored as a parent array in prefix-connected enumeration
order: every prefix of the vertex list spans a connected subtree
containing the root.  A random homomorphism maps the root to a chosen
host vertex and each later vertex to the next unused list entry of its
parent's image, consuming the same per-vertex lists that drive walks.
A path tree therefore reproduces a walk exactly, seed for seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph
from .rng import DOMAIN_LIST, DOMAIN_TREE_GEN, stream
from .walks import _CHUNK, EdgeSubgraph, ListModel


class RootedTree:
    """Rooted tree as a parent array; parents[0] is -1 for the root."""

    __slots__ = ("parents", "_children", "_graph_degrees")

    def __init__(self, parents: np.ndarray):
        self.parents = parents
        self._children = None
        self._graph_degrees = None
        parents.setflags(write=False)

    @property
    def size(self) -> int:
        return len(self.parents)

    @property
    def n_edges(self) -> int:
        return len(self.parents) - 1

    def children(self) -> list[list[int]]:
        """Child lists in ascending vertex order (cached)."""
        if self._children is None:
            kids = [[] for _ in range(self.size)]
            for j, p in enumerate(self.parents[1:].tolist(), start=1):
                kids[p].append(j)
            self._children = kids
        return self._children

    @property
    def graph_degrees(self) -> np.ndarray:
        """Degree of each vertex in the tree seen as a graph."""
        if self._graph_degrees is None:
            deg = np.zeros(self.size, dtype=np.int64)
            if self.size > 1:
                np.add.at(deg, self.parents[1:], 1)
                deg[1:] += 1
            self._graph_degrees = deg
        return self._graph_degrees

    @property
    def max_degree(self) -> int:
        return int(self.graph_degrees.max()) if self.size else 0

    def depths(self) -> np.ndarray:
        d = np.zeros(self.size, dtype=np.int64)
        for j in range(1, self.size):
            d[j] = d[self.parents[j]] + 1
        return d

    def __repr__(self) -> str:
        return f"RootedTree(size={self.size})"


def build_tree(parents) -> RootedTree:
    """Validate a parent array: parents[j] must index an earlier vertex.

    The root slot accepts -1 or None.
    """
    arr = np.array([-1 if p is None else p for p in parents], dtype=np.int64)
    if len(arr) == 0:
        raise ValueError("a tree has at least its root")
    if arr[0] != -1:
        raise ValueError("parents[0] must be None or -1 for the root")
    idx = np.arange(len(arr))
    bad = np.nonzero((arr[1:] < 0) | (arr[1:] >= idx[1:]))[0]
    if len(bad):
        j = int(bad[0]) + 1
        raise ValueError(
            f"parent of vertex {j} is {int(arr[j])}; must be an earlier vertex")
    return RootedTree(arr)


def gen_path_tree(length: int) -> RootedTree:
    """Path with ``length`` edges rooted at one end."""
    parents = np.arange(-1, length, dtype=np.int64)
    return RootedTree(parents)


def gen_nary_tree(branching: int, depth: int) -> RootedTree:
    """Complete b-ary tree: every vertex above ``depth`` has b children."""
    if branching < 1 or depth < 0:
        raise ValueError("branching must be >= 1 and depth >= 0")
    parents = [np.array([-1], dtype=np.int64)]
    level_start, level_size = 0, 1
    for _ in range(depth):
        parents.append(np.repeat(
            np.arange(level_start, level_start + level_size, dtype=np.int64),
            branching))
        level_start += level_size
        level_size *= branching
    return RootedTree(np.concatenate(parents))


def gen_random_tree(n_vertices: int, max_deg: int, seed: int) -> RootedTree:
    """Random increasing tree with graph degree capped at max_deg.

    Vertex j attaches to a uniform choice among earlier vertices that
    still have degree budget.  Requires max_deg >= 2, which guarantees a
    vertex with spare capacity always exists.
    """
    if max_deg < 2:
        raise ValueError("max_deg must be at least 2")
    if n_vertices < 1:
        raise ValueError("need at least the root")
    parents = np.empty(n_vertices, dtype=np.int64)
    parents[0] = -1
    gen = stream(seed, DOMAIN_TREE_GEN, 0)
    eligible = [0]          # vertices with degree < max_deg, swap-removed
    degree = [0] * n_vertices
    u = gen.random(max(n_vertices - 1, 1))
    for j in range(1, n_vertices):
        pick = int(u[j - 1] * len(eligible))
        p = eligible[pick]
        parents[j] = p
        degree[p] += 1
        degree[j] = 1
        if degree[p] == max_deg:
            # only the picked vertex can fill up, so swap-remove in place
            eligible[pick] = eligible[-1]
            eligible.pop()
        eligible.append(j)
    return RootedTree(parents)


@dataclass
class TreeHomomorphism:
    """An edge-preserving map of a rooted tree into a host graph."""

    tree: RootedTree
    host: Graph
    image: np.ndarray

    def is_edge_preserving(self) -> bool:
        t, g = self.tree, self.host
        if t.size <= 1:
            return True
        if g.edge_count == 0:
            return False
        heads = self.image[t.parents[1:]]
        tails = self.image[1:]
        codes = np.minimum(heads, tails) * g.n + np.maximum(heads, tails)
        edge_codes = g.edge_codes()
        pos = np.minimum(np.searchsorted(edge_codes, codes), len(edge_codes) - 1)
        return bool((edge_codes[pos] == codes).all())


def random_homomorphism(g: Graph, t: RootedTree, model: ListModel,
                        root_image: int) -> TreeHomomorphism:
    """Map each vertex to the next unused list entry of its parent's image.

    Vertices are processed in enumeration order, so a path tree consumes
    entries exactly as run_walk does and yields the identical sequence.
    """
    if t.size > 1 and g.degree(root_image) == 0:
        raise ValueError(f"root image {root_image} has no neighbors")
    nbrs, deg = model._nbrs, model._deg
    gens, iters = model._gens, model._iters
    seed = model.seed
    parents = t.parents.tolist()
    img = [0] * t.size  # python ints keep the hot loop cheap
    img[0] = int(root_image)
    for j in range(1, t.size):
        x = img[parents[j]]
        it = iters[x]
        try:
            nxt = next(it)
        except (StopIteration, TypeError):
            gen = gens[x]
            if gen is None:
                gen = gens[x] = stream(seed, DOMAIN_LIST, x)
            buf = nbrs[x][(gen.random(_CHUNK) * deg[x]).astype(np.int64)]
            it = iters[x] = iter(buf.tolist())
            nxt = next(it)
        img[j] = nxt
    image = np.array(img, dtype=np.int64)
    if t.size > 1:
        model.consumed += np.bincount(image[t.parents[1:]], minlength=g.n)
    return TreeHomomorphism(tree=t, host=g, image=image)


def tree_visit_counts(h: TreeHomomorphism) -> np.ndarray:
    """visits(x) = number of tree edges whose parent endpoint maps to x."""
    if h.tree.size <= 1:
        return np.zeros(h.host.n, dtype=np.int64)
    return np.bincount(h.image[h.tree.parents[1:]], minlength=h.host.n)


def image_subgraph(h: TreeHomomorphism) -> EdgeSubgraph:
    """Host edges in the image of the tree, deduplicated."""
    if h.tree.size <= 1:
        return EdgeSubgraph(h.host, np.empty(0, dtype=np.int64))
    heads = h.image[h.tree.parents[1:]]
    tails = h.image[np.arange(1, h.tree.size)]
    return EdgeSubgraph.from_pairs(h.host, heads, tails)


@dataclass
class TreeDecomposition:
    """Edge-disjoint rooted pieces covering a tree, sizes in [L, 3L]."""

    tree: RootedTree
    L: int
    pieces: list  # (root vertex, list of (parent, child) edges)


def decompose_tree(t: RootedTree, L: int) -> TreeDecomposition:
    """Split a rooted tree into edge-disjoint rooted subtrees of size
    between L and 3L.

    Each round selects the deepest surviving vertex v with at least L
    strict descendants (ties broken by smallest vertex index), then
    detaches whole branches below v in ascending child order until the
    accumulated piece has at least L edges; since every branch below v
    has at most L edges the piece stops below 2L.  When fewer than L
    edges remain they are merged into the last piece, which is re-rooted
    at the tree root (the remainder always contains it), keeping every
    size within [L, 3L].
    """
    if L < 1:
        raise ValueError("L must be positive")
    if L > t.n_edges:
        raise ValueError(f"L={L} exceeds the tree's {t.n_edges} edges")
    n = t.size
    parents = t.parents
    children = [list(c) for c in t.children()]
    alive = np.ones(n, dtype=bool)
    pieces = []

    def subtree_edges(top: int) -> list:
        """(parent, child) edges below ``top`` in preorder, ascending children."""
        out = []
        stack = [top]
        while stack:
            v = stack.pop()
            for c in reversed(children[v]):
                if alive[c]:
                    out.append((v, c))
                    stack.append(c)
        return out

    while True:
        desc = np.zeros(n, dtype=np.int64)
        for j in range(n - 1, 0, -1):
            if alive[j]:
                desc[parents[j]] += desc[j] + 1
        remaining = int(desc[0])
        if remaining < L:
            if remaining:
                root_piece = subtree_edges(0)
                _, last_edges = pieces[-1]
                pieces[-1] = (0, last_edges + root_piece)
                for _, c in root_piece:
                    alive[c] = False
            break
        depth = np.full(n, -1, dtype=np.int64)
        depth[0] = 0
        for j in range(1, n):
            if alive[j]:
                depth[j] = depth[parents[j]] + 1
        candidates = np.nonzero(alive & (desc >= L))[0]
        v = int(candidates[np.argmax(depth[candidates])])
        got = []
        for c in children[v]:
            if not alive[c]:
                continue
            branch = [(v, c)] + subtree_edges(c)
            got.extend(branch)
            for _, w in branch:
                alive[w] = False
            if len(got) >= L:
                break
        pieces.append((v, got))
    return TreeDecomposition(tree=t, L=L, pieces=pieces)


def save_tree(t: RootedTree, path: str) -> None:
    """Text format: first line the vertex count, then "j parent(j)" lines."""
    with open(path, "w") as fh:
        fh.write(f"{t.size}\n")
        for j in range(1, t.size):
            fh.write(f"{j} {int(t.parents[j])}\n")


def load_tree(path: str) -> RootedTree:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}:1: missing vertex count")
    size = int(lines[0])
    parents = [-1] * size
    for i, line in enumerate(lines[1:], start=2):
        toks = line.split()
        if len(toks) != 2:
            raise ValueError(f"{path}:{i}: expected 'j parent'")
        parents[int(toks[0])] = int(toks[1])
    return build_tree(parents)


def save_homomorphism(h: TreeHomomorphism, path: str) -> None:
    """One "j image(j)" line per tree vertex."""
    with open(path, "w") as fh:
        for j, x in enumerate(h.image.tolist()):
            fh.write(f"{j} {x}\n")
