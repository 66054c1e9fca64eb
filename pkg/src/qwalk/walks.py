"""Per-vertex list model, coupled random walks, and visit statistics.

Each vertex v owns an infinite virtual list of uniform neighbor choices;
entry j is a pure function of (model seed, v, j).  A walk leaving v for
the j-th time takes entry j, so a walk and the prefix subgraphs built
from the same seed realize one coupled experiment: the traversed
subgraph is sandwiched between two prefix subgraphs exactly.

A "visit" is a departure: visit counts run over walk positions
0 .. steps-1, one list entry consumed per visit, so counts sum to the
number of steps and the terminal vertex consumes nothing.

Walks are inherently sequential; independent trials parallelize over
derived seeds and all aggregation here is order-independent.
"""

from __future__ import annotations

import gzip
from dataclasses import dataclass, field

import numpy as np

from .graph import Graph, VertexSet, balanced_vertices, density
from .rng import DOMAIN_LIST, DOMAIN_STEP_LAW, stream, uniform_words

_CHUNK = 2048


class ListModel:
    """Seeded per-vertex streams of uniform neighbor choices.

    ``entry``/``entries`` replay list values without touching the
    consumption state; walks and tree embeddings consume entries in
    order through the buffered iterators and advance ``consumed``.
    """

    def __init__(self, graph: Graph, seed: int):
        self.graph = graph
        self.seed = int(seed)
        self.consumed = np.zeros(graph.n, dtype=np.int64)
        self._nbrs = [graph.indices[graph.indptr[v]:graph.indptr[v + 1]]
                      for v in range(graph.n)]
        self._deg = graph.degrees.astype(np.float64)
        self._gens = [None] * graph.n   # sequential stream per vertex
        self._iters = [None] * graph.n  # buffered unconsumed entries

    def entry(self, v: int, j: int) -> int:
        """The j-th (1-indexed) list entry of v, replayed statelessly."""
        if j < 1:
            raise ValueError("list entries are 1-indexed")
        return int(self.entries(v, j)[-1])

    def entries(self, v: int, count: int) -> np.ndarray:
        """Entries 1 .. count of the list of v, replayed statelessly."""
        d = self.graph.degree(v)
        if d == 0:
            if count == 0:
                return np.empty(0, dtype=np.int64)
            raise ValueError(f"vertex {v} has no neighbors")
        u = uniform_words(self.seed, DOMAIN_LIST, v, 0, count)
        return self._nbrs[v][(u * d).astype(np.int64)]

    def _refill(self, v: int):
        gen = self._gens[v]
        if gen is None:
            gen = self._gens[v] = stream(self.seed, DOMAIN_LIST, v)
        buf = self._nbrs[v][(gen.random(_CHUNK) * self._deg[v]).astype(np.int64)]
        it = self._iters[v] = iter(buf.tolist())
        return it

    def next_entry(self, v: int) -> int:
        """Consume and return the next unused entry of the list of v."""
        if self.graph.degree(v) == 0:
            raise ValueError(f"vertex {v} has no neighbors")
        it = self._iters[v]
        try:
            nxt = next(it)
        except (StopIteration, TypeError):
            nxt = next(self._refill(v))
        self.consumed[v] += 1
        return nxt


@dataclass
class WalkTrace:
    """A realized walk: sequence W_0 .. W_l plus departure counts."""

    graph: Graph
    start: int
    steps: int
    sequence: np.ndarray
    _visits: np.ndarray | None = field(default=None, repr=False)

    @property
    def visit_counts(self) -> np.ndarray:
        """X_v = number of departures from v (positions 0 .. steps-1)."""
        if self._visits is None:
            self._visits = np.bincount(self.sequence[:-1], minlength=self.graph.n)
        return self._visits


class EdgeSubgraph:
    """A deduplicated set of edges of a parent graph."""

    __slots__ = ("parent", "codes")

    def __init__(self, parent: Graph, codes: np.ndarray):
        self.parent = parent
        self.codes = codes  # sorted unique u * n + v with u < v

    @classmethod
    def from_pairs(cls, parent: Graph, us: np.ndarray, vs: np.ndarray) -> "EdgeSubgraph":
        lo = np.minimum(us, vs).astype(np.int64)
        hi = np.maximum(us, vs).astype(np.int64)
        return cls(parent, np.unique(lo * parent.n + hi))

    def __len__(self) -> int:
        return len(self.codes)

    def __contains__(self, edge) -> bool:
        u, v = min(edge), max(edge)
        code = u * self.parent.n + v
        i = np.searchsorted(self.codes, code)
        return bool(i < len(self.codes) and self.codes[i] == code)

    def edge_array(self) -> np.ndarray:
        return np.column_stack((self.codes // self.parent.n,
                                self.codes % self.parent.n))

    def issubset(self, other: "EdgeSubgraph") -> bool:
        if len(self.codes) == 0:
            return True
        if len(other.codes) == 0:
            return False
        pos = np.minimum(np.searchsorted(other.codes, self.codes),
                         len(other.codes) - 1)
        return bool((other.codes[pos] == self.codes).all())

    def to_graph(self) -> Graph:
        from .graph import build_graph
        return build_graph(self.parent.n, self.edge_array())


@dataclass(frozen=True)
class Distribution:
    """Probabilities over the vertices of a graph, summing to 1."""

    probs: np.ndarray

    def __post_init__(self):
        if (self.probs < 0).any():
            raise ValueError("negative probability entry")
        if abs(float(self.probs.sum()) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")

    @classmethod
    def point_mass(cls, n: int, v: int) -> "Distribution":
        p = np.zeros(n)
        p[v] = 1.0
        return cls(p)

    @classmethod
    def from_counts(cls, counts: np.ndarray) -> "Distribution":
        total = counts.sum()
        if total <= 0:
            raise ValueError("empty counts")
        return cls(counts / total)


def stationary(g: Graph) -> Distribution:
    """pi_v = d(v) / 2e(G), the walk's equilibrium law."""
    if g.edge_count == 0:
        raise ValueError("stationary distribution undefined on an edgeless graph")
    return Distribution(g.degrees / (2.0 * g.edge_count))


def balanced_start(g: Graph, eps: float) -> int:
    """Lowest-id vertex with degree within eps*n of rho*n."""
    profile = balanced_vertices(g, eps)
    if not profile.balanced.members:
        raise ValueError("graph has no balanced vertex at this eps")
    return min(profile.balanced.members)


def run_walk(g: Graph, model: ListModel, start: int, steps: int) -> WalkTrace:
    """Walk ``steps`` edges from ``start``, consuming the model's lists.

    Step i+1 takes the next unused entry of the current vertex's list,
    so repeated runs against one model continue its streams while a
    fresh model with the same seed reproduces the trace exactly.
    """
    if g.degree(start) == 0:
        raise ValueError(f"start vertex {start} has no neighbors")
    nbrs, deg = model._nbrs, model._deg
    gens, iters = model._gens, model._iters
    seed = model.seed
    cur = int(start)
    seq = [cur] * (steps + 1)  # python ints keep the hot loop cheap
    i = 1
    for _ in range(steps):
        it = iters[cur]
        try:
            nxt = next(it)
        except (StopIteration, TypeError):
            gen = gens[cur]
            if gen is None:
                gen = gens[cur] = stream(seed, DOMAIN_LIST, cur)
            buf = nbrs[cur][(gen.random(_CHUNK) * deg[cur]).astype(np.int64)]
            it = iters[cur] = iter(buf.tolist())
            nxt = next(it)
        seq[i] = nxt
        i += 1
        cur = nxt
    sequence = np.array(seq, dtype=np.int64)
    model.consumed += np.bincount(sequence[:-1], minlength=g.n)
    return WalkTrace(graph=g, start=int(start), steps=int(steps), sequence=sequence)


def walk_subgraph(trace: WalkTrace) -> EdgeSubgraph:
    """Edges traversed by the walk, deduplicated."""
    return EdgeSubgraph.from_pairs(trace.graph, trace.sequence[:-1], trace.sequence[1:])


def list_subgraph(g: Graph, model: ListModel, alpha: float) -> EdgeSubgraph:
    """Prefix subgraph: uv kept iff u is among the first floor(alpha*d(v))
    entries of the list of v, or vice versa.

    Replayed from the model's seed, independent of any walk's consumption.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    us, vs = [], []
    for v in range(g.n):
        k = int(alpha * g.degree(v))
        if k <= 0:
            continue
        named = model.entries(v, k)
        us.append(np.full(len(named), v, dtype=np.int64))
        vs.append(named)
    if not us:
        return EdgeSubgraph(g, np.empty(0, dtype=np.int64))
    return EdgeSubgraph.from_pairs(g, np.concatenate(us), np.concatenate(vs))


def sandwich_bounds(trace: WalkTrace, g: Graph) -> tuple[float, float]:
    """(alpha_lo, alpha_hi) = extremes of X_v / d(v) over vertices.

    For the model that drove the walk, list_subgraph(alpha_lo) is
    contained in the traversed subgraph, which is contained in
    list_subgraph(alpha_hi); the containments are exact, not asymptotic,
    because floor(alpha_lo * d(v)) <= X_v <= floor(alpha_hi * d(v)).
    """
    deg = g.degrees
    live = deg > 0
    ratios = trace.visit_counts[live] / deg[live]
    return float(ratios.min()), float(ratios.max())


def subsequence_visit_counts(trace: WalkTrace, L: int) -> np.ndarray:
    """X^(i)_v for i in [0, L): visits at positions i, i+L, i+2L, ...

    Row i counts the K = steps // L walk positions i + (j-1)L, j <= K.
    When L divides steps the rows sum to the plain visit counts; the
    trailing steps - K*L positions are truncated otherwise.
    """
    if L < 1:
        raise ValueError("L must be positive")
    if L > trace.steps:
        raise ValueError("L exceeds the walk length")
    K = trace.steps // L
    block = trace.sequence[:K * L].reshape(K, L)
    out = np.empty((L, trace.graph.n), dtype=np.int64)
    for i in range(L):
        out[i] = np.bincount(block[:, i], minlength=trace.graph.n)
    return out


def default_block_length(n: int) -> int:
    """Subsequence stride (log n)^2, natural logarithm, rounded."""
    return max(1, round(float(np.log(n)) ** 2))


def _batch_walk_positions(g: Graph, start: int, i: int, trials: int, seed: int,
                          want_all_steps: bool = False):
    """Vertices at step i for ``trials`` independent walks (vectorized).

    One seeded stream drives all trials; draws are independent across
    trials and steps, which realizes the law of W_i for fresh walks.
    """
    gen = stream(seed, DOMAIN_STEP_LAW, 0)
    cur = np.full(trials, start, dtype=np.int64)
    deg = g.degrees
    hist = [cur.copy()] if want_all_steps else None
    for _ in range(i):
        u = gen.random(trials)
        nxt = g.indices[g.indptr[cur] + (u * deg[cur]).astype(np.int64)]
        cur = nxt
        if want_all_steps:
            hist.append(cur.copy())
    return (cur, hist) if want_all_steps else cur


def empirical_step_distribution(g: Graph, start: int, i: int, trials: int,
                                seed: int) -> Distribution:
    """Monte-Carlo law of W_i over independent walks from ``start``."""
    if trials < 1:
        raise ValueError("need at least one trial")
    if g.degree(start) == 0 and i > 0:
        raise ValueError(f"start vertex {start} has no neighbors")
    where = _batch_walk_positions(g, start, i, trials, seed)
    return Distribution.from_counts(np.bincount(where, minlength=g.n))


def tv_distance(p: Distribution, q: Distribution) -> float:
    """Total variation distance, half the l1 distance."""
    if len(p.probs) != len(q.probs):
        raise ValueError("distributions live on different universes")
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def hit_probability_check(g: Graph, start: int, s: VertexSet, i: int,
                          trials: int, seed: int, *, eps: float) -> tuple[float, float]:
    """Empirical Pr(W_i in S) from a balanced start, with its lower floor.

    The floor is |S|/n - 9*sqrt(eps)/rho, valid for i >= 2 and |S| >= eps*n
    when the host is eps-quasirandom.  Rejects unbalanced starts.
    """
    rho = density(g)
    if abs(g.degree(start) - rho * g.n) > eps * g.n:
        raise ValueError(f"start vertex {start} is not balanced at eps={eps}")
    if s.size < eps * g.n:
        raise ValueError("target set smaller than eps*n")
    if i < 2:
        raise ValueError("the floor applies to steps i >= 2")
    where = _batch_walk_positions(g, start, i, trials, seed)
    empirical = float(s.bool_mask()[where].mean())
    floor = s.size / g.n - 9.0 * np.sqrt(eps) / rho
    return empirical, float(floor)


def save_trace(trace: WalkTrace, path: str) -> None:
    """Text format: "start steps" then the vertex sequence; .gz compresses."""
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "wt") as fh:
        fh.write(f"{trace.start} {trace.steps}\n")
        fh.write(" ".join(map(str, trace.sequence.tolist())))
        fh.write("\n")


def load_trace(g: Graph, path: str) -> WalkTrace:
    opener = gzip.open if path.endswith(".gz") else open
    with opener(path, "rt") as fh:
        head = fh.readline().split()
        start, steps = int(head[0]), int(head[1])
        seq = np.array(fh.readline().split(), dtype=np.int64)
    if len(seq) != steps + 1:
        raise ValueError(f"{path}: sequence length {len(seq)} != steps+1")
    return WalkTrace(graph=g, start=start, steps=steps, sequence=seq)
