"""Quasirandomness certification: discrepancy, 4-cycle counts, and
spectral bounds on the walk's transition matrix.

A graph with density rho is eps-quasirandom when every pair of vertex
sets of size at least eps*n spans within eps*|A||B| of rho*|A||B|
ordered-pair edges.  Exhaustive checking enumerates all set pairs and is
limited to tiny graphs; the sampled estimator scales but only ever
produces a lower bound on the true discrepancy, so it can refute
quasirandomness and support it statistically, never certify it.

All spectral quantities live on the transition matrix P = D^-1 A.  The
symmetrization D^-1/2 A D^-1/2 shares its spectrum, which keeps the
arithmetic real and symmetric.  Products of adjacency counts stay far
below 2**53, so float64 matrix products are exact integer arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .graph import Graph, VertexSet, connectivity_profile, density
from .rng import DOMAIN_POWER_ITER, DOMAIN_SUBSETS, stream

EXHAUSTIVE_MAX_N = 16
_BLOCK = 4096


class PowerIterationError(RuntimeError):
    """Eigenvalue iteration failed to converge; carries the last iterate."""

    def __init__(self, message: str, estimate: float, residual: float):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual


def _deviation(e, rho, size_a, size_b):
    """|e(A,B) - rho|A||B|| / (|A||B|), shared by both discrepancy paths."""
    return np.abs(e - rho * size_a * size_b) / (size_a * size_b)


def _qualifying_masks(n: int, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """All subset bitmasks of size >= eps*n, ascending, with their sizes."""
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.zeros(1 << n, dtype=np.int64)
    for j in range(n):
        sizes += (masks >> j) & 1
    keep = sizes >= math.ceil(eps * n)
    return masks[keep], sizes[keep]


def discrepancy_exhaustive(g: Graph, eps: float) -> tuple[float, tuple[VertexSet, VertexSet]]:
    """Exact maximum deviation over all qualifying set pairs, with a witness.

    Enumerates 4^n pairs, so n is capped at EXHAUSTIVE_MAX_N.  The graph
    is eps-quasirandom iff the returned maximum is below eps.  The witness
    is the first attaining pair in ascending bitmask order.
    """
    if g.n > EXHAUSTIVE_MAX_N:
        raise ValueError(
            f"exhaustive discrepancy caps at n={EXHAUSTIVE_MAX_N}; "
            "use discrepancy_sampled")
    if eps * g.n < 1:
        raise ValueError("eps*n must be at least 1")
    n = g.n
    rho = density(g)
    masks, sizes = _qualifying_masks(n, eps)
    member = ((masks[:, None] >> np.arange(n)) & 1).astype(np.float64)
    neigh_in_set = member @ g.adjacency_dense()  # rows: |N(j) & A| per j
    best = -1.0
    best_pair = (0, 0)
    for a0 in range(0, len(masks), _BLOCK):
        a1 = min(a0 + _BLOCK, len(masks))
        for b0 in range(0, len(masks), _BLOCK):
            b1 = min(b0 + _BLOCK, len(masks))
            e = neigh_in_set[a0:a1] @ member[b0:b1].T  # exact integer counts
            dev = _deviation(e, rho, sizes[a0:a1, None], sizes[None, b0:b1])
            local = float(dev.max())
            if local > best:
                ia, ib = np.unravel_index(int(dev.argmax()), dev.shape)
                best = local
                best_pair = (int(masks[a0 + ia]), int(masks[b0 + ib]))
    witness = tuple(
        VertexSet.from_iterable(n, (j for j in range(n) if mask >> j & 1))
        for mask in best_pair)
    return best, witness


def discrepancy_sampled(g: Graph, eps: float, trials: int,
                        seed: int) -> tuple[float, tuple[VertexSet, VertexSet]]:
    """Maximum deviation over sampled set pairs; a lower bound estimator.

    Sizes are uniform on [ceil(eps*n), n] and each set is a uniform
    subset of its size.  Deterministic given the seed.
    """
    if eps * g.n < 1:
        raise ValueError("eps*n must be at least 1")
    if trials < 1:
        raise ValueError("need at least one trial")
    n = g.n
    rho = density(g)
    lo = math.ceil(eps * n)
    gen = stream(seed, DOMAIN_SUBSETS, 0)
    sizes = gen.integers(lo, n + 1, size=(trials, 2))
    # dense matmul batches trials when the adjacency fits; above that,
    # gather counts row by row off the CSR arrays
    adj = g.adjacency_dense() if n <= 4096 else None
    degrees = g.degrees
    best = -1.0
    best_masks = None
    for t0 in range(0, trials, 256):
        t1 = min(t0 + 256, trials)
        block = t1 - t0
        u = gen.random((2 * block, n))
        cut = np.sort(u, axis=1)[np.arange(2 * block),
                                 sizes[t0:t1].T.reshape(-1) - 1]
        picks = u <= cut[:, None]  # uniform subsets of the drawn sizes
        amask, bmask = picks[:block], picks[block:]
        if adj is not None:
            e = ((amask.astype(np.float64) @ adj) * bmask).sum(axis=1)
        else:
            e = np.empty(block, dtype=np.float64)
            for i in range(block):
                sel = np.repeat(amask[i], degrees)
                e[i] = np.count_nonzero(bmask[i][g.indices] & sel)
        dev = _deviation(e, rho, sizes[t0:t1, 0], sizes[t0:t1, 1])
        local = float(dev.max())
        if local > best:
            i = int(dev.argmax())
            best = local
            best_masks = (amask[i].copy(), bmask[i].copy())
    witness = (VertexSet.from_mask(n, best_masks[0]),
               VertexSet.from_mask(n, best_masks[1]))
    return best, witness


def count_c4_labelled(g: Graph) -> int:
    """Labelled 4-cycles: 2 * sum over ordered pairs of C(codegree, 2)."""
    adj = g.adjacency_dense()
    codeg = adj @ adj  # exact: entries are common-neighborhood sizes
    np.fill_diagonal(codeg, 0.0)
    return int(round(float((codeg * (codeg - 1.0)).sum())))


def trace_p4(g: Graph) -> float:
    """Trace of P^4, the degree-weighted count of closed 4-walks.

    Each closed walk uvwx carries weight 1/(d(u)d(v)d(w)d(x)); the trace
    equals the sum of fourth powers of the eigenvalues of P.
    """
    deg = g.degrees
    if g.n and deg.min() == 0:
        raise ValueError("transition matrix undefined with isolated vertices")
    s = 1.0 / np.sqrt(deg.astype(np.float64))
    m = g.adjacency_dense() * s[:, None] * s[None, :]
    m2 = m @ m
    return float((m2 * m2).sum())


def lambda_bound_from_trace(g: Graph) -> float:
    """Certified upper bound on lambda = max(|lambda_2|, |lambda_n|).

    Uses lambda^4 <= trace(P^4) - 1, valid when the walk is irreducible
    and aperiodic.  Disconnected or bipartite graphs get lambda = 1
    (exact there, and no better bound is claimed).
    """
    connected, bipartite = connectivity_profile(g)
    if not connected or bipartite:
        return 1.0
    bound = max(trace_p4(g) - 1.0, 0.0) ** 0.25
    return min(bound, 1.0)


def _walk_matvec(g: Graph, s: np.ndarray, x: np.ndarray) -> np.ndarray:
    """y = D^-1/2 A D^-1/2 x via the CSR arrays; needs min degree >= 1."""
    z = (x * s)[g.indices]
    return np.add.reduceat(z, g.indptr[:-1]) * s


def lambda_estimate(g: Graph, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """lambda via power iteration with the known top eigenvector deflated.

    The top eigenvector of the symmetrized walk matrix has entries
    proportional to sqrt(d(v)); it is projected out every iteration so
    the dominant remaining eigenvalue is lambda.  Converges when the
    symmetric residual drops below tol, which certifies the estimate is
    within tol of a true eigenvalue.
    """
    connected, bipartite = connectivity_profile(g)
    if not connected:
        raise ValueError("lambda estimation requires a connected graph")
    if bipartite:
        raise ValueError("lambda estimation requires a non-bipartite graph")
    deg = g.degrees.astype(np.float64)
    s = 1.0 / np.sqrt(deg)
    top = np.sqrt(deg)
    top /= np.linalg.norm(top)
    x = stream(0, DOMAIN_POWER_ITER, 0).random(g.n) - 0.5
    x -= (top @ x) * top
    x /= np.linalg.norm(x)
    theta = 0.0
    residual = np.inf
    for _ in range(max_iter):
        y = _walk_matvec(g, s, x)
        y -= (top @ y) * top
        theta = float(x @ y)
        residual = float(np.linalg.norm(y - theta * x))
        if residual <= tol:
            return abs(theta)
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0  # deflated operator annihilated x: spectrum is {0}
        x = y / norm
    raise PowerIterationError(
        f"no convergence after {max_iter} iterations (residual {residual:.3e})",
        estimate=abs(theta), residual=residual)


@dataclass
class QuasirandomnessReport:
    """Certification output for one graph at one eps target."""

    rho: float
    eps_target: float
    discrepancy: float
    method: str                    # "exhaustive" | "sampled"
    pairs_checked: int
    c4_labelled: int
    trace_p4: float | None
    lambda_bound: float
    lambda_estimate: float | None
    connected: bool
    bipartite: bool

    @property
    def quasirandom(self) -> bool:
        """Whether the measured discrepancy stays below the eps target."""
        return self.discrepancy < self.eps_target

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def certify(g: Graph, eps: float, trials: int = 2000, seed: int = 0,
            exhaustive: bool = False, tol: float = 1e-8,
            max_iter: int = 2000) -> QuasirandomnessReport:
    """Run the full certification battery and collect a report.

    The eigenvalue estimate is best-effort: graphs with clustered
    spectra may not converge within max_iter, in which case the report
    carries null there and the certified trace bound stands alone.
    """
    connected, bipartite = connectivity_profile(g)
    if exhaustive:
        disc, _ = discrepancy_exhaustive(g, eps)
        masks, _ = _qualifying_masks(g.n, eps)
        method, pairs = "exhaustive", len(masks) ** 2
    else:
        disc, _ = discrepancy_sampled(g, eps, trials, seed)
        method, pairs = "sampled", trials
    degenerate = not connected or bipartite
    tr = trace_p4(g) if g.n and g.degrees.min() > 0 else None
    lam_est = None
    if not degenerate:
        try:
            lam_est = lambda_estimate(g, tol=tol, max_iter=max_iter)
        except PowerIterationError:
            lam_est = None
    return QuasirandomnessReport(
        rho=density(g),
        eps_target=eps,
        discrepancy=disc,
        method=method,
        pairs_checked=pairs,
        c4_labelled=count_c4_labelled(g),
        trace_p4=tr,
        lambda_bound=lambda_bound_from_trace(g),
        lambda_estimate=lam_est,
        connected=connected,
        bipartite=bipartite,
    )
