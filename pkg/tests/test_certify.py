"""Discrepancy, 4-cycle counting, and spectral certification, each checked
against an independent brute-force or dense-eigensolver oracle."""

import itertools

import numpy as np
import pytest

from qwalk.certify import (PowerIterationError, certify, count_c4_labelled,
                           discrepancy_exhaustive, discrepancy_sampled,
                           lambda_bound_from_trace, lambda_estimate, trace_p4)
from qwalk.graph import (build_graph, density, edges_between,
                         gen_complete, gen_gnp)


def cycle_graph(k):
    return build_graph(k, [(i, (i + 1) % k) for i in range(k)])


def brute_discrepancy(g, eps):
    """Oracle: loop over every qualifying subset pair with its own counting."""
    n = g.n
    adj = [set(g.neighbors(v).tolist()) for v in range(n)]
    rho = density(g)
    lo = -(-eps * n // 1)  # ceil
    best = 0.0
    subsets = [s for r in range(n + 1) for s in itertools.combinations(range(n), r)
               if r >= lo]
    for a in subsets:
        for b in subsets:
            e = sum(1 for x in a for y in b if y in adj[x])
            dev = abs(e - rho * len(a) * len(b)) / (len(a) * len(b))
            best = max(best, dev)
    return best


def brute_c4(g):
    """Oracle: enumerate ordered 4-tuples of distinct vertices."""
    count = 0
    for a, b, c, d in itertools.permutations(range(g.n), 4):
        if g.has_edge(a, b) and g.has_edge(b, c) and g.has_edge(c, d) \
                and g.has_edge(d, a):
            count += 1
    return count


def walk_matrix_eigs(g):
    """Oracle: dense eigenvalues of the symmetrized transition matrix."""
    a = g.adjacency_dense()
    s = 1.0 / np.sqrt(a.sum(1))
    return np.linalg.eigvalsh(a * s[:, None] * s[None, :])


class TestDiscrepancyExhaustive:
    def test_k4_witness(self):
        g = gen_complete(4)
        dev, (wa, wb) = discrepancy_exhaustive(g, 0.5)
        assert dev == 0.5
        assert wa.members == wb.members == {0, 1}

    def test_empty_graph(self):
        g = build_graph(6, [])
        dev, _ = discrepancy_exhaustive(g, 0.2)
        assert dev == 0.0

    def test_c5_matches_brute_force(self):
        g = cycle_graph(5)
        dev, _ = discrepancy_exhaustive(g, 0.2)
        assert dev == pytest.approx(brute_discrepancy(g, 0.2), abs=1e-12)

    def test_witness_reproduces_deviation(self):
        for seed in range(5):
            g = gen_gnp(9, 0.5, seed)
            dev, (wa, wb) = discrepancy_exhaustive(g, 0.3)
            e = edges_between(g, wa, wb)
            rho = density(g)
            again = abs(e - rho * wa.size * wb.size) / (wa.size * wb.size)
            assert again == dev

    def test_large_n_refused(self):
        with pytest.raises(ValueError, match="sampled"):
            discrepancy_exhaustive(gen_gnp(17, 0.5, 0), 0.2)

    def test_eps_floor(self):
        with pytest.raises(ValueError):
            discrepancy_exhaustive(gen_complete(4), 0.1)


class TestDiscrepancySampled:
    def test_exhausted_budget_equals_exhaustive(self):
        # enough trials to visit every qualifying pair with certainty ~1
        for seed in range(4):
            g = gen_gnp(6, 0.5, 40 + seed)
            exact, _ = discrepancy_exhaustive(g, 0.5)
            approx, _ = discrepancy_sampled(g, 0.5, 40_000, seed)
            assert approx == exact

    def test_empty_graph(self):
        dev, _ = discrepancy_sampled(build_graph(8, []), 0.25, 50, 1)
        assert dev == 0.0

    def test_lower_bound_property(self):
        for seed in range(8):
            g = gen_gnp(9, 0.4, seed)
            exact, _ = discrepancy_exhaustive(g, 0.4)
            approx, _ = discrepancy_sampled(g, 0.4, 300, seed)
            assert approx <= exact

    def test_lower_bound_property_n12(self):
        g = gen_gnp(12, 0.5, 2)
        exact, _ = discrepancy_exhaustive(g, 0.25)
        for trials, seed in [(50, 0), (500, 1), (2000, 2)]:
            approx, _ = discrepancy_sampled(g, 0.25, trials, seed)
            assert approx <= exact

    def test_deterministic(self):
        g = gen_gnp(30, 0.5, 3)
        d1, _ = discrepancy_sampled(g, 0.1, 200, 9)
        d2, _ = discrepancy_sampled(g, 0.1, 200, 9)
        assert d1 == d2

    def test_witness_reproduces_deviation(self):
        g = gen_gnp(30, 0.5, 3)
        dev, (wa, wb) = discrepancy_sampled(g, 0.1, 200, 9)
        e = edges_between(g, wa, wb)
        again = abs(e - density(g) * wa.size * wb.size) / (wa.size * wb.size)
        assert again == dev

    def test_gnp_is_quasirandom_at_scale(self):
        g = gen_gnp(400, 0.5, 5)
        dev, _ = discrepancy_sampled(g, 0.05, 400, 7)
        assert dev < 0.05


class TestCountC4:
    def test_k4(self):
        assert count_c4_labelled(gen_complete(4)) == 24

    def test_four_cycle(self):
        assert count_c4_labelled(cycle_graph(4)) == 8

    def test_forest(self):
        tree = build_graph(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)])
        assert count_c4_labelled(tree) == 0

    @pytest.mark.parametrize("seed", range(6))
    def test_matches_tuple_enumeration(self, seed):
        g = gen_gnp(8, 0.5, seed)
        assert count_c4_labelled(g) == brute_c4(g)


class TestTraceP4:
    def test_k3(self):
        # eigenvalues of the K_3 walk matrix are 1, -1/2, -1/2
        assert trace_p4(gen_complete(3)) == pytest.approx(1.125, abs=1e-12)

    def test_c8(self):
        # six closed 4-walks per vertex, each of weight 1/16
        assert trace_p4(cycle_graph(8)) == pytest.approx(3.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_eigensolver(self, seed):
        g = gen_gnp(10, 0.6, seed)
        if g.degrees.min() == 0:
            pytest.skip("isolated vertex")
        assert trace_p4(g) == pytest.approx(
            float((walk_matrix_eigs(g) ** 4).sum()), abs=1e-9)

    def test_isolated_vertex_rejected(self):
        with pytest.raises(ValueError):
            trace_p4(build_graph(3, [(0, 1)]))


class TestLambdaBound:
    def test_k3(self):
        bound = lambda_bound_from_trace(gen_complete(3))
        assert bound == pytest.approx(0.125 ** 0.25, abs=1e-12)
        assert bound >= 0.5  # true lambda

    def test_bipartite_pinned_to_one(self):
        k33 = build_graph(6, [(i, j) for i in range(3) for j in range(3, 6)])
        assert lambda_bound_from_trace(k33) == 1.0

    def test_disconnected_pinned_to_one(self):
        g = build_graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
        assert lambda_bound_from_trace(g) == 1.0

    def test_dominates_true_lambda(self):
        for seed in range(5):
            g = gen_gnp(10, 0.7, seed)
            if g.degrees.min() == 0:
                continue
            eigs = walk_matrix_eigs(g)
            true_lambda = max(abs(eigs[0]), abs(eigs[-2]))
            assert lambda_bound_from_trace(g) >= true_lambda - 1e-12


class TestLambdaEstimate:
    def test_c5_circulant(self):
        est = lambda_estimate(cycle_graph(5), tol=1e-10)
        assert est == pytest.approx(abs(np.cos(4 * np.pi / 5)), abs=1e-8)

    def test_c7_circulant(self):
        est = lambda_estimate(cycle_graph(7), tol=1e-10)
        assert est == pytest.approx(np.cos(np.pi / 7), abs=1e-8)

    def test_k4(self):
        assert lambda_estimate(gen_complete(4)) == pytest.approx(1 / 3, abs=1e-10)

    def test_matches_eigensolver_on_random_instances(self):
        hits = 0
        for seed in range(30):
            g = gen_gnp(9, 0.6, seed)
            from qwalk.graph import connectivity_profile
            connected, bipartite = connectivity_profile(g)
            if not connected or bipartite:
                continue
            eigs = walk_matrix_eigs(g)
            true_lambda = max(abs(eigs[0]), abs(eigs[-2]))
            est = lambda_estimate(g, tol=1e-10, max_iter=200_000)
            assert est == pytest.approx(true_lambda, abs=1e-8)
            hits += 1
        assert hits >= 10

    def test_bound_dominates_estimate(self):
        for seed in range(5):
            g = gen_gnp(12, 0.6, seed)
            from qwalk.graph import connectivity_profile
            connected, bipartite = connectivity_profile(g)
            if not connected or bipartite:
                continue
            tol = 1e-9
            assert lambda_bound_from_trace(g) >= lambda_estimate(g, tol=tol) - tol

    def test_non_convergence_carries_iterate(self):
        with pytest.raises(PowerIterationError) as info:
            lambda_estimate(cycle_graph(5), tol=1e-12, max_iter=2)
        assert 0.0 <= info.value.estimate <= 1.0
        assert info.value.residual > 0

    def test_bipartite_rejected(self):
        with pytest.raises(ValueError):
            lambda_estimate(cycle_graph(6))


class TestCertify:
    def test_report_fields_and_flags(self):
        g = gen_gnp(60, 0.5, 4)
        report = certify(g, 0.1, trials=100, seed=2)
        assert report.method == "sampled" and report.pairs_checked == 100
        assert report.connected and not report.bipartite
        assert 0 <= report.lambda_bound <= 1
        assert report.rho == density(g)
        assert report.quasirandom == (report.discrepancy < 0.1)

    def test_exhaustive_mode(self):
        report = certify(gen_complete(6), 0.5, exhaustive=True)
        assert report.method == "exhaustive"
        assert report.discrepancy > 0

    def test_bipartite_flagged(self):
        k33 = build_graph(6, [(i, j) for i in range(3) for j in range(3, 6)])
        report = certify(k33, 0.4, trials=50, seed=1)
        assert report.bipartite and report.lambda_bound == 1.0
        assert report.lambda_estimate is None

    def test_json_round_trip(self):
        import json
        report = certify(gen_gnp(30, 0.5, 8), 0.2, trials=50, seed=3)
        payload = json.loads(report.to_json())
        assert set(payload) == {
            "rho", "eps_target", "discrepancy", "method", "pairs_checked",
            "c4_labelled", "trace_p4", "lambda_bound", "lambda_estimate",
            "connected", "bipartite"}
