"""Walks, the list model, the coupling sandwich, and step distributions."""

import math

import numpy as np
import pytest

from qwalk.graph import VertexSet, build_graph, gen_complete, gen_gnp
from qwalk.rng import DOMAIN_TRIALS, derive_seed
from qwalk.walks import (Distribution, ListModel, WalkTrace, balanced_start,
                         empirical_step_distribution, hit_probability_check,
                         list_subgraph, load_trace, run_walk, sandwich_bounds,
                         save_trace, stationary, subsequence_visit_counts,
                         tv_distance, walk_subgraph)


def path_graph(k):
    return build_graph(k, [(i, i + 1) for i in range(k - 1)])


def upper_gamma_regularized(k_int, y):
    """Q(k, y) = exp(-y) * sum_{j<k} y^j / j! for integer shape k."""
    term, total = 1.0, 1.0
    for j in range(1, k_int):
        term *= y / j
        total += term
    return math.exp(-y) * total


class TestStationary:
    def test_complete_uniform(self):
        pi = stationary(gen_complete(6))
        assert np.allclose(pi.probs, 1 / 6)

    def test_path(self):
        pi = stationary(path_graph(3))
        assert np.allclose(pi.probs, [0.25, 0.5, 0.25])

    def test_sums_to_one(self):
        pi = stationary(gen_gnp(50, 0.3, 4))
        assert abs(pi.probs.sum() - 1) < 1e-12

    def test_edgeless_rejected(self):
        with pytest.raises(ValueError):
            stationary(build_graph(3, []))


class TestBalancedStart:
    def test_lowest_id_balanced(self):
        g = gen_gnp(50, 0.5, 21)
        v = balanced_start(g, 0.2)
        rho = g.edge_count / (50 * 49 / 2)
        assert abs(g.degree(v) - rho * 50) <= 0.2 * 50
        for u in range(v):
            assert abs(g.degree(u) - rho * 50) > 0.2 * 50

    def test_no_balanced_vertex(self):
        star = build_graph(12, [(0, i) for i in range(1, 12)])
        with pytest.raises(ValueError, match="balanced"):
            balanced_start(star, 0.05)


class TestListModel:
    def test_next_entry_consumes_in_order(self):
        g = gen_gnp(20, 0.5, 4)
        model = ListModel(g, 11)
        got = [model.next_entry(3) for _ in range(7)]
        assert got == model.entries(3, 7).tolist()
        assert model.consumed[3] == 7

    def test_entries_are_neighbors(self):
        g = gen_gnp(20, 0.4, 1)
        model = ListModel(g, 5)
        for v in range(g.n):
            if g.degree(v) == 0:
                continue
            nbrs = set(g.neighbors(v).tolist())
            assert set(model.entries(v, 50).tolist()) <= nbrs

    def test_entry_replay_is_stateless(self):
        g = gen_gnp(20, 0.4, 1)
        model = ListModel(g, 5)
        before = model.entries(3, 10).tolist()
        run_walk(g, model, 0, 200)
        assert model.entries(3, 10).tolist() == before
        assert model.entry(3, 7) == before[6]

    def test_consumption_matches_departures(self):
        g = gen_gnp(20, 0.4, 1)
        model = ListModel(g, 5)
        trace = run_walk(g, model, 0, 300)
        assert np.array_equal(model.consumed, trace.visit_counts)

    def test_walk_consumes_prefix_of_lists(self):
        g = gen_gnp(15, 0.5, 2)
        model = ListModel(g, 9)
        trace = run_walk(g, model, 0, 100)
        replay = ListModel(g, 9)
        seq = trace.sequence
        taken = {v: [] for v in range(g.n)}
        for i in range(trace.steps):
            taken[int(seq[i])].append(int(seq[i + 1]))
        for v, got in taken.items():
            if got:
                assert replay.entries(v, len(got)).tolist() == got


class TestRunWalk:
    def test_k2_forced_alternation(self):
        g = gen_complete(2)
        trace = run_walk(g, ListModel(g, 3), 0, 4)
        assert trace.sequence.tolist() == [0, 1, 0, 1, 0]
        assert trace.visit_counts.tolist() == [2, 2]

    def test_visits_sum_to_steps(self):
        g = gen_gnp(30, 0.4, 6)
        trace = run_walk(g, ListModel(g, 1), 0, 500)
        assert trace.visit_counts.sum() == 500

    def test_deterministic(self):
        g = gen_gnp(30, 0.4, 6)
        t1 = run_walk(g, ListModel(g, 12), 2, 400)
        t2 = run_walk(g, ListModel(g, 12), 2, 400)
        assert np.array_equal(t1.sequence, t2.sequence)

    def test_consecutive_vertices_adjacent(self):
        g = gen_gnp(30, 0.4, 6)
        trace = run_walk(g, ListModel(g, 2), 0, 400)
        for i in range(trace.steps):
            assert g.has_edge(int(trace.sequence[i]), int(trace.sequence[i + 1]))

    def test_isolated_start_rejected(self):
        g = build_graph(3, [(0, 1)])
        with pytest.raises(ValueError):
            run_walk(g, ListModel(g, 1), 2, 5)

    def test_uniform_law_on_k4_chi_square(self):
        # on K_4 every non-stuttering length-3 continuation has mass 27^-1
        from qwalk.walks import _batch_walk_positions
        g = gen_complete(4)
        trials = 1_000_000
        _, hist = _batch_walk_positions(g, 0, 3, trials, 999, want_all_steps=True)
        w1, w2, w3 = hist[1], hist[2], hist[3]
        # rank each step among its predecessor's 3 allowed successors
        offsets = {v: np.array([u if u < v else u - 1 for u in range(4)])
                   for v in range(4)}
        code = np.zeros(trials, dtype=np.int64)
        for prev, cur, weight in [(np.zeros(trials, dtype=np.int64), w1, 9),
                                  (w1, w2, 3), (w2, w3, 1)]:
            rank = np.empty(trials, dtype=np.int64)
            for v in range(4):
                sel = prev == v
                rank[sel] = offsets[v][cur[sel]]
            code += rank * weight
        counts = np.bincount(code, minlength=27)
        expected = trials / 27
        stat = float(((counts - expected) ** 2 / expected).sum())
        p_value = upper_gamma_regularized(13, stat / 2)  # chi^2, 26 dof
        assert p_value > 1e-3

    def test_uniform_law_of_coupled_walks_on_k4(self):
        # same check through the real list-model path, fewer trials
        g = gen_complete(4)
        trials = 20_000
        counts = np.zeros(27, dtype=np.int64)
        for t in range(trials):
            model = ListModel(g, derive_seed(4242, DOMAIN_TRIALS, t))
            seq = run_walk(g, model, 0, 3).sequence.tolist()
            code = 0
            for prev, cur in zip(seq, seq[1:]):
                code = code * 3 + (cur if cur < prev else cur - 1)
            counts[code] += 1
        expected = trials / 27
        stat = float(((counts - expected) ** 2 / expected).sum())
        p_value = upper_gamma_regularized(13, stat / 2)
        assert p_value > 1e-3


class TestWalkSubgraph:
    def test_k2_single_edge(self):
        g = gen_complete(2)
        trace = run_walk(g, ListModel(g, 3), 0, 4)
        sub = walk_subgraph(trace)
        assert len(sub) == 1 and (0, 1) in sub

    def test_edge_bound(self):
        g = gen_gnp(30, 0.5, 8)
        trace = run_walk(g, ListModel(g, 4), 0, 200)
        assert len(walk_subgraph(trace)) <= 200

    def test_triangle_hand_trace(self):
        g = gen_complete(3)
        trace = WalkTrace(graph=g, start=0, steps=3,
                          sequence=np.array([0, 1, 2, 0]))
        assert len(walk_subgraph(trace)) == 3

    def test_edges_belong_to_parent(self):
        g = gen_gnp(25, 0.5, 8)
        sub = walk_subgraph(run_walk(g, ListModel(g, 4), 0, 300))
        for u, v in sub.edge_array():
            assert g.has_edge(int(u), int(v))


class TestListSubgraph:
    def test_alpha_zero_empty(self):
        g = gen_gnp(20, 0.5, 3)
        assert len(list_subgraph(g, ListModel(g, 1), 0.0)) == 0

    def test_k2_prefix(self):
        g = gen_complete(2)
        assert (0, 1) in list_subgraph(g, ListModel(g, 1), 5.0)

    def test_monotone_in_alpha(self):
        g = gen_gnp(25, 0.5, 5)
        model = ListModel(g, 7)
        for a1, a2 in [(0.1, 0.3), (0.3, 0.9), (0.9, 2.0)]:
            assert list_subgraph(g, model, a1).issubset(list_subgraph(g, model, a2))

    def test_retention_probability_closed_form(self):
        # fixed edge of a 100-regular host at alpha = 0.5
        g = gen_complete(101)
        hits = 0
        trials = 2000
        for t in range(trials):
            model = ListModel(g, derive_seed(31, DOMAIN_TRIALS, t))
            in_v = 0 in model.entries(1, 50)
            in_u = 1 in model.entries(0, 50)
            hits += in_v or in_u
        p_hat = hits / trials
        p = 1 - (1 - 1 / 100) ** 100
        se = math.sqrt(p * (1 - p) / trials)
        assert abs(p_hat - p) < 3 * se


class TestSandwich:
    def test_k2_exact(self):
        g = gen_complete(2)
        model = ListModel(g, 3)
        trace = run_walk(g, model, 0, 4)
        lo, hi = sandwich_bounds(trace, g)
        assert lo == hi == 2.0
        fresh = ListModel(g, 3)
        assert list_subgraph(g, fresh, lo).codes.tolist() == \
            walk_subgraph(trace).codes.tolist()

    @pytest.mark.parametrize("seed", range(6))
    def test_containments_exact(self, seed):
        g = gen_gnp(40, 0.5, 100 + seed)
        model = ListModel(g, seed)
        trace = run_walk(g, model, balanced_start(g, 0.2), 800)
        lo, hi = sandwich_bounds(trace, g)
        fresh = ListModel(g, seed)
        gw = walk_subgraph(trace)
        assert list_subgraph(g, fresh, lo).issubset(gw)
        assert gw.issubset(list_subgraph(g, fresh, hi))


class TestSubsequenceCounts:
    def test_l1_is_visit_counts(self):
        g = gen_gnp(20, 0.5, 2)
        trace = run_walk(g, ListModel(g, 5), 0, 100)
        counts = subsequence_visit_counts(trace, 1)
        assert np.array_equal(counts[0], trace.visit_counts)

    def test_k2_hand_check(self):
        g = gen_complete(2)
        trace = run_walk(g, ListModel(g, 3), 0, 4)
        counts = subsequence_visit_counts(trace, 2)
        # row 0 counts W_0, W_2 = 0, 0; row 1 counts W_1, W_3 = 1, 1
        assert counts[0].tolist() == [2, 0]
        assert counts[1].tolist() == [0, 2]

    def test_row_sums_equal_k(self):
        g = gen_gnp(20, 0.5, 2)
        trace = run_walk(g, ListModel(g, 5), 0, 103)
        counts = subsequence_visit_counts(trace, 10)
        assert (counts.sum(axis=1) == 10).all()

    def test_bad_l(self):
        g = gen_complete(2)
        trace = run_walk(g, ListModel(g, 3), 0, 4)
        with pytest.raises(ValueError):
            subsequence_visit_counts(trace, 0)
        with pytest.raises(ValueError):
            subsequence_visit_counts(trace, 5)


class TestStepDistribution:
    def test_step_zero_point_mass(self):
        g = gen_gnp(20, 0.5, 2)
        law = empirical_step_distribution(g, 4, 0, 100, 9)
        assert law.probs[4] == 1.0

    def test_k2_step_one(self):
        g = gen_complete(2)
        law = empirical_step_distribution(g, 0, 1, 50, 9)
        assert law.probs.tolist() == [0.0, 1.0]

    def test_converges_to_stationary(self):
        g = gen_gnp(100, 0.5, 15)
        law = empirical_step_distribution(g, 0, 8, 50_000, 3)
        assert tv_distance(law, stationary(g)) < 0.05


class TestTvDistance:
    def test_identical(self):
        p = Distribution(np.array([0.5, 0.5]))
        assert tv_distance(p, p) == 0.0

    def test_disjoint_point_masses(self):
        assert tv_distance(Distribution.point_mass(3, 0),
                           Distribution.point_mass(3, 2)) == 1.0

    def test_half(self):
        p = Distribution(np.array([0.5, 0.5]))
        q = Distribution(np.array([1.0, 0.0]))
        assert tv_distance(p, q) == 0.5

    def test_symmetry_and_triangle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b, c = (Distribution(x / x.sum()) for x in rng.random((3, 6)))
            assert tv_distance(a, b) == tv_distance(b, a)
            assert tv_distance(a, c) <= tv_distance(a, b) + tv_distance(b, c) + 1e-15

    def test_mismatched_universes(self):
        with pytest.raises(ValueError):
            tv_distance(Distribution.point_mass(2, 0), Distribution.point_mass(3, 0))


class TestHitProbability:
    def test_full_set(self):
        g = gen_gnp(50, 0.5, 21)
        emp, floor = hit_probability_check(
            g, balanced_start(g, 0.2), VertexSet.full(50), 2, 200, 5, eps=0.2)
        assert emp == 1.0 and emp >= floor

    def test_complete_graph_two_steps(self):
        n = 40
        g = gen_complete(n)
        s = VertexSet.from_iterable(n, range(1, 13))
        emp, _ = hit_probability_check(g, 0, s, 2, 40_000, 8, eps=0.05)
        # step law on K_n is uniform off the current vertex
        assert abs(emp - 12 / (n - 1)) < 0.02

    def test_floor_formula(self):
        g = gen_complete(40)
        s = VertexSet.from_iterable(40, range(20))
        _, floor = hit_probability_check(g, 0, s, 2, 10, 8, eps=0.04)
        assert floor == pytest.approx(0.5 - 9 * 0.2 / 1.0)

    def test_unbalanced_start_rejected(self):
        star_plus = build_graph(12, [(0, i) for i in range(1, 12)] + [(1, 2)])
        with pytest.raises(ValueError, match="balanced"):
            hit_probability_check(star_plus, 0, VertexSet.full(12), 2, 10, 1,
                                  eps=0.05)

    def test_floor_holds_on_random_hosts(self):
        for seed in range(10):
            g = gen_gnp(500, 0.5, 300 + seed)
            s = VertexSet.from_iterable(500, range(150))
            emp, floor = hit_probability_check(
                g, balanced_start(g, 0.01), s, 5, 5000, seed, eps=0.01)
            assert emp >= floor


class TestDefaultBlockLength:
    def test_log_squared(self):
        from qwalk.walks import default_block_length
        assert default_block_length(300) == round(math.log(300) ** 2)
        assert default_block_length(2) == 1  # floors at one step


class TestTraceIO:
    def test_round_trip(self, tmp_path):
        g = gen_gnp(20, 0.5, 2)
        trace = run_walk(g, ListModel(g, 5), 0, 50)
        for name in ["t.txt", "t.txt.gz"]:
            path = str(tmp_path / name)
            save_trace(trace, path)
            loaded = load_trace(g, path)
            assert loaded.start == trace.start
            assert np.array_equal(loaded.sequence, trace.sequence)
