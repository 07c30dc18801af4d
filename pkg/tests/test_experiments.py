import math
from itertools import combinations

import numpy as np
import pytest
import scipy.stats

from errors import Disconnected, IndexOutOfRange, InvalidArgument, InvalidGraph, OutOfRange
from experiments import (
    Arc,
    SimpleGraph,
    arc_contains,
    arc_count_experiment,
    complete_graph,
    cue_arc_eigenvalues,
    cycle_graph,
    haar_unitary,
    is_spanning_tree,
    path_graph,
    random_kernel,
    spanning_tree_count,
    transfer_current_kernel,
    ust_compare,
    wilson_batch,
    wilson_sample,
)
from kernel import is_projection
from measure import elementary_probability
from sampler import SamplerConfig


class TestHaarUnitary:
    def test_unitary(self, rng):
        for n in (1, 2, 5, 16):
            U = haar_unitary(n, rng)
            assert np.max(np.abs(U.conj().T @ U - np.eye(n))) < 1e-10
            assert np.max(np.abs(np.abs(np.linalg.eigvals(U)) - 1.0)) < 1e-10

    def test_trace_moments(self, rng):
        traces = np.array([np.trace(haar_unitary(3, rng)) for _ in range(10000)])
        assert abs(traces.real.mean()) < 0.05
        assert abs(traces.imag.mean()) < 0.05
        assert abs(traces.real.var() - 0.5) < 0.05

    def test_left_multiplication_invariance(self, rng):
        n, draws = 3, 4000
        A = haar_unitary(n, np.random.default_rng(77))
        shifted = np.array([abs((A @ haar_unitary(n, rng))[0, 1]) ** 2 for _ in range(draws)])
        plain = np.array([abs(haar_unitary(n, rng)[0, 1]) ** 2 for _ in range(draws)])
        # |U_01|^2 of a Haar unitary is Beta(1, n - 1)
        assert scipy.stats.ks_2samp(shifted, plain).pvalue > 1e-3
        assert scipy.stats.kstest(shifted, scipy.stats.beta(1, n - 1).cdf).pvalue > 1e-3
        traces = np.array([np.trace(A @ haar_unitary(n, rng)) for _ in range(draws)])
        assert abs(traces.mean()) < 0.06
        assert abs(np.mean(np.abs(traces) ** 2) - 1.0) < 0.08

    def test_random_kernel_spectrum(self, rng):
        K = random_kernel(5, rng, max_eigenvalue=0.5)
        lam = np.linalg.eigvalsh(K.matrix)
        assert lam.min() >= -1e-12 and lam.max() <= 0.5 + 1e-12
        with pytest.raises(OutOfRange):
            random_kernel(3, rng, max_eigenvalue=1.5)


class TestArc:
    def test_rejects_bad_length(self):
        with pytest.raises(OutOfRange):
            Arc(length=0.0)
        with pytest.raises(OutOfRange):
            Arc(length=7.0)

    def test_half_open_membership(self):
        arc = Arc(length=math.pi)
        inside = arc_contains([-math.pi / 2, 0.0, math.pi / 2 - 1e-9, math.pi / 2, math.pi], arc)
        assert inside.tolist() == [True, True, True, False, False]

    def test_wraps_around(self):
        arc = Arc(length=1.0, center=math.pi)
        assert arc_contains([math.pi, -math.pi + 0.2, 0.0], arc).tolist() == [True, True, False]

    def test_full_circle(self):
        assert arc_contains([0.0, 3.0, -3.0], Arc(length=2 * math.pi)).all()


class TestCueArcEigenvalues:
    def test_full_circle(self):
        lam = cue_arc_eigenvalues(8, Arc(length=2 * math.pi))
        np.testing.assert_allclose(lam, np.ones(8), atol=1e-12)

    def test_trace(self):
        lam = cue_arc_eigenvalues(20, Arc(length=1.3))
        assert abs(lam.sum() - 20 * 1.3 / (2 * math.pi)) < 1e-10
        assert lam.min() >= 0.0 and lam.max() <= 1.0

    def test_center_does_not_matter(self):
        a = cue_arc_eigenvalues(12, Arc(length=2.0))
        b = cue_arc_eigenvalues(12, Arc(length=2.0, center=1.1))
        np.testing.assert_array_equal(a, b)


class TestArcCountExperiment:
    def test_preconditions(self):
        with pytest.raises(OutOfRange):
            arc_count_experiment(1, Arc(length=1.0), 100, SamplerConfig())
        with pytest.raises(InvalidArgument):
            arc_count_experiment(4, Arc(length=1.0), 99, SamplerConfig())

    def test_full_circle_counts_every_eigenvalue(self):
        report = arc_count_experiment(6, Arc(length=2 * math.pi), 100, SamplerConfig(seed=1))
        assert report["empirical"]["mean"] == 6.0
        assert report["empirical"]["variance"] == 0.0
        assert report["empirical"]["count_pmf"][6] == 1.0

    def test_small_n(self):
        n, arc = 8, Arc(length=math.pi)
        report = arc_count_experiment(n, arc, 400, SamplerConfig(seed=2))
        sigma = math.sqrt(report["exact"]["variance"] / 400)
        assert abs(report["empirical"]["mean"] - n / 2) < 4 * sigma
        assert abs(report["exact"]["mean"] - n / 2) < 1e-10
        assert report["count_tv_distance"] < 0.1

    def test_reproducible_for_any_thread_count(self):
        config = SamplerConfig(seed=3, replicate_stride=50)
        a = arc_count_experiment(6, Arc(length=2.0), 200, config, threads=1)
        b = arc_count_experiment(6, Arc(length=2.0), 200, config, threads=3)
        assert a == b

    @pytest.mark.slow
    def test_half_circle_at_n_64(self):
        n, replicates = 64, 2000
        report = arc_count_experiment(n, Arc(length=math.pi), replicates, SamplerConfig(seed=0))
        lam = cue_arc_eigenvalues(n, Arc(length=math.pi))
        exact_variance = float(np.sum(lam * (1.0 - lam)))
        assert report["exact"]["variance"] == pytest.approx(exact_variance, abs=1e-9)
        assert abs(report["empirical"]["mean"] - 32) < 4 * math.sqrt(exact_variance / replicates)
        assert abs(report["empirical"]["variance"] - exact_variance) < 3 * report["exact"]["variance_standard_error"]
        assert report["count_tv_distance"] < 2e-2
        # the exact standardized variance at n = 64 is about 1.55
        assert 0.5 <= report["standardized"]["variance"] <= 2.0

    @pytest.mark.slow
    def test_rotation_invariance(self):
        a = arc_count_experiment(16, Arc(length=2.0), 1000, SamplerConfig(seed=9))
        b = arc_count_experiment(16, Arc(length=2.0, center=2.5), 1000, SamplerConfig(seed=10))
        assert abs(a["empirical"]["mean"] - b["empirical"]["mean"]) < 5 * math.sqrt(2 * a["exact"]["variance"] / 1000)


class TestSimpleGraph:
    def test_orientation(self):
        G = SimpleGraph.from_edges(3, [(1, 0), (2, 1)])
        assert G.edges == ((0, 1), (1, 2))

    def test_invalid_graphs(self):
        with pytest.raises(InvalidGraph):
            SimpleGraph.from_edges(3, [(0, 0), (0, 1), (1, 2)])
        with pytest.raises(InvalidGraph):
            SimpleGraph.from_edges(3, [(0, 1), (1, 0), (1, 2)])
        with pytest.raises(IndexOutOfRange):
            SimpleGraph.from_edges(2, [(0, 2)])
        with pytest.raises(Disconnected):
            SimpleGraph.from_edges(4, [(0, 1), (2, 3)])

    def test_spanning_tree_counts(self):
        assert spanning_tree_count(complete_graph(3)) == 3
        assert spanning_tree_count(complete_graph(4)) == 16
        assert spanning_tree_count(cycle_graph(5)) == 5
        assert spanning_tree_count(path_graph(4)) == 1

    def test_spanning_tree_count_is_exact_for_large_counts(self):
        for vertices in range(2, 13):
            assert spanning_tree_count(complete_graph(vertices)) == vertices ** (vertices - 2)
        assert spanning_tree_count(cycle_graph(40)) == 40

    def test_is_spanning_tree(self):
        G = complete_graph(3)
        assert is_spanning_tree(G, [0, 1])
        assert not is_spanning_tree(G, [0, 1, 2])
        assert not is_spanning_tree(G, [0])
        square = cycle_graph(4)
        assert not is_spanning_tree(path_graph(2), [])
        assert is_spanning_tree(square, [0, 1, 2])


class TestTransferCurrent:
    def test_triangle(self):
        K = transfer_current_kernel(complete_graph(3))
        np.testing.assert_allclose(np.diag(K.matrix).real, [2 / 3] * 3, atol=1e-12)
        assert abs(np.trace(K.matrix).real - 2.0) < 1e-9
        for S in [(0, 1), (0, 2), (1, 2)]:
            assert abs(elementary_probability(K, S) - 1 / 3) < 1e-12

    def test_tree_gives_identity(self):
        K = transfer_current_kernel(path_graph(5))
        np.testing.assert_allclose(K.matrix, np.eye(4), atol=1e-12)

    def test_projection_of_rank_vertices_minus_one(self):
        G = complete_graph(5)
        K = transfer_current_kernel(G)
        assert is_projection(K, tol=1e-9)
        assert abs(np.trace(K.matrix).real - (G.vertices - 1)) < 1e-9

    def test_k4_trees_are_uniform(self):
        G = complete_graph(4)
        K = transfer_current_kernel(G)
        for S in combinations(range(G.edge_count), 3):
            expected = 1 / 16 if is_spanning_tree(G, S) else 0.0
            assert abs(elementary_probability(K, S) - expected) < 1e-10


class TestWilson:
    def test_path_graph(self, rng):
        G = path_graph(4)
        assert wilson_sample(G, rng) == (0, 1, 2)

    def test_samples_are_spanning_trees(self, rng):
        G = complete_graph(5)
        for _ in range(200):
            assert is_spanning_tree(G, wilson_sample(G, rng))

    def test_triangle_is_uniform(self):
        histogram = wilson_batch(complete_graph(3), 20000, SamplerConfig(seed=4))
        assert len(histogram.counts) == 3
        for frequency in histogram.frequencies().values():
            assert abs(frequency - 1 / 3) < 0.02

    def test_k4_has_sixteen_trees(self):
        histogram = wilson_batch(complete_graph(4), 20000, SamplerConfig(seed=5))
        assert len(histogram.counts) == 16
        for frequency in histogram.frequencies().values():
            assert abs(frequency - 1 / 16) < 0.015


class TestUstCompare:
    def test_triangle(self):
        report = ust_compare(complete_graph(3), 3000, SamplerConfig(seed=1))
        assert report["spanning_tree_count"] == 3
        assert report["exact"]["max_discrepancy"] < 1e-12
        assert report["dpp"]["all_spanning_trees"]
        assert report["dpp"]["cardinalities"] == {"2": 3000}
        assert report["dpp_wilson_tv"] < 0.06

    @pytest.mark.slow
    def test_k4(self):
        report = ust_compare(complete_graph(4), 10 ** 5, SamplerConfig(seed=2))
        assert report["spanning_tree_count"] == 16
        assert report["exact"]["max_discrepancy"] < 1e-10
        assert report["dpp"]["distinct"] == 16
        assert report["dpp"]["all_spanning_trees"]
        assert report["dpp_wilson_tv"] < 1e-2
