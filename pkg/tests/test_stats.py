"""
Unit tests for observed counts, closed-form moments and derived statistics.

Tests the three-node path values worked out by hand, degenerate graphs whose
statistics are constant, agreement of the fast and direct isolated-node
variances, and the multiple-testing helpers.
"""

import math

import numpy as np
import pytest

from net_homophily import (
    ColoredGraph,
    HomophilyCalculator,
    NumericalInstabilityError,
    StatsConfig,
    block_edge_counts,
    expected_edges,
    expected_isolated,
    homophily_ratios,
    moment_table,
    multiple_testing,
    positive_set,
    synthetic_index,
    u_values,
    variance_edges,
    variance_isolated_fast,
    variance_isolated_naive,
    zscore_arrays,
    zscore_summary,
)
from net_homophily.stats import (
    class_table,
    combine_variance,
    edge_zscores,
    isolated_moments,
    threshold_set,
)

from .helpers import graph_with_profile, random_graph

SQRT_HALF = math.sqrt(0.5)


def masked_matrix(rows):
    """Masked array with ``None`` entries masked."""
    mask = [[value is None for value in row] for row in rows]
    data = [[0.0 if value is None else value for value in row] for row in rows]
    return np.ma.masked_array(np.array(data, dtype=float), mask=np.array(mask))


class TestObservedCounts:
    """Test edge block counts and isolated-node counts."""

    def test_path_counts(self, path_graph):
        """Test counts of the path a-b-c coloured red, red, blue."""
        counts = block_edge_counts(path_graph)
        assert counts.edges.tolist() == [[1, 1], [1, 0]]
        assert counts.isolated.tolist() == [0, 1]
        assert counts.total_edges == 2

    def test_two_triangles_counts(self, two_triangles):
        """Test counts of two monochrome triangles and a bridge."""
        counts = block_edge_counts(two_triangles)
        assert counts.edges.tolist() == [[3, 1], [1, 3]]
        assert counts.isolated.tolist() == [0, 0]

    def test_class_table(self, star_graph):
        """Test the per-class table of the star."""
        rows = class_table(star_graph)
        assert [(row.label, row.nodes, row.intra_edges, row.isolated) for row in rows] == [
            ("H", 2, 1, 0),
            ("P", 2, 0, 2),
            ("Q", 2, 0, 2),
        ]

    @pytest.mark.parametrize("seed", range(5))
    def test_counts_conserve_edges(self, seed):
        """Test that the upper triangle of the counts sums to m."""
        graph = random_graph(25, 0.2, (5, 8, 12), seed)
        assert block_edge_counts(graph).total_edges == graph.m


class TestPathMoments:
    """Test the hand-computed moments of the three-node path with profile (2, 1)."""

    def test_edge_moments(self, path_graph):
        """Test E and var of every M^{i,j}."""
        means = expected_edges(3, 2, (2, 1))
        variances = variance_edges(3, 2, 1, (2, 1))
        assert means[0, 0] == pytest.approx(2 / 3)
        assert means[0, 1] == pytest.approx(4 / 3)
        assert means[1, 1] == 0.0
        assert variances[0, 0] == pytest.approx(2 / 9)
        assert variances[0, 1] == pytest.approx(2 / 9)
        assert variances[1, 1] == 0.0

    def test_isolated_moments(self, path_graph):
        """Test E and var of every L^i."""
        assert expected_isolated(path_graph, (2, 1), 0) == pytest.approx(2 / 3)
        assert expected_isolated(path_graph, (2, 1), 1) == pytest.approx(1.0)
        for variance in (variance_isolated_fast, variance_isolated_naive):
            assert variance(path_graph, (2, 1), 0) == pytest.approx(8 / 9)
            assert variance(path_graph, (2, 1), 1) == 0.0

    def test_zscores(self, path_graph):
        """Test Z and z0 including the undefined entries."""
        report = HomophilyCalculator().analyze(path_graph)
        assert report.z[0, 0] == pytest.approx(SQRT_HALF)
        assert report.z[0, 1] == pytest.approx(-SQRT_HALF)
        assert report.z.mask[1, 1]
        assert report.z0[0] == pytest.approx(-SQRT_HALF)
        assert report.z0.mask[1]

    def test_ratios(self, path_graph):
        """Test omega and eta."""
        report = HomophilyCalculator().analyze(path_graph)
        assert report.ratios[0, 0] == pytest.approx(1.5)
        assert report.ratios[0, 1] == pytest.approx(0.75)
        assert report.ratios.mask[1, 1]

    def test_report_fields(self, path_graph):
        """Test the graph quantities carried by the report."""
        report = HomophilyCalculator().analyze(path_graph)
        assert (report.n, report.m, report.s, report.pi3) == (3, 2, 2, 1)
        assert report.class_sizes == (2, 1)
        assert report.sum_squared_degrees == 6
        assert report.u[0, 0] == pytest.approx(2.0)
        assert report.synthetic_index == 0.0
        assert len(report.levels) == 1 and report.levels[0].alpha == 0.05

    def test_edge_zscores_match_report(self, path_graph):
        """Test the edge-only pipeline against the full analysis."""
        z = edge_zscores(path_graph)
        report = HomophilyCalculator().analyze(path_graph)
        np.testing.assert_array_equal(z.mask, report.z.mask)
        np.testing.assert_allclose(z.filled(0.0), report.z.filled(0.0))


class TestDegenerateGraphs:
    """Test graphs whose statistics do not vary under recolouring."""

    def test_edgeless_graph(self):
        """Test that every statistic of an edgeless graph is undefined."""
        graph = ColoredGraph.from_edge_arrays([], [], np.array([0, 0, 1]), ["x", "y"])
        moments = moment_table(graph)
        assert np.all(moments.mean_edges == 0.0)
        assert np.all(moments.var_edges == 0.0)
        np.testing.assert_allclose(moments.mean_isolated, [2.0, 1.0])
        assert moments.var_isolated.tolist() == [0.0, 0.0]
        z, z0 = zscore_arrays(block_edge_counts(graph), moments)
        assert z.mask.all() and z0.mask.all()

    def test_complete_graph(self):
        """Test that K4 with two classes of two has constant edge counts."""
        edges = [(u, v) for u in range(4) for v in range(u + 1, 4)]
        graph = graph_with_profile(edges, 4, (2, 2))
        moments = moment_table(graph)
        np.testing.assert_allclose(moments.mean_edges, [[1.0, 4.0], [4.0, 1.0]])
        assert moments.var_edges.tolist() == [[0.0, 0.0], [0.0, 0.0]]
        assert moments.mean_isolated.tolist() == [0.0, 0.0]
        assert moments.var_isolated.tolist() == [0.0, 0.0]
        report = HomophilyCalculator().analyze(graph)
        assert report.z.mask.all() and report.z0.mask.all()
        assert report.synthetic_index == 0.0

    def test_single_colour(self, two_triangles):
        """Test that one colour makes M^{1,1} = m with zero variance."""
        graph = ColoredGraph(
            node_labels=two_triangles.node_labels,
            indptr=two_triangles.indptr,
            indices=two_triangles.indices,
            colors=np.zeros(two_triangles.n, dtype=np.int32),
            color_labels=("all",),
        )
        moments = moment_table(graph)
        assert moments.mean_edges[0, 0] == pytest.approx(graph.m)
        assert moments.var_edges[0, 0] == 0.0

    def test_rejects_empty_class(self, path_graph):
        """Test that a class without nodes is rejected."""
        with pytest.raises(ValueError, match="no nodes"):
            expected_isolated(path_graph, (3, 0), 1)
        with pytest.raises(ValueError, match="empty colour class"):
            moment_table(path_graph, (3, 0))

    def test_rejects_tiny_graph(self):
        """Test that fewer than two nodes is rejected."""
        with pytest.raises(ValueError, match="n >= 2"):
            expected_edges(1, 0, (1,))

    def test_rejects_wrong_profile_sum(self, path_graph):
        """Test that the profile must cover every node."""
        with pytest.raises(ValueError, match="expected n=3"):
            moment_table(path_graph, (1, 1))


class TestFastIsolatedVariance:
    """Test that the histogram decomposition reproduces the direct sum."""

    @pytest.mark.parametrize(
        "n,p,profile,seed",
        [
            (10, 0.3, (5, 5), 0),
            (20, 0.15, (1, 9, 10), 1),
            (30, 0.1, (10, 10, 10), 2),
            (40, 0.05, (3, 7, 30), 3),
            (25, 0.5, (12, 13), 4),
            (16, 0.9, (4, 4, 4, 4), 5),
        ],
    )
    def test_fast_equals_naive(self, n, p, profile, seed):
        """Test exact equality of both variance paths on random graphs."""
        graph = random_graph(n, p, profile, seed)
        for i in range(len(profile)):
            fast = variance_isolated_fast(graph, profile, i)
            naive = variance_isolated_naive(graph, profile, i)
            assert fast == naive

    def test_star_fast_equals_naive(self, star_graph):
        """Test a graph where every leaf pair sits at distance 2."""
        profile = star_graph.profile().counts
        for i in range(star_graph.s):
            assert variance_isolated_fast(star_graph, profile, i) == variance_isolated_naive(
                star_graph, profile, i
            )

    def test_threads_do_not_change_results(self):
        """Test that the per-colour worker pool gives identical values."""
        graph = random_graph(30, 0.2, (6, 7, 8, 9), 11)
        profile = graph.profile().counts
        single = isolated_moments(graph, profile, threads=1)
        pooled = isolated_moments(graph, profile, threads=4)
        np.testing.assert_array_equal(single[0], pooled[0])
        np.testing.assert_array_equal(single[1], pooled[1])


class TestConservation:
    """Test identities that hold for every graph."""

    @pytest.mark.parametrize("seed", range(5))
    def test_expected_edges_sum_to_m(self, seed):
        """Test that the expected counts with i <= j sum to m."""
        graph = random_graph(30, 0.2, (3, 9, 18), seed)
        means = expected_edges(graph.n, graph.m, graph.profile().counts)
        assert np.triu(means).sum() == pytest.approx(graph.m)

    def test_variances_nonnegative(self):
        """Test nonnegative variances on a spread of random graphs."""
        for seed in range(6):
            graph = random_graph(35, 0.15, (5, 10, 20), seed)
            moments = moment_table(graph)
            assert np.all(moments.var_edges >= 0.0)
            assert np.all(moments.var_isolated >= 0.0)

    def test_coefficient_of_variation(self, path_graph):
        """Test sigma / mean and its mask."""
        cv = moment_table(path_graph).coefficient_of_variation()
        assert cv[0, 0] == pytest.approx(math.sqrt(2 / 9) / (2 / 3))
        assert cv.mask[1, 1]


class TestBoundsAndTests:
    """Test U-values, positive sets and the marginal and joint procedures."""

    def test_u_values(self):
        """Test Chebyshev and Cantelli bounds."""
        z = masked_matrix([[2.0, 0.0], [0.0, None]])
        chebyshev = u_values(z)
        cantelli = u_values(z, cantelli=True)
        assert chebyshev[0, 0] == pytest.approx(0.25)
        assert chebyshev[0, 1] == math.inf
        assert chebyshev.mask[1, 1]
        assert cantelli[0, 0] == pytest.approx(0.2)
        assert cantelli[0, 1] == pytest.approx(1.0)
        assert cantelli.mask[1, 1]

    def test_positive_set_greedy(self):
        """Test that the smallest bounds are taken until the budget runs out."""
        z = masked_matrix([[10.0, 1.0, 1.0], [1.0, 5.0, 1.0], [1.0, 1.0, 2.0]])
        result = positive_set(z, [(0, 0), (1, 1), (2, 2)], alpha=0.06)
        assert result.selected == ((0, 0), (1, 1))
        assert result.q == 2
        assert result.budget_used == pytest.approx(0.05)

    def test_positive_set_skips_negative_and_undefined(self):
        """Test that only defined positive z-scores are eligible."""
        z = masked_matrix([[-20.0, None], [None, 30.0]])
        result = positive_set(z, [(0, 0), (0, 1), (1, 1)], alpha=0.5)
        assert result.selected == ((1, 1),)

    def test_positive_set_zero_alpha(self):
        """Test that alpha = 0 selects nothing."""
        z = masked_matrix([[100.0]])
        assert positive_set(z, [(0, 0)], alpha=0.0).q == 0

    def test_multiple_testing(self):
        """Test marginal, Bonferroni and heterophily decisions at alpha = 0.05."""
        z = masked_matrix(
            [
                [10.0, 6.0, -1.0],
                [6.0, 4.0, None],
                [-1.0, None, -3.0],
            ]
        )
        level = multiple_testing(z, 0.05)
        assert level.marginal_threshold == pytest.approx(1 / math.sqrt(0.05))
        assert level.bonferroni_threshold == pytest.approx(3 / math.sqrt(0.05))
        assert level.homophilic == (0,)
        assert level.jointly_homophilic == ()
        assert level.heterophilic == ((0, 1),)
        assert level.diagonal.selected == ((0, 0),)
        assert level.off_diagonal.selected == ((0, 1),)

    def test_multiple_testing_rejects_bad_alpha(self):
        """Test that alpha outside [0, 1] is rejected."""
        with pytest.raises(ValueError, match="alpha"):
            multiple_testing(masked_matrix([[1.0]]), 1.5)

    def test_threshold_set(self):
        """Test J(t) over pairs i <= j."""
        z = masked_matrix([[3.0, 2.5], [2.5, None]])
        assert threshold_set(z, 2.0) == [(0, 0), (0, 1)]
        assert threshold_set(z, 2.9) == [(0, 0)]


class TestSyntheticIndex:
    """Test the synthetic homophily index."""

    def test_value(self):
        """Test 1 - s / ||diag Z||^2 on a hand-computed case."""
        z = masked_matrix([[3.0, 0.0], [0.0, 4.0]])
        assert synthetic_index(z) == pytest.approx(1 - 2 / 25)

    def test_clamped_at_zero(self):
        """Test that small diagonals give 0."""
        assert synthetic_index(masked_matrix([[0.5, 0.0], [0.0, 0.5]])) == 0.0

    def test_undefined_diagonal_ignored(self):
        """Test that masked diagonal entries are left out of s and the norm."""
        z = masked_matrix([[3.0, 0.0], [0.0, None]])
        assert synthetic_index(z) == pytest.approx(1 - 1 / 9)
        assert synthetic_index(masked_matrix([[None]])) == 0.0

    def test_invariant_under_colour_relabelling(self, two_triangles):
        """Test that swapping colour indices keeps the index."""
        swapped = ColoredGraph(
            node_labels=two_triangles.node_labels,
            indptr=two_triangles.indptr,
            indices=two_triangles.indices,
            colors=1 - two_triangles.colors,
            color_labels=tuple(reversed(two_triangles.color_labels)),
        )
        first = HomophilyCalculator().analyze(two_triangles).synthetic_index
        second = HomophilyCalculator().analyze(swapped).synthetic_index
        assert 0.0 <= first <= 1.0
        assert first == pytest.approx(second)


class TestSummaryAndConfig:
    """Test the z-score summary and configuration validation."""

    def test_zscore_summary(self):
        """Test diagonal and off-diagonal statistics with an excluded class."""
        z = masked_matrix(
            [
                [6.0, -2.0, 0.5],
                [-2.0, 4.0, -0.5],
                [0.5, -0.5, None],
            ]
        )
        labels = ("A", "B", "X")
        full = zscore_summary(z, labels)
        assert full.diagonal_mean == pytest.approx(5.0)
        assert full.diagonal_above_5 == pytest.approx(0.5)
        assert full.off_diagonal_negative == pytest.approx(2 / 3)
        assert full.off_diagonal_below_minus_1 == pytest.approx(1 / 3)

        reduced = zscore_summary(z, labels, exclude=["X"])
        assert reduced.excluded == ("X",)
        assert reduced.off_diagonal_mean == pytest.approx(-2.0)
        assert reduced.off_diagonal_min == reduced.off_diagonal_max == pytest.approx(-2.0)

    def test_zscore_summary_unknown_class(self):
        """Test that excluding an unknown class is an error."""
        with pytest.raises(ValueError, match="unknown classes"):
            zscore_summary(masked_matrix([[1.0]]), ("A",), exclude=["Z"])

    def test_stats_config_validation(self):
        """Test that invalid settings are rejected."""
        with pytest.raises(ValueError, match="threads"):
            StatsConfig(threads=0)
        with pytest.raises(ValueError, match="alpha"):
            StatsConfig(alphas=(0.05, 2.0))

    def test_cantelli_report(self, path_graph):
        """Test that the configured bound reaches the report."""
        report = HomophilyCalculator(StatsConfig(cantelli=True)).analyze(path_graph)
        assert report.cantelli
        assert report.u[0, 0] == pytest.approx(1 / 1.5)

    def test_homophily_ratios_masked_where_mean_zero(self, path_graph):
        """Test that omega is undefined for a class with one node."""
        counts = block_edge_counts(path_graph)
        ratios = homophily_ratios(counts, moment_table(path_graph))
        assert ratios.mask.tolist() == [[False, False], [False, True]]


class TestCombineVariance:
    """Test compensated summation and the negative-variance policy."""

    def test_compensated_sum(self):
        """Test that fsum cancels large terms exactly."""
        assert combine_variance([1e6, 1.0, -1e6], "x") == 1.0

    def test_rounding_residue_is_zero(self):
        """Test that a residue at rounding level of the terms becomes zero."""
        assert combine_variance([9.0, -9.0 * (1 + 2**-52)], "x") == 0.0

    def test_small_negative_clamped_with_warning(self):
        """Test that a small negative sum is clamped to zero with a warning."""
        with pytest.warns(RuntimeWarning, match="clamped"):
            assert combine_variance([1.0, -1.0 - 1e-9], "x") == 0.0

    def test_large_negative_raises(self):
        """Test that a clearly negative variance is an error."""
        with pytest.raises(NumericalInstabilityError, match="variance of x"):
            combine_variance([1.0, -1.1], "x")
