"""
Closed-form moments against the enumeration and sampling oracles.

Every graph of the networkx atlas with two to six nodes is checked under every
profile with at most three positive classes.
"""

import networkx as nx
import numpy as np
import pytest

from net_homophily import (
    EnumerationBudgetError,
    compare_moments,
    enumerate_moments,
    moment_table,
    multinomial,
    sample_moments,
)
from net_homophily.oracle import _colourings

from .helpers import compositions, graph_with_profile, random_graph


def atlas_graphs(n):
    """Edge lists of the atlas graphs on n nodes."""
    return [list(g.edges()) for g in nx.graph_atlas_g() if g.number_of_nodes() == n]


class TestEnumeration:
    """Test the exhaustive oracle."""

    def test_path_moments(self, path_graph):
        """Test exact moments of the three-node path with profile (2, 1)."""
        summary = enumerate_moments(path_graph)
        assert summary.exact and summary.samples == 3
        np.testing.assert_allclose(summary.mean_edges, [[2 / 3, 4 / 3], [4 / 3, 0.0]])
        np.testing.assert_allclose(summary.var_edges, [[2 / 9, 2 / 9], [2 / 9, 0.0]], atol=1e-15)
        np.testing.assert_allclose(summary.mean_isolated, [2 / 3, 1.0])
        np.testing.assert_allclose(summary.var_isolated, [8 / 9, 0.0], atol=1e-15)
        assert summary.se_mean_edges is None

    def test_colourings_are_distinct_and_complete(self):
        """Test the lexicographic colour-word enumeration."""
        batches = list(_colourings((2, 2, 1), batch=7))
        words = np.concatenate(batches)
        assert len(words) == multinomial(5, (2, 2, 1))
        assert len({tuple(row) for row in words.tolist()}) == len(words)
        assert words[0].tolist() == [0, 0, 1, 1, 2]
        assert words[-1].tolist() == [2, 1, 1, 0, 0]

    def test_budget(self, two_triangles):
        """Test that too many colourings are refused."""
        with pytest.raises(EnumerationBudgetError, match="sampled mode"):
            enumerate_moments(two_triangles, budget=10)

    @pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
    def test_atlas_sweep(self, n):
        """Test every atlas graph on n nodes under every profile with s <= 3."""
        checked = 0
        for edges in atlas_graphs(n):
            for s in range(1, min(3, n) + 1):
                for profile in compositions(n, s):
                    graph = graph_with_profile(edges, n, profile)
                    rows = compare_moments(moment_table(graph), enumerate_moments(graph))
                    failed = [row for row in rows if not row.within]
                    assert not failed, f"edges={edges} profile={profile}: {failed[0]}"
                    checked += 1
        assert checked > 0

    def test_profile_override(self, star_graph):
        """Test moments for a profile other than the graph's own colouring."""
        profile = (1, 2, 3)
        rows = compare_moments(
            moment_table(star_graph, profile), enumerate_moments(star_graph, profile)
        )
        assert all(row.within for row in rows)


class TestSampling:
    """Test the Monte Carlo oracle."""

    def test_deterministic_for_seed(self, two_triangles):
        """Test that a seed fixes every estimate."""
        first = sample_moments(two_triangles, samples=3000, seed=5, chunk_size=512)
        second = sample_moments(two_triangles, samples=3000, seed=5, chunk_size=512)
        np.testing.assert_array_equal(first.mean_edges, second.mean_edges)
        np.testing.assert_array_equal(first.var_isolated, second.var_isolated)

    def test_threads_do_not_change_results(self, two_triangles):
        """Test bit-identical results for one and several threads."""
        single = sample_moments(two_triangles, samples=5000, seed=1, chunk_size=700, threads=1)
        pooled = sample_moments(two_triangles, samples=5000, seed=1, chunk_size=700, threads=3)
        np.testing.assert_array_equal(single.mean_edges, pooled.mean_edges)
        np.testing.assert_array_equal(single.var_edges, pooled.var_edges)
        np.testing.assert_array_equal(single.se_var_isolated, pooled.se_var_isolated)

    def test_rejects_single_sample(self, path_graph):
        """Test that at least two samples are needed."""
        with pytest.raises(ValueError, match="at least 2"):
            sample_moments(path_graph, samples=1)

    def test_agrees_with_closed_form(self):
        """Test that at least 95% of the moments lie within 4 standard errors."""
        graph = random_graph(12, 0.3, (4, 4, 4), 3)
        summary = sample_moments(graph, samples=20_000, seed=0)
        rows = compare_moments(moment_table(graph), summary)
        failures = sum(not row.within for row in rows)
        assert failures <= max(1, int(0.05 * len(rows)))
        assert all(row.standard_error is not None for row in rows)

    def test_merge_matches_single_chunk(self, two_triangles):
        """Test that merged chunk moments equal one-pass moments."""
        chunked = sample_moments(two_triangles, samples=4000, seed=2, chunk_size=1000)
        assert chunked.samples == 4000
        assert np.all(chunked.var_edges >= 0.0)
        assert np.all(chunked.se_mean_edges >= 0.0)


class TestComparison:
    """Test the comparison table."""

    def test_row_layout(self, path_graph):
        """Test statistic names and order."""
        rows = compare_moments(moment_table(path_graph), enumerate_moments(path_graph), ["r", "b"])
        names = [(row.statistic, row.moment) for row in rows]
        assert names[:2] == [("M[r,r]", "mean"), ("M[r,r]", "variance")]
        assert names[-1] == ("L[b]", "variance")
        assert len(rows) == 10

    def test_injected_error_detected(self, path_graph):
        """Test that a 1% error in the closed forms is reported."""
        moments = moment_table(path_graph)
        perturbed = type(moments)(
            mean_edges=moments.mean_edges * 1.01,
            var_edges=moments.var_edges,
            mean_isolated=moments.mean_isolated,
            var_isolated=moments.var_isolated,
        )
        rows = compare_moments(perturbed, enumerate_moments(path_graph))
        bad = [row.statistic for row in rows if not row.within]
        assert "M[0,0]" in bad and "M[0,1]" in bad
        assert all(row.relative_error < 0.02 for row in rows)

    def test_relative_error_floor(self, path_graph):
        """Test that values below one are compared absolutely."""
        moments = moment_table(path_graph)
        rows = compare_moments(moments, enumerate_moments(path_graph))
        for row in rows:
            scale = max(abs(row.closed_form), abs(row.oracle), 1.0)
            assert row.relative_error == pytest.approx(abs(row.closed_form - row.oracle) / scale)

    def test_colour_count_mismatch(self, path_graph, star_graph):
        """Test that tables with different colour counts are rejected."""
        with pytest.raises(ValueError, match="colours"):
            compare_moments(moment_table(path_graph), enumerate_moments(star_graph))
