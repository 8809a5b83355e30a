"""
Tests for JSON, CSV and Markdown report output.
"""

import csv
import dataclasses
import io
import json

import numpy as np
import pytest

from net_homophily import HomophilyCalculator, ReportWriter, StatsConfig, load_report
from net_homophily.report import SCHEMA_VERSION, report_from_dict, report_to_dict
from net_homophily.stats import class_table, multiple_testing


@pytest.fixture
def path_report(path_graph):
    """Analysis of the three-node path at two significance levels."""
    return HomophilyCalculator(StatsConfig(alphas=(0.05, 0.5))).analyze(path_graph)


class TestJson:
    """Test the JSON document."""

    def test_undefined_entries_are_null(self, path_report):
        """Test that masked entries serialize as null."""
        data = report_to_dict(path_report)
        assert data["schema_version"] == SCHEMA_VERSION
        assert data["z"][1][1] is None
        assert data["z0"][1] is None
        assert data["ratios"][1][1] is None
        assert data["z"][0][0] == pytest.approx(0.7071067811865476)

    def test_u_values_clamped(self, path_report):
        """Test that U-values above one are written as one."""
        data = report_to_dict(path_report)
        assert data["u"][0][0] == 1.0
        assert data["bound"] == "chebyshev"

    def test_graph_block(self, path_report):
        """Test the graph summary."""
        graph = report_to_dict(path_report)["graph"]
        assert graph["n"] == 3 and graph["m"] == 2 and graph["pi3"] == 1
        assert graph["color_labels"] == ["red", "blue"]
        assert graph["class_sizes"] == [2, 1]

    def test_multiple_testing_block(self, path_report):
        """Test one entry per alpha with labelled decisions."""
        levels = report_to_dict(path_report)["multiple_testing"]
        assert [level["alpha"] for level in levels] == [0.05, 0.5]
        assert levels[0]["diagonal"]["q"] == 0
        assert levels[1]["marginal_threshold"] == pytest.approx(2**0.5)

    def test_heterophilic_pairs_labelled(self, path_report):
        """Test that heterophilic pairs are written as colour labels."""
        z = np.ma.masked_array([[0.0, 6.0], [6.0, 0.0]])
        report = dataclasses.replace(path_report, levels=(multiple_testing(z, 0.05),))
        assert path_report.label_pair((0, 1)) == ("red", "blue")
        assert report_to_dict(report)["multiple_testing"][0]["heterophilic"] == [["red", "blue"]]
        assert "red-blue" in ReportWriter().generate_markdown(report)

    def test_no_nan_in_text(self, path_report):
        """Test that the canonical text is strict JSON."""
        text = ReportWriter().generate_json(path_report)
        assert "NaN" not in text and "Infinity" not in text
        assert text.endswith("\n")
        json.loads(text)

    def test_round_trip(self, path_report, tmp_path):
        """Test that a saved report reads back and re-serializes byte for byte."""
        writer = ReportWriter()
        path = tmp_path / "report.json"
        writer.save_json(path_report, path)
        loaded = load_report(path)
        assert loaded.color_labels == path_report.color_labels
        assert loaded.z.mask.tolist() == path_report.z.mask.tolist()
        assert writer.generate_json(loaded) == path.read_text(encoding="utf-8")

    def test_deterministic(self, two_triangles):
        """Test that repeated analyses give identical text."""
        single = HomophilyCalculator(StatsConfig(threads=1)).analyze(two_triangles)
        pooled = HomophilyCalculator(StatsConfig(threads=2)).analyze(two_triangles)
        writer = ReportWriter()
        assert writer.generate_json(single) == writer.generate_json(pooled)

    def test_schema_version_checked(self, path_report):
        """Test that an unknown schema version is rejected."""
        data = report_to_dict(path_report)
        data["schema_version"] = 99
        with pytest.raises(ValueError, match="schema version"):
            report_from_dict(data)

    def test_missing_file(self, tmp_path):
        """Test that a missing report file is reported."""
        with pytest.raises(FileNotFoundError):
            load_report(tmp_path / "none.json")


class TestCsv:
    """Test the long-form CSV."""

    def test_layout(self, path_report):
        """Test header, row count and empty undefined cells."""
        rows = list(csv.reader(io.StringIO(ReportWriter().generate_csv(path_report))))
        assert rows[0] == ["quantity", "class_i", "class_j", "value"]
        # six matrices over three pairs, five vectors over two classes
        assert len(rows) == 1 + 6 * 3 + 5 * 2
        by_key = {(q, i, j): value for q, i, j, value in rows[1:]}
        assert by_key[("z", "blue", "blue")] == ""
        assert by_key[("observed", "red", "blue")] == "1"
        assert by_key[("u", "red", "red")] == "1.0"
        assert by_key[("observed_isolated", "blue", "")] == "1"
        assert float(by_key[("var_isolated", "red", "")]) == pytest.approx(8 / 9)


class TestMarkdown:
    """Test the Markdown summary."""

    def test_sections(self, path_graph, path_report):
        """Test that every section is rendered."""
        text = ReportWriter().generate_markdown(
            path_report, class_rows=class_table(path_graph), figures=["heatmap.svg"]
        )
        for heading in (
            "# Homophily report",
            "## Network",
            "## Classes",
            "## z-scores of edge counts",
            "## z-score statistics",
            "## Multiple testing (Chebyshev bounds)",
            "## Figures",
        ):
            assert heading in text
        assert "| red | 2 | 1 | 0 |" in text
        assert "undefined" in text
        assert "![heatmap.svg](heatmap.svg)" in text

    def test_excluded_class(self, path_report):
        """Test that excluded classes are listed."""
        text = ReportWriter().generate_markdown(path_report, exclude=["blue"])
        assert "Excluded classes: blue." in text
        assert "## Figures" not in text

    def test_save_creates_directories(self, path_report, tmp_path):
        """Test that save paths get their parent directories."""
        target = tmp_path / "nested" / "out" / "report.md"
        ReportWriter().save_markdown(path_report, target)
        assert target.read_text(encoding="utf-8").startswith("# Homophily report")
