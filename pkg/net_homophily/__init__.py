"""
net-homophily - exact homophily z-scores for node-colored networks

Counts of intra-class and inter-class edges, and of nodes without a
same-class neighbour, are compared with their exact means and variances under
uniformly random colourings that keep every class size fixed.

Example usage:
    >>> from net_homophily import build_graph, HomophilyCalculator, ReportWriter
    >>>
    >>> graph = build_graph(
    ...     edges=[("a", "b"), ("b", "c")],
    ...     node_colors={"a": "red", "b": "red", "c": "blue"},
    ... )
    >>> report = HomophilyCalculator().analyze(graph)
    >>> round(float(report.z[0, 0]), 4)
    0.7071
    >>> print(ReportWriter().generate_json(report))  # doctest: +SKIP
"""

__version__ = "0.1.0"
__description__ = "Exact z-scores of homophily and heterophily in node-colored networks"

from .combinatorics import (
    falling_power,
    falling_ratio,
    falling_ratio_table,
    hypergeom_pmf,
    joint_color_prob,
    multinomial,
    prob_all_color,
)

from .graph import (
    ColoredGraph,
    ColorProfile,
    DegreeHistogram,
    GraphBuildError,
    build_graph,
    common_neighbor_count,
    count_p3,
    degree_histogram,
    distance2_pairs,
    sum_squared_degrees,
    union_neighborhood_size,
)

from .stats import (
    EdgeBlockCounts,
    HomophilyCalculator,
    HomophilyReport,
    MomentTable,
    MultipleTestingLevel,
    NumericalInstabilityError,
    PositiveSet,
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

from .oracle import (
    EnumerationBudgetError,
    NullSampleSummary,
    compare_moments,
    enumerate_moments,
    sample_moments,
)

from .ingest import (
    BucketingRule,
    IngestError,
    PreprocessConfig,
    load_colored_graph,
)

from .report import ReportWriter, load_report

from .plots import HeatmapSpec, HeatmapSpecs, HomophilyPlotter

__all__ = [
    # Combinatorics
    "falling_power",
    "falling_ratio",
    "falling_ratio_table",
    "hypergeom_pmf",
    "joint_color_prob",
    "multinomial",
    "prob_all_color",

    # Graph model
    "ColoredGraph",
    "ColorProfile",
    "DegreeHistogram",
    "GraphBuildError",
    "build_graph",
    "common_neighbor_count",
    "count_p3",
    "degree_histogram",
    "distance2_pairs",
    "sum_squared_degrees",
    "union_neighborhood_size",

    # Statistics
    "EdgeBlockCounts",
    "HomophilyCalculator",
    "HomophilyReport",
    "MomentTable",
    "MultipleTestingLevel",
    "NumericalInstabilityError",
    "PositiveSet",
    "StatsConfig",
    "block_edge_counts",
    "expected_edges",
    "expected_isolated",
    "homophily_ratios",
    "moment_table",
    "multiple_testing",
    "positive_set",
    "synthetic_index",
    "u_values",
    "variance_edges",
    "variance_isolated_fast",
    "variance_isolated_naive",
    "zscore_arrays",
    "zscore_summary",

    # Null-model oracle
    "EnumerationBudgetError",
    "NullSampleSummary",
    "compare_moments",
    "enumerate_moments",
    "sample_moments",

    # Input
    "BucketingRule",
    "IngestError",
    "PreprocessConfig",
    "load_colored_graph",

    # Output
    "HeatmapSpec",
    "HeatmapSpecs",
    "HomophilyPlotter",
    "ReportWriter",
    "load_report",
]
