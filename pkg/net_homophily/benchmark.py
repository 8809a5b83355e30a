"""
Synthetic graphs and timing of the z-score pipelines.

Edge z-scores cost O(n + m) after the graph is built; the isolated-node
variances cost O(sum of squared degrees). The timing table reports both
throughputs so that the two claims can be checked on any machine.
"""

import csv
import logging
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np

from .graph import ColoredGraph, sum_squared_degrees
from .stats import edge_zscores, isolated_moments

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class GeneratorParams:
    """Size and seed of a uniform random colored graph."""

    n: int
    m: int
    s: int
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate the parameters after initialization."""
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if not 1 <= self.s <= self.n:
            raise ValueError(f"s must be in [1, n], got {self.s}")
        if not 0 <= self.m <= self.n * (self.n - 1) // 2:
            raise ValueError(f"m must be in [0, n(n-1)/2], got {self.m}")


@dataclass(frozen=True)
class BenchmarkRow:
    """Median timings on one synthetic graph."""

    n: int
    m: int
    s: int
    sum_squared_degrees: int
    repetitions: int
    edge_seconds: float
    edges_per_second: float
    isolated_seconds: Optional[float] = None
    squared_degrees_per_second: Optional[float] = None


def random_colored_graph(params: GeneratorParams) -> ColoredGraph:
    """
    Uniform random simple graph with exactly m edges and balanced random colours.

    Node pairs are drawn uniformly and deduplicated until m distinct edges are
    available; every colour class gets floor(n/s) or ceil(n/s) nodes.
    """
    rng = np.random.default_rng(params.seed)
    n, m = params.n, params.m
    keys = np.empty(0, dtype=np.int64)
    while len(keys) < m:
        draw = int((m - len(keys)) * 1.1) + 16
        u = rng.integers(0, n, size=draw, dtype=np.int64)
        v = rng.integers(0, n, size=draw, dtype=np.int64)
        proper = u != v
        lo = np.minimum(u[proper], v[proper])
        hi = np.maximum(u[proper], v[proper])
        candidates = np.concatenate([keys, lo * n + hi])
        _, first = np.unique(candidates, return_index=True)
        keys = candidates[np.sort(first)]
    keys = keys[:m]
    colors = rng.permutation(np.arange(n, dtype=np.int32) % params.s)
    labels = [f"c{i}" for i in range(params.s)]
    return ColoredGraph.from_edge_arrays(keys // n, keys % n, colors, labels)


def _median_seconds(task: Callable[[], object], repetitions: int) -> float:
    timings = []
    for _ in range(repetitions):
        start = time.perf_counter()
        task()
        timings.append(time.perf_counter() - start)
    return float(np.median(timings))


def time_graph(graph: ColoredGraph, repetitions: int = 3, isolated: bool = False) -> BenchmarkRow:
    """
    Median wall-clock times of the pipelines on a prebuilt graph.

    Args:
        graph: The graph; construction is not timed.
        repetitions: Number of timed runs per pipeline.
        isolated: Also time the isolated-node moments.
    """
    if repetitions < 1:
        raise ValueError(f"repetitions must be positive, got {repetitions}")
    profile = graph.profile().counts
    squares = sum_squared_degrees(graph)

    edge_seconds = _median_seconds(lambda: edge_zscores(graph), repetitions)
    isolated_seconds = None
    squares_rate = None
    if isolated:
        isolated_seconds = _median_seconds(lambda: isolated_moments(graph, profile), repetitions)
        squares_rate = squares / isolated_seconds if isolated_seconds > 0 else float("inf")

    row = BenchmarkRow(
        n=graph.n,
        m=graph.m,
        s=graph.s,
        sum_squared_degrees=squares,
        repetitions=repetitions,
        edge_seconds=edge_seconds,
        edges_per_second=graph.m / edge_seconds if edge_seconds > 0 else float("inf"),
        isolated_seconds=isolated_seconds,
        squared_degrees_per_second=squares_rate,
    )
    logger.info("n=%d m=%d: edge z-scores %.4fs", row.n, row.m, row.edge_seconds)
    return row


def run_benchmark(
    params: Sequence[GeneratorParams], repetitions: int = 3, isolated: bool = False
) -> List[BenchmarkRow]:
    """Generate each graph and time it."""
    rows = []
    for item in params:
        graph = random_colored_graph(item)
        rows.append(time_graph(graph, repetitions, isolated))
    return rows


def write_benchmark_csv(rows: Sequence[BenchmarkRow], output_path: PathLike) -> None:
    """Save the timing table; absent isolated timings are empty cells."""
    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    fields = list(BenchmarkRow.__dataclass_fields__)
    with open(output_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({key: "" if value is None else value for key, value in asdict(row).items()})
    logger.info("Wrote %s", output_path)
