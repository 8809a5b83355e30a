"""
Ground truth for the closed-form moments.

Small graphs are checked against every colouring with the given profile, larger
ones against seeded uniform samples of colourings. Both modes report the same
statistics as :class:`net_homophily.stats.MomentTable`: every M^{i,j} with
i <= j and every L^i.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .combinatorics import log_multinomial, multinomial
from .graph import ColoredGraph
from .stats import MomentTable

logger = logging.getLogger(__name__)

ENUMERATION_BUDGET = 10**7
BATCH_SIZE = 4096


class EnumerationBudgetError(ValueError):
    """Raised when exact enumeration would visit more colourings than allowed."""


@dataclass(frozen=True)
class NullSampleSummary:
    """
    Empirical moments of the null-model statistics.

    In exact mode the moments are population moments over all colourings and
    the standard errors are ``None``. In sampled mode variances use the
    unbiased N - 1 estimator.
    """

    mean_edges: np.ndarray
    var_edges: np.ndarray
    mean_isolated: np.ndarray
    var_isolated: np.ndarray
    samples: int
    exact: bool
    se_mean_edges: Optional[np.ndarray] = None
    se_var_edges: Optional[np.ndarray] = None
    se_mean_isolated: Optional[np.ndarray] = None
    se_var_isolated: Optional[np.ndarray] = None

    @property
    def s(self) -> int:
        return len(self.mean_isolated)


@dataclass(frozen=True)
class ComparisonRow:
    """Closed-form value next to its oracle estimate."""

    statistic: str
    moment: str  # "mean" or "variance"
    closed_form: float
    oracle: float
    relative_error: float
    standard_error: Optional[float]
    within: bool


def enumerate_moments(
    graph: ColoredGraph,
    profile: Optional[Sequence[int]] = None,
    budget: int = ENUMERATION_BUDGET,
) -> NullSampleSummary:
    """
    Exact moments over every colouring of ``graph`` with class sizes ``profile``.

    Colour words are visited in lexicographic order by next-permutation, so
    memory stays constant. Moments are accumulated as exact integer power sums.

    Raises:
        EnumerationBudgetError: if the number of colourings exceeds ``budget``.
    """
    counts = _counts(graph, profile)
    if log_multinomial(graph.n, counts) > math.log(budget) + 1e-9:
        raise EnumerationBudgetError(
            f"profile {list(counts)} on {graph.n} nodes has more than {budget} colourings; "
            "use sampled mode"
        )
    total = multinomial(graph.n, counts)
    logger.info("Enumerating %d colourings of n=%d", total, graph.n)

    src, dst = graph.edge_arrays()
    s = len(counts)
    width = s * (s + 1) // 2 + s
    first = [0] * width
    second = [0] * width
    visited = 0
    for batch in _colourings(counts):
        values = _statistics(batch, src, dst, s, graph.n).astype(np.int64)
        visited += len(batch)
        column_sums = values.sum(axis=0)
        square_sums = (values * values).sum(axis=0)
        for k in range(width):
            first[k] += int(column_sums[k])
            second[k] += int(square_sums[k])
    if visited != total:
        raise AssertionError(f"visited {visited} colourings, expected {total}")

    means = [Fraction(a, total) for a in first]
    variances = [Fraction(b, total) - mean * mean for b, mean in zip(second, means)]
    mean_edges, mean_isolated = _unpack(np.array([float(x) for x in means]), s)
    var_edges, var_isolated = _unpack(np.array([float(x) for x in variances]), s)
    return NullSampleSummary(
        mean_edges=mean_edges,
        var_edges=var_edges,
        mean_isolated=mean_isolated,
        var_isolated=var_isolated,
        samples=total,
        exact=True,
    )


def sample_moments(
    graph: ColoredGraph,
    profile: Optional[Sequence[int]] = None,
    samples: int = 100_000,
    seed: int = 0,
    threads: int = 1,
    chunk_size: int = BATCH_SIZE,
) -> NullSampleSummary:
    """
    Monte Carlo moments from uniformly random colourings.

    Args:
        graph: The graph; its own colouring is ignored.
        profile: Class sizes. Defaults to the graph's profile.
        samples: Number of colourings N, at least 2.
        seed: Root seed. The same seed gives bit-identical results for any
            number of threads.
        threads: Worker threads; chunks are merged in chunk order.
        chunk_size: Colourings per chunk. Each chunk has its own spawned seed.
    """
    if samples < 2:
        raise ValueError(f"sample_moments needs at least 2 samples, got {samples}")
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    counts = _counts(graph, profile)
    s = len(counts)
    word = np.repeat(np.arange(s, dtype=np.int32), counts)
    src, dst = graph.edge_arrays()

    sizes = [chunk_size] * (samples // chunk_size)
    if samples % chunk_size:
        sizes.append(samples % chunk_size)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    logger.info("Sampling %d colourings in %d chunks", samples, len(sizes))

    def run_chunk(index: int) -> _RunningMoments:
        rng = np.random.default_rng(seeds[index])
        batch = rng.permuted(np.tile(word, (sizes[index], 1)), axis=1)
        return _RunningMoments.of(_statistics(batch, src, dst, s, graph.n).astype(np.float64))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run_chunk, range(len(sizes))))
    else:
        parts = [run_chunk(index) for index in range(len(sizes))]

    total = parts[0]
    for part in parts[1:]:
        total = total.merge(part)

    variance = total.m2 / (total.count - 1)
    se_mean = np.sqrt(variance / total.count)
    fourth = total.m4 / total.count
    spread = fourth - variance**2 * (total.count - 3) / (total.count - 1)
    se_variance = np.sqrt(np.maximum(spread, 0.0) / total.count)

    mean_edges, mean_isolated = _unpack(total.mean, s)
    var_edges, var_isolated = _unpack(variance, s)
    se_mean_edges, se_mean_isolated = _unpack(se_mean, s)
    se_var_edges, se_var_isolated = _unpack(se_variance, s)
    return NullSampleSummary(
        mean_edges=mean_edges,
        var_edges=var_edges,
        mean_isolated=mean_isolated,
        var_isolated=var_isolated,
        samples=samples,
        exact=False,
        se_mean_edges=se_mean_edges,
        se_var_edges=se_var_edges,
        se_mean_isolated=se_mean_isolated,
        se_var_isolated=se_var_isolated,
    )


def compare_moments(
    moments: MomentTable,
    summary: NullSampleSummary,
    labels: Optional[Sequence[str]] = None,
    tolerance: float = 1e-9,
    standard_errors: float = 4.0,
) -> List[ComparisonRow]:
    """
    Pair every closed-form moment with its oracle value.

    The relative error is |a - b| / max(|a|, |b|, 1), so values below one are
    compared absolutely. Exact rows are ``within`` when the relative error is
    at most ``tolerance``; sampled rows when the difference is at most
    ``standard_errors`` standard errors.
    """
    if moments.s != summary.s:
        raise ValueError(f"moment table has {moments.s} colours, summary {summary.s}")
    s = moments.s
    names = list(labels) if labels is not None else [str(i) for i in range(s)]

    rows: List[ComparisonRow] = []
    for i in range(s):
        for j in range(i, s):
            statistic = f"M[{names[i]},{names[j]}]"
            rows.append(
                _row(statistic, "mean", moments.mean_edges[i, j], summary.mean_edges[i, j],
                     _pick(summary.se_mean_edges, (i, j)), tolerance, standard_errors)
            )
            rows.append(
                _row(statistic, "variance", moments.var_edges[i, j], summary.var_edges[i, j],
                     _pick(summary.se_var_edges, (i, j)), tolerance, standard_errors)
            )
    for i in range(s):
        statistic = f"L[{names[i]}]"
        rows.append(
            _row(statistic, "mean", moments.mean_isolated[i], summary.mean_isolated[i],
                 _pick(summary.se_mean_isolated, i), tolerance, standard_errors)
        )
        rows.append(
            _row(statistic, "variance", moments.var_isolated[i], summary.var_isolated[i],
                 _pick(summary.se_var_isolated, i), tolerance, standard_errors)
        )
    return rows


def _row(
    statistic: str,
    moment: str,
    closed_form: float,
    oracle: float,
    standard_error: Optional[float],
    tolerance: float,
    standard_errors: float,
) -> ComparisonRow:
    closed_form, oracle = float(closed_form), float(oracle)
    difference = abs(closed_form - oracle)
    relative = difference / max(abs(closed_form), abs(oracle), 1.0)
    if standard_error is None:
        within = relative <= tolerance
    else:
        within = difference <= standard_errors * standard_error + tolerance
    return ComparisonRow(statistic, moment, closed_form, oracle, relative, standard_error, within)


def _pick(array: Optional[np.ndarray], index) -> Optional[float]:
    return None if array is None else float(array[index])


@dataclass(frozen=True)
class _RunningMoments:
    """Count, mean and central power sums M2..M4 per statistic."""

    count: int
    mean: np.ndarray
    m2: np.ndarray
    m3: np.ndarray
    m4: np.ndarray

    @classmethod
    def of(cls, values: np.ndarray) -> "_RunningMoments":
        mean = values.mean(axis=0)
        deviation = values - mean
        squared = deviation * deviation
        return cls(
            count=len(values),
            mean=mean,
            m2=squared.sum(axis=0),
            m3=(squared * deviation).sum(axis=0),
            m4=(squared * squared).sum(axis=0),
        )

    def merge(self, other: "_RunningMoments") -> "_RunningMoments":
        """Pairwise update of the central moments of two disjoint samples."""
        na, nb = self.count, other.count
        n = na + nb
        delta = other.mean - self.mean
        delta2 = delta * delta
        mean = self.mean + delta * nb / n
        m2 = self.m2 + other.m2 + delta2 * na * nb / n
        m3 = (
            self.m3
            + other.m3
            + delta2 * delta * na * nb * (na - nb) / n**2
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n
        )
        m4 = (
            self.m4
            + other.m4
            + delta2 * delta2 * na * nb * (na * na - na * nb + nb * nb) / n**3
            + 6.0 * delta2 * (na * na * other.m2 + nb * nb * self.m2) / n**2
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n
        )
        return _RunningMoments(count=n, mean=mean, m2=m2, m3=m3, m4=m4)


def _counts(graph: ColoredGraph, profile: Optional[Sequence[int]]) -> Tuple[int, ...]:
    counts = graph.profile().counts if profile is None else tuple(int(c) for c in profile)
    if any(c < 0 for c in counts):
        raise ValueError(f"class sizes must be nonnegative, got {list(counts)}")
    if sum(counts) != graph.n:
        raise ValueError(f"profile sums to {sum(counts)}, expected n={graph.n}")
    return counts


def _colourings(counts: Sequence[int], batch: int = BATCH_SIZE) -> Iterator[np.ndarray]:
    """Every distinct arrangement of the colour word, in lexicographic order."""
    word = [colour for colour, count in enumerate(counts) for _ in range(count)]
    rows: List[List[int]] = []
    while True:
        rows.append(list(word))
        if len(rows) == batch:
            yield np.array(rows, dtype=np.int32).reshape(len(rows), len(word))
            rows = []
        if not _next_permutation(word):
            break
    if rows:
        yield np.array(rows, dtype=np.int32).reshape(len(rows), len(word))


def _next_permutation(word: List[int]) -> bool:
    i = len(word) - 2
    while i >= 0 and word[i] >= word[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = len(word) - 1
    while word[j] <= word[i]:
        j -= 1
    word[i], word[j] = word[j], word[i]
    word[i + 1 :] = reversed(word[i + 1 :])
    return True


def _statistics(
    colourings: np.ndarray, src: np.ndarray, dst: np.ndarray, s: int, n: int
) -> np.ndarray:
    """
    Statistics of a batch of colourings, one row per colouring.

    Columns are M^{i,j} for i <= j in row-major order, then L^0 .. L^{s-1}.
    """
    rows = len(colourings)
    cu = colourings[:, src]
    cv = colourings[:, dst]
    columns: List[np.ndarray] = []
    for i in range(s):
        at_u, at_v = cu == i, cv == i
        columns.append(np.count_nonzero(at_u & at_v, axis=1))
        for j in range(i + 1, s):
            hit = (at_u & (cv == j)) | ((cu == j) & at_v)
            columns.append(np.count_nonzero(hit, axis=1))

    monochrome = cu == cv
    touched = np.zeros((rows, n + 1), dtype=bool)
    row_index = np.arange(rows)[:, None]
    touched[row_index, np.where(monochrome, src, n)] = True
    touched[row_index, np.where(monochrome, dst, n)] = True
    free = ~touched[:, :n]
    for i in range(s):
        columns.append(np.count_nonzero((colourings == i) & free, axis=1))
    return np.stack(columns, axis=1)


def _unpack(values: np.ndarray, s: int) -> Tuple[np.ndarray, np.ndarray]:
    matrix = np.zeros((s, s), dtype=np.float64)
    k = 0
    for i in range(s):
        for j in range(i, s):
            matrix[i, j] = matrix[j, i] = values[k]
            k += 1
    return matrix, np.asarray(values[k:], dtype=np.float64)
