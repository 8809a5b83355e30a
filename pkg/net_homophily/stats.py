"""
Homophily statistics for colored graphs.

This module computes observed intra-/inter-class edge counts and per-class
isolated-node counts, their exact means and variances under the uniform random
colouring null model, and the derived z-score arrays, U-value bounds,
multiple-testing sets and the synthetic homophily index.

Undefined entries (zero variance or zero expectation) are carried as masked
entries of ``numpy.ma`` arrays, never as NaN or infinity.
"""

import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Collection, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from .combinatorics import falling_ratio, falling_ratio_table
from .graph import (
    ColoredGraph,
    ColorProfile,
    count_p3,
    degree_histogram,
    iter_distance2_blocks,
    sum_squared_degrees,
)

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]

# Flush size of the distance-2 accumulator.
_PAIR_CHUNK = 1 << 20

# Variance sums within this many ulps of the largest term are zero.
_ROUNDING = 16 * np.finfo(np.float64).eps


class NumericalInstabilityError(ArithmeticError):
    """Raised when a variance comes out clearly negative after compensated summation."""


@dataclass
class StatsConfig:
    """Tunable parameters of the homophily analysis."""

    zero_tolerance: float = 1e-12
    negative_variance_tolerance: float = 1e-6
    cantelli: bool = False
    alphas: Tuple[float, ...] = (0.05,)
    threads: int = 1
    fast_isolated: bool = True

    def __post_init__(self) -> None:
        """Validate the configuration after initialization."""
        if self.zero_tolerance < 0:
            raise ValueError(f"zero_tolerance must be nonnegative, got {self.zero_tolerance}")
        if self.negative_variance_tolerance < 0:
            raise ValueError("negative_variance_tolerance must be nonnegative")
        if self.threads < 1:
            raise ValueError(f"threads must be at least 1, got {self.threads}")
        self.alphas = tuple(float(alpha) for alpha in self.alphas)
        for alpha in self.alphas:
            _check_alpha(alpha)


@dataclass(frozen=True)
class EdgeBlockCounts:
    """Observed (i, j)-edge counts and per-class isolated-node counts."""

    edges: np.ndarray  # symmetric s x s, int64
    isolated: np.ndarray  # length s, int64

    @property
    def s(self) -> int:
        return len(self.isolated)

    @property
    def total_edges(self) -> int:
        """Sum over i <= j of m_ij; equals m."""
        return int(np.triu(self.edges).sum())


@dataclass(frozen=True)
class MomentTable:
    """Null-model means and variances of every M^{i,j} and L^i."""

    mean_edges: np.ndarray
    var_edges: np.ndarray
    mean_isolated: np.ndarray
    var_isolated: np.ndarray

    @property
    def s(self) -> int:
        return len(self.mean_isolated)

    def coefficient_of_variation(self) -> np.ma.MaskedArray:
        """sigma_ij / mean_ij, masked where the mean vanishes."""
        undefined = self.mean_edges <= 0
        safe = np.where(undefined, 1.0, self.mean_edges)
        return np.ma.masked_array(np.sqrt(self.var_edges) / safe, mask=undefined)


@dataclass(frozen=True)
class PositiveSet:
    """Largest subset of candidate tests whose U-values fit in the budget alpha."""

    alpha: float
    selected: Tuple[Pair, ...]
    budget_used: float

    @property
    def q(self) -> int:
        """Number of tests jointly positive at level alpha."""
        return len(self.selected)


@dataclass(frozen=True)
class MultipleTestingLevel:
    """Decisions of the marginal and Bonferroni-corrected procedures at one level."""

    alpha: float
    marginal_threshold: float
    bonferroni_threshold: float
    homophilic: Tuple[int, ...]
    jointly_homophilic: Tuple[int, ...]
    heterophilic: Tuple[Pair, ...]
    diagonal: PositiveSet
    off_diagonal: PositiveSet


@dataclass
class HomophilyReport:
    """Complete result of a homophily analysis of one colored graph."""

    color_labels: Tuple[str, ...]
    class_sizes: Tuple[int, ...]
    n: int
    m: int
    pi3: int
    sum_squared_degrees: int
    density: float
    counts: EdgeBlockCounts
    moments: MomentTable
    z: np.ma.MaskedArray
    z0: np.ma.MaskedArray
    u: np.ma.MaskedArray
    u0: np.ma.MaskedArray
    ratios: np.ma.MaskedArray
    synthetic_index: float
    cantelli: bool = False
    levels: Tuple[MultipleTestingLevel, ...] = field(default_factory=tuple)

    @property
    def s(self) -> int:
        return len(self.color_labels)

    def label_pair(self, pair: Pair) -> Tuple[str, str]:
        """Colour labels of an index pair."""
        return self.color_labels[pair[0]], self.color_labels[pair[1]]


@dataclass(frozen=True)
class ZScoreSummary:
    """Descriptive statistics of the diagonal and off-diagonal z-scores."""

    excluded: Tuple[str, ...]
    diagonal_mean: Optional[float]
    diagonal_std: Optional[float]
    diagonal_min: Optional[float]
    diagonal_max: Optional[float]
    off_diagonal_mean: Optional[float]
    off_diagonal_std: Optional[float]
    off_diagonal_min: Optional[float]
    off_diagonal_max: Optional[float]
    diagonal_above_5: Optional[float]
    off_diagonal_below_minus_1: Optional[float]
    off_diagonal_negative: Optional[float]


@dataclass(frozen=True)
class ClassRow:
    """Per-class size, intra-class edges and isolated nodes."""

    label: str
    nodes: int
    intra_edges: int
    isolated: int


# ---------------------------------------------------------------------------
# Observed counts
# ---------------------------------------------------------------------------


def block_edge_counts(graph: ColoredGraph) -> EdgeBlockCounts:
    """Tally every edge by its unordered colour pair and count i-isolated nodes."""
    s = graph.s
    src, dst = graph.edge_arrays()
    ci = graph.colors[src].astype(np.int64)
    cj = graph.colors[dst].astype(np.int64)
    lo, hi = np.minimum(ci, cj), np.maximum(ci, cj)
    upper = np.bincount(lo * s + hi, minlength=s * s).reshape(s, s).astype(np.int64)
    edges = upper + upper.T - np.diag(np.diag(upper))

    monochrome = ci == cj
    touched = np.zeros(graph.n, dtype=bool)
    touched[src[monochrome]] = True
    touched[dst[monochrome]] = True
    isolated = np.bincount(graph.colors[~touched], minlength=s).astype(np.int64)
    return EdgeBlockCounts(edges=edges, isolated=isolated)


def class_table(graph: ColoredGraph, counts: Optional[EdgeBlockCounts] = None) -> List[ClassRow]:
    """One row per colour class: size, intra-class edges and isolated nodes."""
    if counts is None:
        counts = block_edge_counts(graph)
    sizes = graph.profile().counts
    return [
        ClassRow(
            label=label,
            nodes=sizes[i],
            intra_edges=int(counts.edges[i, i]),
            isolated=int(counts.isolated[i]),
        )
        for i, label in enumerate(graph.color_labels)
    ]


# ---------------------------------------------------------------------------
# Closed-form moments
# ---------------------------------------------------------------------------


def expected_edges(n: int, m: int, profile: Sequence[int]) -> np.ndarray:
    """
    Expected (i, j)-edge counts under random colouring.

    The diagonal is m * c_i^2 / n^2 and the off-diagonal 2m * c_i * c_j / n^2
    (falling powers), so that the entries with i <= j sum to m.
    """
    if n < 2:
        raise ValueError(f"expected_edges needs n >= 2, got n={n}")
    counts = _profile_counts(profile, n)
    s = len(counts)
    pair_denominator = n * (n - 1)
    means = np.empty((s, s), dtype=np.float64)
    for i in range(s):
        means[i, i] = m * falling_ratio(counts[i], n, 2)
        for j in range(i + 1, s):
            value = 2.0 * m * counts[i] * counts[j] / pair_denominator
            means[i, j] = means[j, i] = value
    return means


def variance_edges(
    n: int,
    m: int,
    pi3: int,
    profile: Sequence[int],
    tolerance: float = 1e-6,
) -> np.ndarray:
    """
    Variances of the (i, j)-edge counts under random colouring.

    Args:
        n: Number of nodes.
        m: Number of edges.
        pi3: Number of two-edge paths of the graph.
        profile: Class sizes summing to n.
        tolerance: Relative limit below which a negative rounding residue is
            clamped to zero instead of raising.

    Returns:
        Symmetric s x s matrix of variances.
    """
    if n < 2:
        raise ValueError(f"variance_edges needs n >= 2, got n={n}")
    counts = _profile_counts(profile, n)
    s = len(counts)
    pairs_of_edges = m * (m - 1) // 2
    variances = np.empty((s, s), dtype=np.float64)

    for i in range(s):
        c = counts[i]
        p2 = falling_ratio(c, n, 2)
        p3 = falling_ratio(c, n, 3)
        p4 = falling_ratio(c, n, 4)
        mean = m * p2
        terms = [mean, -mean * mean, 2.0 * (p3 - p4) * pi3, 2.0 * p4 * pairs_of_edges]
        variances[i, i] = combine_variance(terms, f"M[{i},{i}]", tolerance)

    for i in range(s):
        for j in range(i + 1, s):
            ci, cj = counts[i], counts[j]
            mean = 2.0 * m * ci * cj / (n * (n - 1))
            # Both edges of a path are (i, j): the middle node is i or j.
            adjacent = 0.0
            if ci and cj:
                adjacent = (
                    ci * falling_ratio(cj, n - 1, 2) / n + cj * falling_ratio(ci, n - 1, 2) / n
                )
            disjoint = 4.0 * _two_pairs_probability(n, ci, cj)
            terms = [
                mean,
                -mean * mean,
                2.0 * (adjacent - disjoint) * pi3,
                2.0 * disjoint * pairs_of_edges,
            ]
            variances[i, j] = variances[j, i] = combine_variance(terms, f"M[{i},{j}]", tolerance)
    return variances


def _two_pairs_probability(n: int, ci: int, cj: int) -> float:
    # c_i^2 c_j^2 / n^4 for two fixed disjoint node pairs.
    if n < 4 or ci < 2 or cj < 2:
        return 0.0
    return falling_ratio(ci, n, 2) * falling_ratio(cj, n - 2, 2)


def expected_isolated(graph: ColoredGraph, profile: Sequence[int], i: int) -> float:
    """
    Expected number of i-isolated nodes: (c_i/n) * sum_v (n-c_i)^deg(v) / (n-1)^deg(v).

    One falling ratio per distinct degree, weighted by the degree histogram.
    """
    n = graph.n
    c = _colour_size(profile, n, i)
    if n == 1:
        return 1.0
    histogram = degree_histogram(graph)
    table = falling_ratio_table(n - c, n - 1, int(histogram.degrees.max()))
    weighted = histogram.counts * table[histogram.degrees]
    return c / n * math.fsum(weighted)


def variance_isolated_naive(
    graph: ColoredGraph, profile: Sequence[int], i: int, tolerance: float = 1e-6
) -> float:
    """Variance of L^i summing b(u, v) over every ordered non-adjacent pair directly."""
    c = _colour_size(profile, graph.n, i)
    mean = expected_isolated(graph, profile, i)
    return _isolated_variance(graph.n, c, mean, _union_counts_naive(graph), i, tolerance)


def variance_isolated_fast(
    graph: ColoredGraph, profile: Sequence[int], i: int, tolerance: float = 1e-6
) -> float:
    """
    Variance of L^i through the degree-histogram decomposition.

    All ordered pairs are first summed with b'(u, v) = deg(u) + deg(v) over the
    histogram; the diagonal and the adjacent pairs are then subtracted and the
    distance-2 pairs, whose union is smaller than b', corrected.
    """
    c = _colour_size(profile, graph.n, i)
    mean = expected_isolated(graph, profile, i)
    return _isolated_variance(graph.n, c, mean, _union_counts_fast(graph), i, tolerance)


def _isolated_variance(
    n: int, c: int, mean: float, union_counts: np.ndarray, i: int, tolerance: float
) -> float:
    terms = [mean, -mean * mean]
    # c_i^2 vanishes below two nodes of the colour.
    if c >= 2 and len(union_counts):
        table = falling_ratio_table(n - c, n - 2, len(union_counts) - 1)
        pair_sum = math.fsum(union_counts * table)
        terms.append(falling_ratio(c, n, 2) * pair_sum)
    return combine_variance(terms, f"L[{i}]", tolerance)


def _union_counts_naive(graph: ColoredGraph, block: int = 512) -> np.ndarray:
    """Number of ordered non-adjacent pairs u != v with each union size b(u, v)."""
    n = graph.n
    degrees = graph.degrees.astype(np.int64)
    size = 2 * int(degrees.max()) + 1 if n else 0
    counts = np.zeros(size, dtype=np.int64)
    if n < 2:
        return counts
    adjacency = sparse.csr_matrix(
        (np.ones(len(graph.indices), dtype=np.int64), graph.indices, graph.indptr),
        shape=(n, n),
    )
    for start in range(0, n, block):
        stop = min(n, start + block)
        rows = adjacency[start:stop]
        common = (rows @ adjacency.T).toarray()
        union = degrees[start:stop, None] + degrees[None, :] - common
        keep = rows.toarray() == 0
        keep[np.arange(stop - start), np.arange(start, stop)] = False
        counts += np.bincount(union[keep], minlength=size)
    return counts


def _union_counts_fast(graph: ColoredGraph) -> np.ndarray:
    """Same vector as :func:`_union_counts_naive` in O(k^2 + m + sum deg^2) for k distinct degrees."""
    n = graph.n
    degrees = graph.degrees.astype(np.int64)
    size = 2 * int(degrees.max()) + 1 if n else 0
    if n < 2:
        return np.zeros(size, dtype=np.int64)

    histogram = degree_histogram(graph)
    all_pairs = np.add.outer(histogram.degrees, histogram.degrees).ravel()
    weights = np.outer(histogram.counts, histogram.counts).ravel().astype(np.float64)
    counts = np.rint(np.bincount(all_pairs, weights=weights, minlength=size)).astype(np.int64)

    counts -= np.bincount(2 * degrees, minlength=size)
    src, dst = graph.edge_arrays()
    counts -= 2 * np.bincount(degrees[src] + degrees[dst], minlength=size)

    corrected: List[np.ndarray] = []
    plain: List[np.ndarray] = []
    pending = 0
    for u, ws, common in iter_distance2_blocks(graph):
        union = degrees[u] + degrees[ws]
        plain.append(union)
        corrected.append(union - common)
        pending += len(ws)
        if pending >= _PAIR_CHUNK:
            counts += _pair_correction(corrected, plain, size)
            corrected, plain, pending = [], [], 0
    if pending:
        counts += _pair_correction(corrected, plain, size)
    return counts


def _pair_correction(corrected: List[np.ndarray], plain: List[np.ndarray], size: int) -> np.ndarray:
    # Unordered distance-2 pairs, counted twice for both orders.
    return 2 * (
        np.bincount(np.concatenate(corrected), minlength=size)
        - np.bincount(np.concatenate(plain), minlength=size)
    )


def combine_variance(terms: Iterable[float], name: str, tolerance: float = 1e-6) -> float:
    """
    Add variance terms with compensated summation.

    Raises:
        NumericalInstabilityError: if the sum is negative beyond
            ``tolerance`` times the largest term in absolute value.
    """
    values = list(terms)
    value = math.fsum(values)
    scale = max((abs(term) for term in values), default=0.0)
    if abs(value) <= _ROUNDING * scale:
        return 0.0
    if value > 0 and scale > 0:
        logger.debug("var %s = %.6g, cancellation factor %.3g", name, value, scale / value)
    if value >= 0:
        return value
    if value >= -tolerance * scale:
        warnings.warn(
            f"variance of {name} rounded to {value:.3g}; clamped to 0",
            RuntimeWarning,
            stacklevel=2,
        )
        return 0.0
    raise NumericalInstabilityError(
        f"variance of {name} is {value:.6g}, below -{tolerance:g} x {scale:.6g}"
    )


def isolated_moments(
    graph: ColoredGraph,
    profile: Sequence[int],
    fast: bool = True,
    threads: int = 1,
    tolerance: float = 1e-6,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    E[L^i] and var(L^i) for every colour.

    The pair counts by union size depend on the graph only, so they are
    computed once and shared by the per-colour tasks. Results do not depend on
    the number of threads.
    """
    counts = _profile_counts(profile, graph.n)
    if any(c == 0 for c in counts):
        raise ValueError(f"profile has an empty colour class: {list(counts)}")
    n = graph.n
    union_counts = _union_counts_fast(graph) if fast else _union_counts_naive(graph)
    histogram = degree_histogram(graph)
    max_degree = int(histogram.degrees.max()) if len(histogram.degrees) else 0

    def colour_task(i: int) -> Tuple[float, float]:
        c = counts[i]
        if n == 1:
            return 1.0, 0.0
        table = falling_ratio_table(n - c, n - 1, max_degree)
        mean = c / n * math.fsum(histogram.counts * table[histogram.degrees])
        return mean, _isolated_variance(n, c, mean, union_counts, i, tolerance)

    s = len(counts)
    if threads > 1 and s > 1:
        with ThreadPoolExecutor(max_workers=min(threads, s)) as pool:
            results = list(pool.map(colour_task, range(s)))
    else:
        results = [colour_task(i) for i in range(s)]
    return (
        np.array([mean for mean, _ in results], dtype=np.float64),
        np.array([var for _, var in results], dtype=np.float64),
    )


def moment_table(
    graph: ColoredGraph,
    profile: Optional[Sequence[int]] = None,
    fast: bool = True,
    threads: int = 1,
    tolerance: float = 1e-6,
) -> MomentTable:
    """
    All closed-form moments for a graph under a colour profile.

    Args:
        graph: The graph; its own colouring is ignored when ``profile`` is given.
        profile: Class sizes. Defaults to the graph's profile.
        fast: Use the histogram decomposition for var(L^i).
        threads: Worker threads for the per-colour isolated-node moments.
        tolerance: Negative-variance clamp limit.
    """
    counts = _profile_counts(graph.profile() if profile is None else profile, graph.n)
    mean_isolated, var_isolated = isolated_moments(graph, counts, fast, threads, tolerance)
    return MomentTable(
        mean_edges=expected_edges(graph.n, graph.m, counts),
        var_edges=variance_edges(graph.n, graph.m, count_p3(graph), counts, tolerance),
        mean_isolated=mean_isolated,
        var_isolated=var_isolated,
    )


def edge_zscores(graph: ColoredGraph, zero_tolerance: float = 1e-12) -> np.ma.MaskedArray:
    """Z for the graph's own colouring, without the isolated-node statistics."""
    counts = block_edge_counts(graph)
    profile = graph.profile().counts
    mean = expected_edges(graph.n, graph.m, profile)
    variance = variance_edges(graph.n, graph.m, count_p3(graph), profile)
    return _standardize(counts.edges, mean, variance, zero_tolerance)


# ---------------------------------------------------------------------------
# z-scores and derived quantities
# ---------------------------------------------------------------------------


def zscore_arrays(
    counts: EdgeBlockCounts, moments: MomentTable, zero_tolerance: float = 1e-12
) -> Tuple[np.ma.MaskedArray, np.ma.MaskedArray]:
    """
    z-scores of the observed edge counts and isolated counts.

    Returns:
        ``(Z, z0)``; entries whose standard deviation is at most
        ``zero_tolerance`` are masked.
    """
    z = _standardize(counts.edges, moments.mean_edges, moments.var_edges, zero_tolerance)
    z0 = _standardize(counts.isolated, moments.mean_isolated, moments.var_isolated, zero_tolerance)
    return z, z0


def _standardize(
    observed: np.ndarray, mean: np.ndarray, variance: np.ndarray, zero_tolerance: float
) -> np.ma.MaskedArray:
    sigma = np.sqrt(variance)
    undefined = sigma <= zero_tolerance
    safe = np.where(undefined, 1.0, sigma)
    scores = np.where(undefined, 0.0, (observed - mean) / safe)
    return np.ma.masked_array(scores, mask=undefined)


def u_values(scores: np.ma.MaskedArray, cantelli: bool = False) -> np.ma.MaskedArray:
    """
    Chebyshev bounds z^-2, or Cantelli bounds (1 + z^2)^-1.

    A zero z-score gives an infinite two-sided bound; masked scores stay masked.
    """
    squared = np.square(np.ma.getdata(scores).astype(np.float64))
    with np.errstate(divide="ignore"):
        bounds = 1.0 / (1.0 + squared) if cantelli else 1.0 / squared
    return np.ma.masked_array(bounds, mask=np.ma.getmaskarray(scores))


def positive_set(z: np.ma.MaskedArray, candidates: Iterable[Pair], alpha: float) -> PositiveSet:
    """
    Largest subset of ``candidates`` whose z^-2 values sum to at most alpha.

    Only defined entries with a positive z-score are eligible. Entries are taken
    in ascending z^-2 order, which maximises the subset size.
    """
    _check_alpha(alpha)
    mask = np.ma.getmaskarray(z)
    data = np.ma.getdata(z)
    eligible = sorted(
        (float(data[pair]) ** -2, pair)
        for pair in set(candidates)
        if not mask[pair] and data[pair] > 0
    )
    selected: List[Pair] = []
    used: List[float] = []
    for bound, pair in eligible:
        if math.fsum(used + [bound]) > alpha:
            break
        used.append(bound)
        selected.append(pair)
    return PositiveSet(alpha=alpha, selected=tuple(selected), budget_used=math.fsum(used))


def diagonal_pairs(s: int) -> List[Pair]:
    return [(i, i) for i in range(s)]


def off_diagonal_pairs(s: int) -> List[Pair]:
    return [(i, j) for i in range(s) for j in range(i + 1, s)]


def threshold_set(z: np.ma.MaskedArray, threshold: float) -> List[Pair]:
    """J(threshold): pairs i <= j whose defined z-score exceeds the threshold."""
    mask = np.ma.getmaskarray(z)
    data = np.ma.getdata(z)
    s = data.shape[0]
    return [
        (i, j)
        for i in range(s)
        for j in range(i, s)
        if not mask[i, j] and data[i, j] > threshold
    ]


def synthetic_index(z: np.ma.MaskedArray) -> float:
    """
    max(0, 1 - s' / ||diag Z||^2) over the s' defined diagonal entries.

    Lies in [0, 1]; 0 when no diagonal entry is defined.
    """
    diagonal = np.ma.diag(z)
    defined = np.ma.getdata(diagonal)[~np.ma.getmaskarray(diagonal)]
    norm = math.fsum(float(value) ** 2 for value in defined)
    if norm == 0.0:
        return 0.0
    return max(0.0, 1.0 - len(defined) / norm)


def homophily_ratios(counts: EdgeBlockCounts, moments: MomentTable) -> np.ma.MaskedArray:
    """omega_i on the diagonal and eta_ij off it; masked where the expectation is 0."""
    undefined = moments.mean_edges <= 0
    safe = np.where(undefined, 1.0, moments.mean_edges)
    ratios = np.where(undefined, 0.0, counts.edges / safe)
    return np.ma.masked_array(ratios, mask=undefined)


def multiple_testing(z: np.ma.MaskedArray, alpha: float) -> MultipleTestingLevel:
    """Marginal and Bonferroni decisions plus the positive sets at level alpha."""
    _check_alpha(alpha)
    s = z.shape[0]
    mask = np.ma.getmaskarray(z)
    data = np.ma.getdata(z)
    marginal = 1.0 / math.sqrt(alpha) if alpha > 0 else math.inf
    bonferroni = s * marginal
    return MultipleTestingLevel(
        alpha=alpha,
        marginal_threshold=marginal,
        bonferroni_threshold=bonferroni,
        homophilic=tuple(i for i in range(s) if not mask[i, i] and data[i, i] >= marginal),
        jointly_homophilic=tuple(
            i for i in range(s) if not mask[i, i] and data[i, i] > bonferroni
        ),
        heterophilic=tuple(
            pair for pair in off_diagonal_pairs(s) if not mask[pair] and data[pair] >= marginal
        ),
        diagonal=positive_set(z, diagonal_pairs(s), alpha),
        off_diagonal=positive_set(z, off_diagonal_pairs(s), alpha),
    )


def zscore_summary(
    z: np.ma.MaskedArray,
    color_labels: Sequence[str],
    exclude: Collection[str] = (),
) -> ZScoreSummary:
    """
    Summary statistics of the diagonal and off-diagonal z-scores.

    Classes named in ``exclude`` are left out of both groups, e.g. a class of
    poorly characterised nodes.
    """
    unknown = set(exclude).difference(color_labels)
    if unknown:
        raise ValueError(f"unknown classes to exclude: {', '.join(sorted(unknown))}")
    keep = [i for i, label in enumerate(color_labels) if label not in exclude]
    mask = np.ma.getmaskarray(z)
    data = np.ma.getdata(z)
    diagonal = np.array([data[i, i] for i in keep if not mask[i, i]])
    off = np.array(
        [data[i, j] for a, i in enumerate(keep) for j in keep[a + 1 :] if not mask[i, j]]
    )
    diag_stats = _describe(diagonal)
    off_stats = _describe(off)
    return ZScoreSummary(
        excluded=tuple(sorted(exclude)),
        diagonal_mean=diag_stats[0],
        diagonal_std=diag_stats[1],
        diagonal_min=diag_stats[2],
        diagonal_max=diag_stats[3],
        off_diagonal_mean=off_stats[0],
        off_diagonal_std=off_stats[1],
        off_diagonal_min=off_stats[2],
        off_diagonal_max=off_stats[3],
        diagonal_above_5=_fraction(diagonal > 5) if len(diagonal) else None,
        off_diagonal_below_minus_1=_fraction(off < -1) if len(off) else None,
        off_diagonal_negative=_fraction(off < 0) if len(off) else None,
    )


def _describe(values: np.ndarray) -> Tuple[Optional[float], ...]:
    if not len(values):
        return None, None, None, None
    return (
        float(np.mean(values)),
        float(np.std(values)),
        float(np.min(values)),
        float(np.max(values)),
    )


def _fraction(flags: np.ndarray) -> float:
    return float(np.count_nonzero(flags)) / len(flags)


class HomophilyCalculator:
    """Runs the complete homophily analysis of a colored graph."""

    def __init__(self, config: Optional[StatsConfig] = None):
        """
        Initialize the calculator.

        Args:
            config: Analysis parameters. Defaults to :class:`StatsConfig`.
        """
        self.config = config or StatsConfig()

    def moments(self, graph: ColoredGraph, profile: Optional[Sequence[int]] = None) -> MomentTable:
        """Closed-form moments of ``graph`` under ``profile`` (default: its own)."""
        return moment_table(
            graph,
            profile,
            fast=self.config.fast_isolated,
            threads=self.config.threads,
            tolerance=self.config.negative_variance_tolerance,
        )

    def analyze(self, graph: ColoredGraph) -> HomophilyReport:
        """Observed counts, moments, z-scores, bounds and test decisions."""
        profile = graph.profile()
        profile.require_positive()
        if graph.n < 2:
            raise ValueError(f"analysis needs at least two nodes, got {graph.n}")

        counts = block_edge_counts(graph)
        moments = self.moments(graph)
        z, z0 = zscore_arrays(counts, moments, self.config.zero_tolerance)
        undefined = int(np.count_nonzero(np.triu(np.ma.getmaskarray(z))))
        if undefined:
            logger.info("%d edge z-scores undefined (zero variance)", undefined)

        report = HomophilyReport(
            color_labels=graph.color_labels,
            class_sizes=profile.counts,
            n=graph.n,
            m=graph.m,
            pi3=count_p3(graph),
            sum_squared_degrees=sum_squared_degrees(graph),
            density=graph.density,
            counts=counts,
            moments=moments,
            z=z,
            z0=z0,
            u=u_values(z, self.config.cantelli),
            u0=u_values(z0, self.config.cantelli),
            ratios=homophily_ratios(counts, moments),
            synthetic_index=synthetic_index(z),
            cantelli=self.config.cantelli,
            levels=tuple(multiple_testing(z, alpha) for alpha in self.config.alphas),
        )
        logger.info(
            "Analyzed n=%d m=%d s=%d, synthetic index %.4f",
            report.n,
            report.m,
            report.s,
            report.synthetic_index,
        )
        return report


def _profile_counts(profile: Sequence[int], n: int) -> Tuple[int, ...]:
    counts = tuple(int(c) for c in (profile.counts if isinstance(profile, ColorProfile) else profile))
    if any(c < 0 for c in counts):
        raise ValueError(f"class sizes must be nonnegative, got {list(counts)}")
    if sum(counts) != n:
        raise ValueError(f"profile sums to {sum(counts)}, expected n={n}")
    return counts


def _colour_size(profile: Sequence[int], n: int, i: int) -> int:
    counts = _profile_counts(profile, n)
    if not 0 <= i < len(counts):
        raise IndexError(f"colour {i} out of range for {len(counts)} classes")
    if counts[i] == 0:
        raise ValueError(f"colour {i} has no nodes; moments need c_i > 0")
    return counts[i]


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
