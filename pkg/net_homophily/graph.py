"""
Colored graph data model and the graph invariants that enter the moment formulas.

A network is a simple undirected graph whose nodes are partitioned into colour
classes. Node identifiers are arbitrary strings externally and dense integers
internally; adjacency is stored in compressed sparse row form with every
neighbour list sorted.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

NodeColors = Union[Mapping[str, str], Iterable[Tuple[str, str]]]


class GraphBuildError(ValueError):
    """Raised when edges and colours cannot form a valid colored graph."""


@dataclass(frozen=True)
class ColorProfile:
    """
    Class sizes (c_1, ..., c_s) of a colouring.

    The profile fixes the null model: every colouring with the same profile is
    equally likely.
    """

    counts: Tuple[int, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        """Validate the profile after initialization."""
        if any(count < 0 for count in self.counts):
            raise ValueError(f"class sizes must be nonnegative, got {self.counts}")
        if self.labels and len(self.labels) != len(self.counts):
            raise ValueError(
                f"{len(self.labels)} labels given for {len(self.counts)} classes"
            )

    @property
    def n(self) -> int:
        """Total number of coloured nodes."""
        return sum(self.counts)

    @property
    def s(self) -> int:
        """Number of colours."""
        return len(self.counts)

    def label(self, i: int) -> str:
        """Label of colour i, or its index when the profile is unlabelled."""
        return self.labels[i] if self.labels else str(i)

    def require_positive(self) -> None:
        """Reject profiles with an empty class; the moment formulas assume c_i > 0."""
        empty = [self.label(i) for i, count in enumerate(self.counts) if count == 0]
        if empty:
            raise ValueError(f"profile has empty colour classes: {', '.join(empty)}")

    def __len__(self) -> int:
        return len(self.counts)

    def __getitem__(self, i: int) -> int:
        return self.counts[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.counts)


@dataclass(frozen=True)
class DegreeHistogram:
    """Number of nodes for each degree value that occurs in a graph."""

    degrees: np.ndarray  # distinct degree values, ascending
    counts: np.ndarray  # nodes having each degree

    def __post_init__(self) -> None:
        """Validate the histogram after initialization."""
        if self.degrees.shape != self.counts.shape:
            raise ValueError("degrees and counts must have the same length")
        if np.any(self.counts <= 0) or np.any(self.degrees < 0):
            raise ValueError("degree histogram entries must be positive")

    @property
    def n(self) -> int:
        """Number of nodes counted by the histogram."""
        return int(self.counts.sum())

    @property
    def degree_sum(self) -> int:
        """Sum of all degrees, i.e. 2m."""
        return int(np.dot(self.degrees.astype(np.int64), self.counts.astype(np.int64)))

    def as_dict(self) -> Dict[int, int]:
        """Histogram as a plain ``{degree: count}`` mapping."""
        return {int(d): int(c) for d, c in zip(self.degrees, self.counts)}


@dataclass(frozen=True, eq=False)
class ColoredGraph:
    """
    Immutable simple undirected graph with one colour per node.

    ``indptr``/``indices`` hold the adjacency in CSR form: the neighbours of
    node v are ``indices[indptr[v]:indptr[v + 1]]``, sorted ascending.
    """

    node_labels: Tuple[str, ...]
    indptr: np.ndarray
    indices: np.ndarray
    colors: np.ndarray
    color_labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        """Validate the graph after initialization."""
        # Writable arrays may still be held by the caller; freeze private copies.
        for name in ("indptr", "indices", "colors"):
            array = getattr(self, name)
            if not isinstance(array, np.ndarray) or array.flags.writeable:
                object.__setattr__(self, name, np.array(array, copy=True))
        n = len(self.node_labels)
        if self.indptr.shape != (n + 1,) or self.indptr[0] != 0:
            raise ValueError(f"indptr must have length n + 1 = {n + 1} and start at 0")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        if self.indptr[-1] != len(self.indices):
            raise ValueError("indptr[-1] must equal the number of adjacency entries")
        if len(self.indices) % 2:
            raise ValueError("adjacency entries must come in symmetric pairs")
        if self.colors.shape != (n,):
            raise ValueError(f"colors must have one entry per node ({n})")

        s = len(self.color_labels)
        if n and (self.colors.min() < 0 or self.colors.max() >= s):
            raise ValueError(f"colour indices must lie in [0, {s})")
        sizes = np.bincount(self.colors, minlength=s)
        if np.any(sizes == 0):
            empty = [self.color_labels[i] for i in np.flatnonzero(sizes == 0)]
            raise ValueError(f"colour classes without nodes: {', '.join(empty)}")

        if len(self.indices):
            if self.indices.min() < 0 or self.indices.max() >= n:
                raise ValueError("neighbour index out of range")
            rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(self.indptr))
            cols = self.indices.astype(np.int64)
            if np.any(rows == cols):
                raise ValueError("self-loops are not allowed")
            # Strictly increasing within each row: sorted and no parallel edges.
            same_row = rows[1:] == rows[:-1]
            if np.any(cols[1:][same_row] <= cols[:-1][same_row]):
                raise ValueError("neighbour lists must be sorted without duplicates")
            forward = np.sort(rows * n + cols)
            backward = np.sort(cols * n + rows)
            if not np.array_equal(forward, backward):
                raise ValueError("adjacency is not symmetric")

        for array in (self.indptr, self.indices, self.colors):
            array.setflags(write=False)

    @classmethod
    def from_edge_arrays(
        cls,
        src: np.ndarray,
        dst: np.ndarray,
        colors: np.ndarray,
        color_labels: Sequence[str],
        node_labels: Optional[Sequence[str]] = None,
        drop_self_loops: bool = False,
    ) -> "ColoredGraph":
        """
        Build a graph from integer endpoint arrays.

        Args:
            src: First endpoints, values in [0, n).
            dst: Second endpoints, same length as ``src``.
            colors: Colour index of every node; its length fixes n.
            color_labels: Label of each colour index.
            node_labels: External node identifiers. Defaults to ``"0".."n-1"``.
            drop_self_loops: Silently discard u == v pairs instead of failing.

        Returns:
            The graph with parallel and reversed duplicates collapsed.
        """
        colors = np.asarray(colors, dtype=np.int32)
        n = len(colors)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        if src.shape != dst.shape:
            raise ValueError("src and dst must have the same length")

        loops = src == dst
        if np.any(loops):
            if not drop_self_loops:
                raise GraphBuildError(f"self-loop on node index {int(src[loops][0])}")
            src, dst = src[~loops], dst[~loops]

        lo = np.minimum(src, dst)
        hi = np.maximum(src, dst)
        keys = np.unique(lo * n + hi)
        lo, hi = keys // n, keys % n

        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        order = np.lexsort((cols, rows))
        index_dtype = np.int32 if n <= np.iinfo(np.int32).max else np.int64
        indices = cols[order].astype(index_dtype)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])

        if node_labels is None:
            node_labels = [str(v) for v in range(n)]
        return cls(
            node_labels=tuple(node_labels),
            indptr=indptr,
            indices=indices,
            colors=colors,
            color_labels=tuple(color_labels),
        )

    @property
    def n(self) -> int:
        """Number of nodes."""
        return len(self.node_labels)

    @property
    def m(self) -> int:
        """Number of edges."""
        return len(self.indices) // 2

    @property
    def s(self) -> int:
        """Number of colours."""
        return len(self.color_labels)

    @property
    def degrees(self) -> np.ndarray:
        """Degree of every node."""
        return np.diff(self.indptr).astype(np.int32)

    @property
    def density(self) -> float:
        """Edges over the edges of the complete graph on the same nodes."""
        if self.n < 2:
            return 0.0
        return 2.0 * self.m / (self.n * (self.n - 1))

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbour indices of node v."""
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        """Whether u and v are adjacent."""
        row = self.neighbors(u)
        pos = int(np.searchsorted(row, v))
        return pos < len(row) and row[pos] == v

    def edge_arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """Endpoints (u, v) of every edge once, with u < v."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        cols = self.indices.astype(np.int64)
        upper = rows < cols
        return rows[upper], cols[upper]

    def profile(self) -> ColorProfile:
        """Class sizes of the colouring."""
        counts = np.bincount(self.colors, minlength=self.s)
        return ColorProfile(tuple(int(c) for c in counts), self.color_labels)

    def index_of(self) -> Dict[str, int]:
        """Mapping from external node label to internal index."""
        return {label: v for v, label in enumerate(self.node_labels)}

    def recolored(self, colors: np.ndarray) -> "ColoredGraph":
        """Same graph with another colouring over the same colour labels."""
        return ColoredGraph(
            node_labels=self.node_labels,
            indptr=self.indptr,
            indices=self.indices,
            colors=np.array(colors, dtype=np.int32),
            color_labels=self.color_labels,
        )


def build_graph(
    edges: Iterable[Tuple[str, str]],
    node_colors: NodeColors,
    keep_isolated: bool = False,
    color_order: Optional[Sequence[str]] = None,
) -> ColoredGraph:
    """
    Build a colored graph from labelled edges and a label -> colour assignment.

    Args:
        edges: Pairs of node labels; duplicates and reversed duplicates collapse.
        node_colors: Mapping, or iterable of (label, colour) pairs. Pairs may
            repeat a label only with the same colour.
        keep_isolated: Keep coloured nodes that have no edge. Off by default,
            matching the usual preprocessing of interaction networks.
        color_order: Fixed order of colour labels. Defaults to first appearance
            over the retained nodes. Every listed colour must be used.

    Returns:
        The colored graph.

    Raises:
        GraphBuildError: on self-loops, uncoloured endpoints, conflicting
            colours or an unused colour in ``color_order``.
    """
    colour_of = _normalize_node_colors(node_colors)

    endpoints: List[Tuple[str, str]] = []
    touched = set()
    for u, v in edges:
        if u == v:
            raise GraphBuildError(f"self-loop on node {u!r}")
        for label in (u, v):
            if label not in colour_of:
                raise GraphBuildError(f"edge endpoint {label!r} has no colour")
        endpoints.append((u, v))
        touched.add(u)
        touched.add(v)

    if keep_isolated:
        labels = list(colour_of)
    else:
        labels = [label for label in colour_of if label in touched]
        dropped = len(colour_of) - len(labels)
        if dropped:
            logger.info("Dropped %d isolated nodes", dropped)

    if color_order is None:
        palette: List[str] = list(dict.fromkeys(colour_of[label] for label in labels))
    else:
        palette = list(color_order)
        used = {colour_of[label] for label in labels}
        unknown = used.difference(palette)
        if unknown:
            raise GraphBuildError(
                f"colours missing from color_order: {', '.join(sorted(unknown))}"
            )
        unused = [colour for colour in palette if colour not in used]
        if unused:
            raise GraphBuildError(f"colour classes without nodes: {', '.join(unused)}")

    colour_index = {colour: i for i, colour in enumerate(palette)}
    node_index = {label: v for v, label in enumerate(labels)}
    colors = np.fromiter(
        (colour_index[colour_of[label]] for label in labels), dtype=np.int32, count=len(labels)
    )
    src = np.fromiter((node_index[u] for u, _ in endpoints), dtype=np.int64, count=len(endpoints))
    dst = np.fromiter((node_index[v] for _, v in endpoints), dtype=np.int64, count=len(endpoints))

    graph = ColoredGraph.from_edge_arrays(src, dst, colors, palette, node_labels=labels)
    logger.info("Built graph with n=%d, m=%d, s=%d", graph.n, graph.m, graph.s)
    return graph


def _normalize_node_colors(node_colors: NodeColors) -> Dict[str, str]:
    if isinstance(node_colors, Mapping):
        return dict(node_colors)
    colour_of: Dict[str, str] = {}
    for label, colour in node_colors:
        previous = colour_of.setdefault(label, colour)
        if previous != colour:
            raise GraphBuildError(
                f"node {label!r} has conflicting colours {previous!r} and {colour!r}"
            )
    return colour_of


def count_p3(graph: ColoredGraph) -> int:
    """Number of (not necessarily induced) paths on three nodes: sum of C(deg, 2)."""
    degrees = graph.degrees.astype(np.int64)
    return int(np.sum(degrees * (degrees - 1)) // 2)


def sum_squared_degrees(graph: ColoredGraph) -> int:
    """Sum of squared degrees, the cost driver of the isolated-node variances."""
    degrees = graph.degrees.astype(np.int64)
    return int(np.dot(degrees, degrees))


def common_neighbor_count(graph: ColoredGraph, u: int, v: int) -> int:
    """|N(u) ∩ N(v)| by merging the two sorted neighbour lists."""
    a, b = graph.neighbors(u), graph.neighbors(v)
    if len(a) > len(b):
        a, b = b, a
    if not len(a):
        return 0
    pos = np.searchsorted(b, a)
    hit = pos < len(b)
    return int(np.count_nonzero(b[pos[hit]] == a[hit]))


def union_neighborhood_size(graph: ColoredGraph, u: int, v: int) -> int:
    """b(u, v) = |N(u) ∪ N(v)| = deg(u) + deg(v) - |N(u) ∩ N(v)| for u != v."""
    if u == v:
        raise ValueError(f"union_neighborhood_size needs two distinct nodes, got {u} twice")
    degrees = graph.indptr
    deg_u = int(degrees[u + 1] - degrees[u])
    deg_v = int(degrees[v + 1] - degrees[v])
    return deg_u + deg_v - common_neighbor_count(graph, u, v)


def iter_distance2_blocks(graph: ColoredGraph) -> Iterator[Tuple[int, np.ndarray, np.ndarray]]:
    """
    Yield ``(u, ws, common)`` for every node u with a distance-2 partner.

    ``ws`` are the nodes w > u at distance exactly 2 from u and ``common`` the
    matching |N(u) ∩ N(w)|. Each source gathers its two-hop multiset and
    deduplicates it locally, so the total work is O(sum of squared degrees) and
    no global pair set is built.
    """
    indptr, indices = graph.indptr, graph.indices
    degrees = np.diff(indptr)
    for u in range(graph.n):
        nbrs = indices[indptr[u] : indptr[u + 1]]
        if len(nbrs) == 0:
            continue
        lengths = degrees[nbrs]
        total = int(lengths.sum())
        starts = np.repeat(indptr[nbrs] - (np.cumsum(lengths) - lengths), lengths)
        two_hop = indices[starts + np.arange(total)]
        two_hop = two_hop[two_hop > u]
        if not len(two_hop):
            continue
        ws, common = np.unique(two_hop, return_counts=True)
        pos = np.searchsorted(nbrs, ws)
        adjacent = np.zeros(len(ws), dtype=bool)
        inside = pos < len(nbrs)
        adjacent[inside] = nbrs[pos[inside]] == ws[inside]
        if np.all(adjacent):
            continue
        yield u, ws[~adjacent], common[~adjacent]


def distance2_pairs(graph: ColoredGraph) -> Iterator[Tuple[int, int]]:
    """Every unordered pair {u, v} at distance exactly 2, once, as (u, v) with u < v."""
    for u, ws, _ in iter_distance2_blocks(graph):
        for w in ws:
            yield u, int(w)


def degree_histogram(graph: ColoredGraph) -> DegreeHistogram:
    """Degree histogram of the graph."""
    degrees, counts = np.unique(graph.degrees, return_counts=True)
    return DegreeHistogram(degrees=degrees.astype(np.int64), counts=counts.astype(np.int64))
