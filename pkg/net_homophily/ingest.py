"""
Readers and preprocessing for node-class and edge files.

Files are UTF-8 text, optionally with a byte-order mark, with one record per
line, tab separated (any whitespace is accepted when a line has no tab).
Blank lines and lines starting with '#' are skipped. Invalid UTF-8 is an
error located by file and line.

    nodes:       <label>\\t<class>
    edges:       <label>\\t<label>[\\t<weight 0-999>]
    attributes:  <label>\\t<value>          (value may be missing)
    buckets:     <lo>,<hi>,<class>  and  fallback,<class>
    aliases:     <class>,<replacement class>
"""

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, TextIO, Tuple, Union

from .graph import ColoredGraph, build_graph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Edge = Tuple[str, str]

DEFAULT_SUFFIX_PATTERN = r"_\d+$"
MAX_WEIGHT = 999


class IngestError(ValueError):
    """A malformed or inconsistent input record, located by file and line."""

    def __init__(self, reason: str, path: Optional[str] = None, line_no: Optional[int] = None):
        self.reason = reason
        self.path = path
        self.line_no = line_no
        super().__init__(str(self))

    def __str__(self) -> str:
        location = self.path or "<input>"
        if self.line_no is not None:
            location = f"{location}:{self.line_no}"
        return f"{location}: {self.reason}"


@dataclass(frozen=True)
class RawEdgeRecord:
    """One line of an edge file."""

    source: str
    target: str
    weight: Optional[int] = None

    def __post_init__(self) -> None:
        """Validate the weight range."""
        if self.weight is not None and not 0 <= self.weight <= MAX_WEIGHT:
            raise ValueError(f"weight must be in [0, {MAX_WEIGHT}], got {self.weight}")


@dataclass(frozen=True)
class BucketingRule:
    """
    Half-open numeric intervals mapped to class labels.

    Values outside every interval, missing or non-numeric get ``fallback``.
    """

    intervals: Tuple[Tuple[float, float, str], ...]
    fallback: str

    def __post_init__(self) -> None:
        """Validate the intervals after initialization."""
        ordered = sorted(self.intervals)
        for lo, hi, label in ordered:
            if not lo < hi:
                raise ValueError(f"interval for {label!r} must have lo < hi, got [{lo}, {hi})")
        for (_, hi, left), (lo, _, right) in zip(ordered, ordered[1:]):
            if lo < hi:
                raise ValueError(f"intervals for {left!r} and {right!r} overlap")
        labels = [label for _, _, label in self.intervals]
        if self.fallback in labels:
            raise ValueError(f"fallback class {self.fallback!r} is also an interval class")

    @property
    def labels(self) -> List[str]:
        """Interval classes in ascending order, then the fallback."""
        return [label for _, _, label in sorted(self.intervals)] + [self.fallback]

    def classify(self, value: Union[None, str, float]) -> str:
        """Class of a raw attribute value."""
        if value is None:
            return self.fallback
        try:
            number = float(value)
        except (TypeError, ValueError):
            return self.fallback
        if not math.isfinite(number):
            return self.fallback
        for lo, hi, label in self.intervals:
            if lo <= number < hi:
                return label
        return self.fallback


@dataclass
class PreprocessConfig:
    """Preprocessing steps applied by :func:`load_colored_graph`."""

    cutoff: Optional[int] = None
    merge_suffix: Optional[str] = None
    conflict_class: str = "X"
    mutual_only: bool = False
    aliases: Dict[str, str] = field(default_factory=dict)
    bucket_rule: Optional[BucketingRule] = None
    keep_isolated: bool = False
    color_order: Optional[Sequence[str]] = None

    def __post_init__(self) -> None:
        """Validate the configuration after initialization."""
        if self.cutoff is not None and not 0 <= self.cutoff <= MAX_WEIGHT:
            raise ValueError(f"cutoff must be in [0, {MAX_WEIGHT}], got {self.cutoff}")
        if self.merge_suffix is not None:
            re.compile(self.merge_suffix)


def open_text(path: PathLike) -> TextIO:
    """Open an input file as UTF-8; a byte-order mark is dropped, bad bytes fail per line."""
    return open(path, "r", encoding="utf-8-sig", errors="surrogateescape")


def _lines(stream: Iterable[str], path: Optional[str]) -> Iterator[Tuple[int, str]]:
    lines = iter(stream)
    line_no = 0
    while True:
        try:
            line = next(lines)
        except StopIteration:
            return
        except UnicodeDecodeError as error:
            raise IngestError(f"invalid UTF-8: {error.reason}", path, line_no + 1) from None
        line_no += 1
        if line_no == 1 and line.startswith("\ufeff"):
            line = line[1:]
        try:
            line.encode("utf-8")
        except UnicodeEncodeError as error:
            code = ord(line[error.start])
            byte = code - 0xDC00 if 0xDC80 <= code <= 0xDCFF else code
            raise IngestError(f"invalid UTF-8 byte 0x{byte:02x}", path, line_no) from None
        yield line_no, line


def _records(stream: Iterable[str], path: Optional[str]) -> Iterator[Tuple[int, List[str]]]:
    for line_no, line in _lines(stream, path):
        text = line.rstrip("\r\n")
        if not text.strip() or text.lstrip().startswith("#"):
            continue
        fields = text.split("\t") if "\t" in text else text.split()
        yield line_no, [item.strip() for item in fields]


def _name(stream: object) -> Optional[str]:
    name = getattr(stream, "name", None)
    return str(name) if name is not None else None


def parse_node_file(stream: Iterable[str]) -> Dict[str, str]:
    """
    Read ``label -> class`` from a two-column node file.

    Identical duplicate lines are tolerated; a label listed with two classes
    is an error naming the label.
    """
    path = _name(stream)
    classes: Dict[str, str] = {}
    for line_no, fields in _records(stream, path):
        if len(fields) != 2 or not all(fields):
            raise IngestError(f"expected '<label>\\t<class>', got {len(fields)} fields", path, line_no)
        label, colour = fields
        previous = classes.setdefault(label, colour)
        if previous != colour:
            raise IngestError(
                f"node {label!r} listed with classes {previous!r} and {colour!r}", path, line_no
            )
    logger.info("Read %d node classes from %s", len(classes), path or "<input>")
    return classes


def parse_edge_file(stream: Iterable[str], cutoff: Optional[int] = None) -> List[RawEdgeRecord]:
    """
    Read an edge file, keeping records whose weight is at least ``cutoff``.

    Args:
        stream: Lines of ``<label>\\t<label>[\\t<weight>]``.
        cutoff: Inclusive minimum weight. Requires every line to be weighted.

    Returns:
        The surviving records in file order.
    """
    path = _name(stream)
    records: List[RawEdgeRecord] = []
    dropped = 0
    for line_no, fields in _records(stream, path):
        if len(fields) not in (2, 3) or not all(fields):
            raise IngestError(f"expected 2 or 3 fields, got {len(fields)}", path, line_no)
        weight: Optional[int] = None
        if len(fields) == 3:
            try:
                weight = int(fields[2])
            except ValueError:
                raise IngestError(f"weight {fields[2]!r} is not an integer", path, line_no) from None
            if not 0 <= weight <= MAX_WEIGHT:
                raise IngestError(f"weight {weight} outside [0, {MAX_WEIGHT}]", path, line_no)
        elif cutoff is not None:
            raise IngestError("cutoff given but the edge has no weight", path, line_no)
        if cutoff is not None and weight is not None and weight < cutoff:
            dropped += 1
            continue
        records.append(RawEdgeRecord(fields[0], fields[1], weight))
    if cutoff is not None:
        logger.info("Cutoff %d dropped %d of %d edges", cutoff, dropped, dropped + len(records))
    return records


def parse_directed_edge_file(stream: Iterable[str]) -> List[Edge]:
    """Directed pairs (source, target) of an edge file, weights ignored."""
    return [(record.source, record.target) for record in parse_edge_file(stream)]


def parse_attribute_file(stream: Iterable[str]) -> Dict[str, Optional[str]]:
    """Raw attribute value per label; a line with only a label has no value."""
    path = _name(stream)
    values: Dict[str, Optional[str]] = {}
    for line_no, fields in _records(stream, path):
        if not fields or not fields[0] or len(fields) > 2:
            raise IngestError("expected '<label>[\\t<value>]'", path, line_no)
        values[fields[0]] = fields[1] if len(fields) == 2 and fields[1] else None
    return values


def parse_bucket_config(stream: Iterable[str]) -> BucketingRule:
    """Bucketing rule from ``lo,hi,class`` lines and one ``fallback,class`` line."""
    path = _name(stream)
    intervals: List[Tuple[float, float, str]] = []
    fallback: Optional[str] = None
    for line_no, line in _lines(stream, path):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = [part.strip() for part in text.split(",")]
        if len(parts) == 2 and parts[0] == "fallback":
            fallback = parts[1]
        elif len(parts) == 3:
            try:
                intervals.append((float(parts[0]), float(parts[1]), parts[2]))
            except ValueError:
                raise IngestError(f"bad interval bounds in {text!r}", path, line_no) from None
        else:
            raise IngestError(f"expected 'lo,hi,class' or 'fallback,class', got {text!r}", path, line_no)
    if fallback is None:
        raise IngestError("bucket config has no 'fallback,<class>' line", path)
    try:
        return BucketingRule(tuple(intervals), fallback)
    except ValueError as error:
        raise IngestError(str(error), path) from error


def parse_alias_config(stream: Iterable[str]) -> Dict[str, str]:
    """Class alias map from ``class,replacement`` lines."""
    path = _name(stream)
    aliases: Dict[str, str] = {}
    for line_no, line in _lines(stream, path):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        parts = [part.strip() for part in text.split(",")]
        if len(parts) != 2 or not all(parts):
            raise IngestError(f"expected 'class,replacement', got {text!r}", path, line_no)
        aliases[parts[0]] = parts[1]
    return aliases


def apply_class_aliases(classes: Mapping[str, str], aliases: Mapping[str, str]) -> Dict[str, str]:
    """Replace every aliased class, e.g. ``{"R": "X", "S": "X"}``."""
    return {label: aliases.get(colour, colour) for label, colour in classes.items()}


def bucket_attribute(
    attributes: Mapping[str, Union[None, str, float]], rule: BucketingRule
) -> Dict[str, str]:
    """Class of every node from its numeric attribute."""
    return {label: rule.classify(value) for label, value in attributes.items()}


def merge_suffix_nodes(
    classes: Mapping[str, str],
    edges: Iterable[Edge],
    suffix_pattern: str = DEFAULT_SUFFIX_PATTERN,
    conflict_class: str = "X",
) -> Tuple[Dict[str, str], List[Edge]]:
    """
    Collapse labels that differ only by a suffix such as ``_1``/``_2``.

    A merged node keeps the common class of its members, or ``conflict_class``
    when they disagree. Edges are re-targeted; self-loops created by the merge
    are dropped and duplicates collapse.
    """
    pattern = re.compile(suffix_pattern)

    def base(label: str) -> str:
        stripped = pattern.sub("", label, count=1)
        while stripped and stripped != label:
            label, stripped = stripped, pattern.sub("", stripped, count=1)
        return label

    merged: Dict[str, str] = {}
    collapsed = 0
    for label, colour in classes.items():
        root = base(label)
        if root in merged:
            collapsed += 1
            if merged[root] != colour:
                merged[root] = conflict_class
        else:
            merged[root] = colour

    seen = set()
    rebased: List[Edge] = []
    for u, v in edges:
        u, v = base(u), base(v)
        key = (u, v) if u <= v else (v, u)
        if u == v or key in seen:
            continue
        seen.add(key)
        rebased.append((u, v))
    if collapsed:
        logger.info("Merged %d suffixed nodes into %d nodes", collapsed, len(merged))
    return merged, rebased


def mutual_only(pairs: Iterable[Edge]) -> List[Edge]:
    """Undirected edges whose two directions are both present, each once."""
    directed = set()
    order: List[Edge] = []
    for u, v in pairs:
        if u == v:
            continue
        if (u, v) not in directed:
            directed.add((u, v))
            order.append((u, v))
    kept = set()
    edges: List[Edge] = []
    for u, v in order:
        key = (u, v) if u <= v else (v, u)
        if (v, u) in directed and key not in kept:
            kept.add(key)
            edges.append(key)
    return edges


def write_node_file(classes: Mapping[str, str], stream: TextIO) -> None:
    """Write the canonical node file."""
    for label, colour in classes.items():
        stream.write(f"{label}\t{colour}\n")


def write_edge_file(edges: Iterable[Union[Edge, RawEdgeRecord]], stream: TextIO) -> None:
    """Write the canonical edge file; weights are written when present."""
    for edge in edges:
        if isinstance(edge, RawEdgeRecord):
            if edge.weight is None:
                stream.write(f"{edge.source}\t{edge.target}\n")
            else:
                stream.write(f"{edge.source}\t{edge.target}\t{edge.weight}\n")
        else:
            stream.write(f"{edge[0]}\t{edge[1]}\n")


def write_graph_files(graph: ColoredGraph, node_stream: TextIO, edge_stream: TextIO) -> None:
    """Write a colored graph as node and edge files."""
    labels = graph.node_labels
    write_node_file(
        {label: graph.color_labels[colour] for label, colour in zip(labels, graph.colors)},
        node_stream,
    )
    src, dst = graph.edge_arrays()
    write_edge_file(((labels[u], labels[v]) for u, v in zip(src, dst)), edge_stream)


def load_colored_graph(
    node_path: PathLike, edge_path: PathLike, config: Optional[PreprocessConfig] = None
) -> ColoredGraph:
    """
    Read node and edge files and run the preprocessing pipeline.

    The steps run in this order: cutoff, mutual-edge filter, class bucketing
    (the node file then holds raw attribute values), class aliases, suffix
    merging, graph construction with optional isolated-node removal.

    Raises:
        FileNotFoundError: if either file is missing.
        IngestError: on malformed lines.
        GraphBuildError: if an edge endpoint has no class.
    """
    config = config or PreprocessConfig()
    node_path, edge_path = Path(node_path), Path(edge_path)
    for path in (node_path, edge_path):
        if not path.exists():
            raise FileNotFoundError(f"Input file not found: {path}")

    with open_text(edge_path) as f:
        records = parse_edge_file(f, cutoff=config.cutoff)
    edges: List[Edge] = [(record.source, record.target) for record in records]
    if config.mutual_only:
        edges = mutual_only(edges)
        logger.info("Kept %d mutual edges", len(edges))

    with open_text(node_path) as f:
        if config.bucket_rule is not None:
            classes = bucket_attribute(parse_attribute_file(f), config.bucket_rule)
        else:
            classes = parse_node_file(f)

    if config.aliases:
        classes = apply_class_aliases(classes, config.aliases)
    if config.merge_suffix is not None:
        classes, edges = merge_suffix_nodes(
            classes, edges, config.merge_suffix, config.conflict_class
        )

    return build_graph(
        edges,
        classes,
        keep_isolated=config.keep_isolated,
        color_order=config.color_order,
    )
