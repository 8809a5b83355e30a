"""
Serialization of homophily reports.

``report.json`` holds every number of a :class:`HomophilyReport` (undefined
entries as ``null``, U-values clamped to 1) and reads back into an equal
report. ``matrices.csv`` lists the same matrices in long form and
``report.md`` is a human-readable summary rendered from a Jinja2 template.
"""

import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Collection, Dict, List, Optional, Sequence, Union

import numpy as np
from jinja2 import Environment, FileSystemLoader, StrictUndefined

from .stats import (
    ClassRow,
    EdgeBlockCounts,
    HomophilyReport,
    MomentTable,
    MultipleTestingLevel,
    PositiveSet,
    zscore_summary,
)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PathLike = Union[str, Path]


def _masked_to_list(values: np.ma.MaskedArray) -> List[Any]:
    return np.ma.masked_array(np.ma.getdata(values), mask=np.ma.getmaskarray(values)).tolist()


def _masked_from_list(rows: Sequence[Any]) -> np.ma.MaskedArray:
    shaped = np.array(rows, dtype=object)
    mask = np.vectorize(lambda value: value is None, otypes=[bool])(shaped)
    data = np.where(mask, 0.0, shaped).astype(np.float64)
    return np.ma.masked_array(data, mask=mask)


def _clamped_bounds(values: np.ma.MaskedArray) -> List[Any]:
    data = np.minimum(np.ma.getdata(values), 1.0)
    return np.ma.masked_array(data, mask=np.ma.getmaskarray(values)).tolist()


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


def _positive_set_to_dict(result: PositiveSet, labels: Sequence[str]) -> Dict[str, Any]:
    return {
        "q": result.q,
        "selected": [[labels[i], labels[j]] for i, j in result.selected],
        "budget_used": result.budget_used,
    }


def _positive_set_from_dict(data: Dict[str, Any], alpha: float, index: Dict[str, int]) -> PositiveSet:
    return PositiveSet(
        alpha=alpha,
        selected=tuple((index[a], index[b]) for a, b in data["selected"]),
        budget_used=data["budget_used"],
    )


def report_to_dict(report: HomophilyReport) -> Dict[str, Any]:
    """JSON-ready dictionary of a report."""
    labels = report.color_labels
    return {
        "schema_version": SCHEMA_VERSION,
        "graph": {
            "n": report.n,
            "m": report.m,
            "s": report.s,
            "pi3": report.pi3,
            "sum_squared_degrees": report.sum_squared_degrees,
            "density": report.density,
            "color_labels": list(labels),
            "class_sizes": list(report.class_sizes),
        },
        "observed": {
            "edges": report.counts.edges.tolist(),
            "isolated": report.counts.isolated.tolist(),
        },
        "moments": {
            "mean_edges": report.moments.mean_edges.tolist(),
            "var_edges": report.moments.var_edges.tolist(),
            "mean_isolated": report.moments.mean_isolated.tolist(),
            "var_isolated": report.moments.var_isolated.tolist(),
        },
        "z": _masked_to_list(report.z),
        "z0": _masked_to_list(report.z0),
        "bound": "cantelli" if report.cantelli else "chebyshev",
        "u": _clamped_bounds(report.u),
        "u0": _clamped_bounds(report.u0),
        "ratios": _masked_to_list(report.ratios),
        "synthetic_index": report.synthetic_index,
        "multiple_testing": [
            {
                "alpha": level.alpha,
                "marginal_threshold": _finite_or_none(level.marginal_threshold),
                "bonferroni_threshold": _finite_or_none(level.bonferroni_threshold),
                "homophilic": [labels[i] for i in level.homophilic],
                "jointly_homophilic": [labels[i] for i in level.jointly_homophilic],
                "heterophilic": [list(report.label_pair(pair)) for pair in level.heterophilic],
                "diagonal": _positive_set_to_dict(level.diagonal, labels),
                "off_diagonal": _positive_set_to_dict(level.off_diagonal, labels),
            }
            for level in report.levels
        ],
    }


def report_from_dict(data: Dict[str, Any]) -> HomophilyReport:
    """Rebuild a report from :func:`report_to_dict` output."""
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema version {version!r}")
    graph = data["graph"]
    labels = tuple(graph["color_labels"])
    index = {label: i for i, label in enumerate(labels)}
    moments = data["moments"]

    def threshold(value: Optional[float]) -> float:
        return float("inf") if value is None else value

    levels = tuple(
        MultipleTestingLevel(
            alpha=level["alpha"],
            marginal_threshold=threshold(level["marginal_threshold"]),
            bonferroni_threshold=threshold(level["bonferroni_threshold"]),
            homophilic=tuple(index[label] for label in level["homophilic"]),
            jointly_homophilic=tuple(index[label] for label in level["jointly_homophilic"]),
            heterophilic=tuple((index[a], index[b]) for a, b in level["heterophilic"]),
            diagonal=_positive_set_from_dict(level["diagonal"], level["alpha"], index),
            off_diagonal=_positive_set_from_dict(level["off_diagonal"], level["alpha"], index),
        )
        for level in data["multiple_testing"]
    )
    return HomophilyReport(
        color_labels=labels,
        class_sizes=tuple(graph["class_sizes"]),
        n=graph["n"],
        m=graph["m"],
        pi3=graph["pi3"],
        sum_squared_degrees=graph["sum_squared_degrees"],
        density=graph["density"],
        counts=EdgeBlockCounts(
            edges=np.array(data["observed"]["edges"], dtype=np.int64).reshape(len(labels), len(labels)),
            isolated=np.array(data["observed"]["isolated"], dtype=np.int64),
        ),
        moments=MomentTable(
            mean_edges=np.array(moments["mean_edges"], dtype=np.float64),
            var_edges=np.array(moments["var_edges"], dtype=np.float64),
            mean_isolated=np.array(moments["mean_isolated"], dtype=np.float64),
            var_isolated=np.array(moments["var_isolated"], dtype=np.float64),
        ),
        z=_masked_from_list(data["z"]),
        z0=_masked_from_list(data["z0"]),
        u=_masked_from_list(data["u"]),
        u0=_masked_from_list(data["u0"]),
        ratios=_masked_from_list(data["ratios"]),
        synthetic_index=data["synthetic_index"],
        cantelli=data["bound"] == "cantelli",
        levels=levels,
    )


def _number(value: Optional[float], digits: int = 4) -> str:
    if value is None:
        return "undefined"
    return f"{value:.{digits}g}"


class ReportWriter:
    """Writes a homophily report as JSON, CSV and Markdown."""

    def __init__(self, template_dir: Optional[PathLike] = None):
        """
        Initialize the writer.

        Args:
            template_dir: Directory holding ``summary.md.j2``. Defaults to the
                package templates.
        """
        if template_dir is None:
            template_dir = Path(__file__).parent / "templates"
        self.jinja_env = Environment(
            loader=FileSystemLoader(str(template_dir)),
            undefined=StrictUndefined,
            keep_trailing_newline=True,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.jinja_env.filters["num"] = _number

    def generate_json(self, report: HomophilyReport) -> str:
        """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
        return json.dumps(report_to_dict(report), sort_keys=True, indent=2, allow_nan=False) + "\n"

    def generate_csv(self, report: HomophilyReport) -> str:
        """
        Long-form CSV with columns ``quantity, class_i, class_j, value``.

        Per-class quantities leave ``class_j`` empty; undefined values are empty.
        """
        labels = report.color_labels
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["quantity", "class_i", "class_j", "value"])

        matrices = [
            ("observed", report.counts.edges.tolist()),
            ("mean", report.moments.mean_edges.tolist()),
            ("variance", report.moments.var_edges.tolist()),
            ("z", _masked_to_list(report.z)),
            ("u", _clamped_bounds(report.u)),
            ("ratio", _masked_to_list(report.ratios)),
        ]
        for name, rows in matrices:
            for i in range(report.s):
                for j in range(i, report.s):
                    writer.writerow([name, labels[i], labels[j], _cell(rows[i][j])])

        vectors = [
            ("observed_isolated", report.counts.isolated.tolist()),
            ("mean_isolated", report.moments.mean_isolated.tolist()),
            ("var_isolated", report.moments.var_isolated.tolist()),
            ("z0", _masked_to_list(report.z0)),
            ("u0", _clamped_bounds(report.u0)),
        ]
        for name, values in vectors:
            for i in range(report.s):
                writer.writerow([name, labels[i], "", _cell(values[i])])
        return buffer.getvalue()

    def generate_markdown(
        self,
        report: HomophilyReport,
        class_rows: Optional[Sequence[ClassRow]] = None,
        exclude: Collection[str] = (),
        figures: Sequence[str] = (),
    ) -> str:
        """
        Markdown summary of a report.

        Args:
            report: The analysis result.
            class_rows: Optional per-class table rows.
            exclude: Classes left out of the z-score summary statistics.
            figures: Relative paths of figures to embed.
        """
        labels = report.color_labels
        z = _masked_to_list(report.z)
        z0 = _masked_to_list(report.z0)
        ratios = _masked_to_list(report.ratios)
        template = self.jinja_env.get_template("summary.md.j2")
        return template.render(
            report=report,
            labels=labels,
            classes=[
                {
                    "label": label,
                    "size": report.class_sizes[i],
                    "z": z[i][i],
                    "z0": z0[i],
                    "omega": ratios[i][i],
                    "row": class_rows[i] if class_rows else None,
                }
                for i, label in enumerate(labels)
            ],
            z=z,
            summary=zscore_summary(report.z, labels, exclude),
            bound="Cantelli" if report.cantelli else "Chebyshev",
            levels=[
                {
                    "alpha": level.alpha,
                    "marginal": _finite_or_none(level.marginal_threshold),
                    "bonferroni": _finite_or_none(level.bonferroni_threshold),
                    "homophilic": [labels[i] for i in level.homophilic],
                    "jointly_homophilic": [labels[i] for i in level.jointly_homophilic],
                    "heterophilic": ["-".join(report.label_pair(pair)) for pair in level.heterophilic],
                    "q_diagonal": level.diagonal.q,
                    "q_off_diagonal": level.off_diagonal.q,
                }
                for level in report.levels
            ],
            figures=list(figures),
        )

    def save_json(self, report: HomophilyReport, output_path: PathLike) -> None:
        """Save ``report.json``."""
        self._write(output_path, self.generate_json(report))

    def save_csv(self, report: HomophilyReport, output_path: PathLike) -> None:
        """Save ``matrices.csv``."""
        self._write(output_path, self.generate_csv(report))

    def save_markdown(
        self,
        report: HomophilyReport,
        output_path: PathLike,
        class_rows: Optional[Sequence[ClassRow]] = None,
        exclude: Collection[str] = (),
        figures: Sequence[str] = (),
    ) -> None:
        """Save ``report.md``."""
        self._write(output_path, self.generate_markdown(report, class_rows, exclude, figures))

    @staticmethod
    def _write(output_path: PathLike, content: str) -> None:
        output_path = Path(output_path)
        output_path.parent.mkdir(parents=True, exist_ok=True)
        with open(output_path, "w", encoding="utf-8", newline="") as f:
            f.write(content)
        logger.info("Wrote %s", output_path)


def load_report(path: PathLike) -> HomophilyReport:
    """Read a report saved by :meth:`ReportWriter.save_json`."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Report file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return report_from_dict(json.load(f))


def _cell(value: Any) -> str:
    return "" if value is None else repr(value)
