"""
SVG charts of homophily reports.

The heat-map shows every entry of Z as one square: green for positive,
pink for negative and grey for undefined z-scores. Colours follow the signed
logarithm t(z) = sign(z) * log10(1 + |z|) of the clamped score. Two bar charts
show the diagonal of Z and the isolated-node scores z0 on their own scales.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import matplotlib
import matplotlib.patches as patches
import numpy as np
from matplotlib.cm import ScalarMappable
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.colors import Colormap, LinearSegmentedColormap, Normalize, TwoSlopeNorm, to_rgba
from matplotlib.figure import Figure

from .stats import HomophilyReport

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_SVG_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": "net-homophily",
}


@dataclass
class HeatmapSpec:
    """Clamp interval, palette and layout of the z-score charts."""

    clamp: Tuple[float, float] = (-10.0, 60.0)
    negative_color: str = "#d6337f"
    positive_color: str = "#1a9850"
    neutral_color: str = "#d9d9d9"
    center_color: str = "#ffffff"
    cell_labels: bool = True
    font_family: str = "DejaVu Sans"
    font_size: int = 9
    cell_size: float = 0.45
    dpi: int = 100

    def __post_init__(self) -> None:
        """Validate the clamp interval after initialization."""
        lo, hi = self.clamp
        if not lo < hi:
            raise ValueError(f"clamp interval needs lo < hi, got [{lo}, {hi}]")
        self.clamp = (float(lo), float(hi))

    @property
    def lo(self) -> float:
        return self.clamp[0]

    @property
    def hi(self) -> float:
        return self.clamp[1]

    def rc_params(self) -> Dict[str, object]:
        """Matplotlib settings used while drawing and saving."""
        return {
            **_SVG_RC,
            "font.family": self.font_family,
            "font.size": self.font_size,
            "axes.titlesize": self.font_size + 2,
            "figure.dpi": self.dpi,
        }


class HeatmapSpecs:
    """Predefined chart specifications."""

    @staticmethod
    def protein_interaction() -> HeatmapSpec:
        """Interaction networks with strongly positive diagonals."""
        return HeatmapSpec(clamp=(-10.0, 60.0))

    @staticmethod
    def social_network() -> HeatmapSpec:
        """Large social networks with scores of both signs in the hundreds."""
        return HeatmapSpec(clamp=(-100.0, 100.0), cell_labels=False)


def signed_log(z: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """sign(z) * log10(1 + |z|) after clamping z to [lo, hi]."""
    clipped = np.clip(np.asarray(z, dtype=np.float64), lo, hi)
    return np.sign(clipped) * np.log10(1.0 + np.abs(clipped))


def cell_kind(value: Optional[float]) -> str:
    """``pos``, ``neg``, ``zero`` or ``undefined``."""
    if value is None:
        return "undefined"
    if value > 0:
        return "pos"
    if value < 0:
        return "neg"
    return "zero"


class HomophilyPlotter:
    """Draws the charts of a homophily report."""

    def __init__(self, spec: Optional[HeatmapSpec] = None):
        """
        Initialize the plotter.

        Args:
            spec: Chart specification. Defaults to the interaction-network preset.
        """
        self.spec = spec or HeatmapSpecs.protein_interaction()

    def colormap(self) -> Tuple[Colormap, Normalize]:
        """Diverging colour map and its normalisation on the transformed scale."""
        spec = self.spec
        t_lo, t_hi = (float(x) for x in signed_log(np.array([spec.lo, spec.hi]), spec.lo, spec.hi))
        if t_lo < 0 < t_hi:
            cmap = LinearSegmentedColormap.from_list(
                "homophily", [spec.negative_color, spec.center_color, spec.positive_color]
            )
            return cmap, TwoSlopeNorm(vmin=t_lo, vcenter=0.0, vmax=t_hi)
        if t_lo >= 0:
            colors = [spec.center_color, spec.positive_color]
        else:
            colors = [spec.negative_color, spec.center_color]
        return LinearSegmentedColormap.from_list("homophily", colors), Normalize(t_lo, t_hi)

    def cell_color(self, value: Optional[float]) -> Tuple[float, float, float, float]:
        """RGBA fill of one heat-map cell."""
        if value is None:
            return to_rgba(self.spec.neutral_color)
        cmap, norm = self.colormap()
        t = float(signed_log(np.array([value]), self.spec.lo, self.spec.hi)[0])
        return cmap(norm(t))

    def plot_heatmap(self, report: HomophilyReport, title: str = "z-scores of edge counts") -> Figure:
        """Heat-map of Z, one square per class pair."""
        spec = self.spec
        labels = report.color_labels
        s = len(labels)
        z = report.z.tolist()
        cmap, norm = self.colormap()

        side = max(3.0, spec.cell_size * s + 2.0)
        fig = Figure(figsize=(side + 1.2, side), dpi=spec.dpi)
        FigureCanvasAgg(fig)
        ax = fig.add_subplot(1, 1, 1)
        for i in range(s):
            for j in range(s):
                value = z[i][j]
                cell = patches.Rectangle(
                    (j - 0.5, i - 0.5),
                    1.0,
                    1.0,
                    facecolor=self.cell_color(value),
                    edgecolor="white",
                    linewidth=0.8,
                    hatch="//" if value is None else None,
                )
                cell.set_gid(f"cell-{i}-{j}-{cell_kind(value)}")
                ax.add_patch(cell)
                if spec.cell_labels:
                    ax.text(
                        j,
                        i,
                        "n/a" if value is None else f"{value:.1f}",
                        ha="center",
                        va="center",
                        fontsize=max(5, spec.font_size - 2),
                    )

        ax.set_xlim(-0.5, s - 0.5)
        ax.set_ylim(s - 0.5, -0.5)
        ax.set_aspect("equal")
        ax.set_xticks(range(s))
        ax.set_yticks(range(s))
        ax.set_xticklabels(labels, rotation=90)
        ax.set_yticklabels(labels)
        ax.set_title(title, fontweight="bold")
        for side_name in ("top", "right"):
            ax.spines[side_name].set_visible(False)

        mappable = ScalarMappable(norm=norm, cmap=cmap)
        mappable.set_array(np.array([]))
        colorbar = fig.colorbar(mappable, ax=ax, shrink=0.8)
        ticks, tick_labels = self._legend_ticks()
        colorbar.set_ticks(ticks)
        colorbar.set_ticklabels(tick_labels)
        colorbar.set_label("sign(z) log10(1+|z|), z clamped")
        fig.tight_layout()
        return fig

    def _legend_ticks(self) -> Tuple[List[float], List[str]]:
        lo, hi = self.spec.lo, self.spec.hi
        values = [lo] + ([0.0] if lo < 0 < hi else []) + [hi]
        ticks = [float(t) for t in signed_log(np.array(values), lo, hi)]
        return ticks, [f"{value:g}" for value in values]

    def plot_bars(
        self,
        labels: Sequence[str],
        values: Sequence[Optional[float]],
        title: str,
        ylabel: str,
        thresholds: Sequence[Tuple[str, float]] = (),
        prefix: str = "bar",
    ) -> Figure:
        """
        Bar chart of per-class scores; undefined scores are drawn as grey stubs.

        Args:
            labels: Class labels.
            values: One score per class, ``None`` when undefined.
            title: Chart title.
            ylabel: Axis label.
            thresholds: Named horizontal reference lines.
            prefix: Prefix of the bar element ids.
        """
        spec = self.spec
        width = max(4.0, 0.5 * len(labels) + 2.0)
        fig = Figure(figsize=(width, 4.0), dpi=spec.dpi)
        FigureCanvasAgg(fig)
        ax = fig.add_subplot(1, 1, 1)
        for i, value in enumerate(values):
            kind = cell_kind(value)
            color = {
                "pos": spec.positive_color,
                "neg": spec.negative_color,
                "zero": spec.neutral_color,
                "undefined": spec.neutral_color,
            }[kind]
            height = 0.0 if value is None else value
            bars = ax.bar([i], [height], color=color, edgecolor="white", width=0.8)
            bars[0].set_gid(f"{prefix}-{i}-{kind}")
            if value is None:
                ax.text(i, 0, "n/a", ha="center", va="bottom", fontsize=max(5, spec.font_size - 2))

        for name, level in thresholds:
            if math.isfinite(level):
                ax.axhline(level, color="#555555", linestyle="--", linewidth=0.8)
                ax.text(len(labels) - 0.5, level, f" {name}", va="bottom", ha="right", fontsize=7)

        ax.axhline(0.0, color="black", linewidth=0.6)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=90)
        ax.set_xlim(-0.6, len(labels) - 0.4)
        ax.set_ylabel(ylabel)
        ax.set_title(title, fontweight="bold")
        ax.grid(axis="y", color="#ecf0f1")
        ax.set_axisbelow(True)
        fig.tight_layout()
        return fig

    def plot_diagonal(self, report: HomophilyReport) -> Figure:
        """Diagonal of Z with the marginal thresholds of each alpha level."""
        diagonal = [report.z.tolist()[i][i] for i in range(report.s)]
        thresholds = [(f"1/sqrt({level.alpha:g})", level.marginal_threshold) for level in report.levels]
        return self.plot_bars(
            report.color_labels,
            diagonal,
            "z-scores of intra-class edges",
            "z",
            thresholds,
            prefix="diag",
        )

    def plot_z0(self, report: HomophilyReport) -> Figure:
        """Isolated-node scores z0."""
        return self.plot_bars(
            report.color_labels,
            report.z0.tolist(),
            "z-scores of isolated nodes",
            "z0",
            prefix="z0",
        )

    def save_svg(self, fig: Figure, save_path: PathLike) -> None:
        """Save a figure as reproducible SVG (no date, fixed element ids)."""
        save_path = Path(save_path)
        save_path.parent.mkdir(parents=True, exist_ok=True)
        with matplotlib.rc_context(self.spec.rc_params()):
            fig.savefig(save_path, format="svg", metadata={"Date": None}, facecolor="white")
        logger.info("Wrote %s", save_path)

    def save_all(self, report: HomophilyReport, output_dir: PathLike) -> Dict[str, Path]:
        """
        Write heatmap.svg, diagonal.svg and z0.svg.

        A chart that fails to render is skipped with a warning.

        Returns:
            Paths of the written charts by name.
        """
        output_dir = Path(output_dir)
        charts = {
            "heatmap": self.plot_heatmap,
            "diagonal": self.plot_diagonal,
            "z0": self.plot_z0,
        }
        written: Dict[str, Path] = {}
        with matplotlib.rc_context(self.spec.rc_params()):
            for name, draw in charts.items():
                try:
                    fig = draw(report)
                    path = output_dir / f"{name}.svg"
                    self.save_svg(fig, path)
                    written[name] = path
                except Exception as e:
                    warnings.warn(f"Failed to generate {name}: {e}")
        return written
