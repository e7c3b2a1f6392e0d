"""File renderings of a comparison: delimited table plus chart images.

Figures are drawn straight onto Agg canvases (no pyplot, no global state),
so rendering is safe from worker threads and headless machines alike.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from matplotlib.figure import Figure

from .errors import ValidationError
from .evaluation import ComparisonView, comparison_to_csv
from .hpo import DEFAULT_METRICS


def _new_axes(fig: Figure, polar: bool = False):
    return fig.add_subplot(projection="polar" if polar else None)


def _per_prefix_figure(view: ComparisonView, metric: str) -> Figure:
    series = view.per_prefix_series.get(metric)
    if not series:
        raise ValidationError(f"no per-prefix series for metric {metric!r}")
    fig = Figure(figsize=(8.0, 5.0))
    ax = _new_axes(fig)
    for label in sorted(series):
        points = series[label]
        ks = [k for k, _ in points]
        values = [v for _, v in points]
        ax.plot(ks, values, marker="o", label=label)
    ax.set_xlabel("prefix length")
    ax.set_ylabel(metric)
    ax.set_title(f"{metric} by prefix length")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    return fig


def _radar_figure(view: ComparisonView) -> Figure:
    metrics = view.radar.get("metrics") or []
    polygons = view.radar.get("polygons") or {}
    if not metrics or not polygons:
        raise ValidationError("radar data is empty")
    angles = np.linspace(0.0, 2.0 * np.pi, len(metrics), endpoint=False)
    closed = np.concatenate([angles, angles[:1]])
    fig = Figure(figsize=(6.5, 6.5))
    ax = _new_axes(fig, polar=True)
    for identity in sorted(polygons):
        values = list(polygons[identity])
        ring = values + values[:1]
        ax.plot(closed, ring, label=identity, linewidth=1.2)
        ax.fill(closed, ring, alpha=0.08)
    ax.set_xticks(angles)
    ax.set_xticklabels(metrics, fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_title("normalized metric profile")
    ax.legend(fontsize=7, loc="lower right", bbox_to_anchor=(1.15, -0.1))
    return fig


def _bubble_figure(view: ComparisonView, grouping: str) -> Figure:
    points = view.bubble.get(grouping)
    if not points:
        raise ValidationError(f"no bubble grouping {grouping!r}")
    usable = [p for p in points if p["x"] is not None and p["y"] is not None]
    if not usable:
        raise ValidationError(f"bubble grouping {grouping!r} has no plottable points")
    sizes = np.array([p["size"] or 0.0 for p in usable], dtype=float)
    spread = sizes.max() - sizes.min()
    if spread > 0:
        scaled = 300.0 + 600.0 * (sizes - sizes.min()) / spread
    else:
        scaled = np.full_like(sizes, 300.0)

    fig = Figure(figsize=(8.0, 5.5))
    ax = _new_axes(fig)
    groups = sorted({p["group"] for p in usable})
    cmap = {g: f"C{i}" for i, g in enumerate(groups)}
    for group in groups:
        xs = [p["x"] for p in usable if p["group"] == group]
        ys = [p["y"] for p in usable if p["group"] == group]
        ss = [s for p, s in zip(usable, scaled) if p["group"] == group]
        ax.scatter(xs, ys, s=ss, alpha=0.55, label=group, color=cmap[group],
                   edgecolors="black", linewidths=0.5)
    for p in usable:
        ax.annotate(p["label"], (p["x"], p["y"]), fontsize=6,
                    xytext=(4, 4), textcoords="offset points")
    ax.set_xlabel("auc")
    ax.set_ylabel("f1")
    ax.set_title(f"auc vs f1, grouped by {grouping} (bubble = elapsed time)")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8, title=grouping)
    return fig


def render_report(view: ComparisonView, directory, *, metric: str | None = None,
                  dpi: int = 120) -> dict[str, Path]:
    """Write comparison.csv plus every drawable chart; returns name -> path.

    Classification views get the per-prefix chart, the radar, and both
    bubble groupings; regression views get the table, the per-prefix chart,
    and the radar only.
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    metric = metric or DEFAULT_METRICS[view.family]

    written: dict[str, Path] = {}

    csv_path = directory / "comparison.csv"
    csv_path.write_text(comparison_to_csv(view))
    written["comparison.csv"] = csv_path

    charts: list[tuple[str, Figure]] = []
    charts.append(("per_prefix.png", _per_prefix_figure(view, metric)))
    charts.append(("radar.png", _radar_figure(view)))
    for grouping in sorted(view.bubble):
        charts.append((f"bubble_{grouping}.png", _bubble_figure(view, grouping)))

    for name, fig in charts:
        path = directory / name
        fig.savefig(path, dpi=dpi, bbox_inches="tight")
        written[name] = path
    return written
