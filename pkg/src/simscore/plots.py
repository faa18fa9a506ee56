"""Matplotlib rendering of ROC/PR curves to byte-reproducible SVG files."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

import matplotlib
from matplotlib.figure import Figure

from .ranking import Curve

_SVG_RC = {
    "svg.hashsalt": "simscore",
    "svg.fonttype": "path",
}


def render_curves_svg(curves: dict[str, Curve], kind: str, title: str,
                      path: Path | str, stats: Optional[dict[str, float]] = None) -> None:
    """All metrics overlaid as stepped curves; legend carries the point
    statistic when provided. Output is byte-identical across runs."""
    stats = stats or {}
    fig = Figure(figsize=(7.0, 5.2))
    ax = fig.add_subplot(111)
    for metric in sorted(curves):
        xs = [p[0] for p in curves[metric].points]
        ys = [p[1] for p in curves[metric].points]
        label = metric
        if metric in stats:
            stat_name = "AUROC" if kind == "roc" else "AP"
            label = f"{metric} ({stat_name}={stats[metric]:.3f})"
        ax.step(xs, ys, where="post", linewidth=1.4, label=label)
    if kind == "roc":
        ax.plot([0, 1], [0, 1], linestyle="--", linewidth=0.8, color="0.6", zorder=0)
        ax.set_xlabel("False positive rate")
        ax.set_ylabel("True positive rate")
    else:
        ax.set_xlabel("Recall")
        ax.set_ylabel("Precision")
    ax.set_xlim(-0.02, 1.02)
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend(loc="lower right" if kind == "roc" else "lower left", fontsize=8)
    ax.grid(True, linewidth=0.3, alpha=0.5)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})


def write_curves_csv(curves: dict[str, Curve], path: Path | str) -> None:
    """Delimited companion to the SVG: one row per curve point with the
    underlying confusion counts."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["metric_id", "x", "y", "threshold", "tp", "fp", "tn", "fn"])
        for metric in sorted(curves):
            curve = curves[metric]
            # points[0] is the tau=+inf anchor with no threshold of its own
            thresholds = [""] + [f"{t:.9f}" for t in curve.thresholds]
            for (x, y), thr, (tp, fp, tn, fn) in zip(curve.points, thresholds, curve.counts):
                writer.writerow([metric, f"{x:.9f}", f"{y:.9f}", thr, tp, fp, tn, fn])
