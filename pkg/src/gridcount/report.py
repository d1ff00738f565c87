"""Run reports: summary CSV, per-cell grids, and SVG heatmaps."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Sequence

import numpy as np

from .metrics import MetricReport

__all__ = [
    "summary_row",
    "write_summary_csv",
    "write_cell_grid_csv",
    "write_per_count_csv",
    "heatmap_svg",
    "write_run_report",
]

_SUMMARY_FIELDS = [
    "run", "split", "model", "approach", "n_samples", "accuracy",
    "precision", "recall", "f1", "em_rate", "consistency_rate", "oob_rate",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def summary_row(run: str, split: str, model: str, approach: str, report: MetricReport) -> dict:
    return {
        "run": run,
        "split": split,
        "model": model,
        "approach": approach,
        "n_samples": report.n_samples,
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "f1": report.f1,
        "em_rate": report.em_rate,
        "consistency_rate": report.consistency_rate,
        "oob_rate": report.oob_rate,
    }


def write_summary_csv(rows: Sequence[dict], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=_SUMMARY_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row.get(k)) for k in _SUMMARY_FIELDS})


def write_cell_grid_csv(grid: np.ndarray, path) -> None:
    """9x9 (or NxM) grid as CSV; undefined cells are blank."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        for row in grid:
            writer.writerow(["" if math.isnan(v) else f"{v:.2f}" for v in row])


def write_per_count_csv(per_count: dict[int, float], path, key_name: str = "count") -> None:
    """Accuracy as a function of the count label (or distractor count d)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([key_name, "accuracy"])
        for k in sorted(per_count):
            writer.writerow([k, f"{per_count[k]:.6f}"])


def _cell_color(value: float) -> str:
    """White at 100 down through yellow to red at 0."""
    t = max(0.0, min(1.0, value / 100.0))
    if t >= 0.5:
        u = (t - 0.5) / 0.5
        r, g, b = 255, 255, int(255 * u)
    else:
        u = t / 0.5
        r, g, b = 255, int(255 * u), 0
    return f"#{r:02x}{g:02x}{b:02x}"


def heatmap_svg(grid: np.ndarray, title: str = "", cell: int = 56) -> str:
    """Grid heatmap with a numeric label per cell; NaN cells are gray."""
    n, m = grid.shape
    pad = 28 if title else 4
    width, height = m * cell + 8, n * cell + pad + 4
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    for r in range(n):
        for c in range(m):
            x, y = 4 + c * cell, pad + r * cell
            value = grid[r, c]
            if math.isnan(value):
                fill, label = "#cccccc", "-"
            else:
                fill, label = _cell_color(float(value)), f"{value:.1f}"
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="{fill}" stroke="#555555" stroke-width="1"/>'
            )
            parts.append(
                f'<text x="{x + cell / 2:.0f}" y="{y + cell / 2 + 4:.0f}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="12">{label}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def write_run_report(run_dir, run: str, split: str, model: str, approach: str,
                     report: MetricReport) -> None:
    """Emit metrics.json, summary.csv, per-count accuracy, and (when cell
    tallies exist) the cell-F1 CSV and SVG heatmap into the run directory."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    with open(run_dir / "metrics.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
    write_summary_csv([summary_row(run, split, model, approach, report)], run_dir / "summary.csv")
    write_per_count_csv(report.per_count_accuracy, run_dir / "per_count_accuracy.csv")
    if report.cell_f1 is not None:
        write_cell_grid_csv(report.cell_f1, run_dir / "cell_f1.csv")
        svg = heatmap_svg(report.cell_f1, title=f"{model} {approach} {split} cell F1 (%)")
        (run_dir / "cell_f1.svg").write_text(svg, encoding="utf-8")
