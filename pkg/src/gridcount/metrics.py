"""Coordinate-grounding reliability metrics.

Per-sample matching produces TP/FP/FN tallies with per-cell attribution;
split-level scores aggregate them. F1 captures both missed targets and
hallucinated points, exact match requires the whole predicted set to be
correct, and consistency checks that the number of emitted coordinates
equals the stated count. Cell-level F1 maps expose spatial bias.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .parsing import ParsedResponse, SENTINEL

__all__ = [
    "MatchResult",
    "MetricReport",
    "LengthMismatch",
    "match_grid",
    "match_continuous",
    "exact_match",
    "consistency",
    "cell_f1_map",
    "accuracy",
    "f1_from_tallies",
    "summarize",
]


class LengthMismatch(ValueError):
    """Prediction and label lists differ in length."""


@dataclass(frozen=True)
class MatchResult:
    """Per-sample matching outcome.

    Every prediction is either a TP or an FP; out-of-bounds predictions are
    FPs counted in ``oob_count`` and excluded from cell attribution. TP + FN
    equals the ground-truth size.
    """

    sample_id: str = ""
    tp: int = 0
    fp: int = 0
    fn: int = 0
    matched: tuple[tuple[int, int], ...] = ()
    fp_cells: tuple[tuple[int, int], ...] = ()
    fn_cells: tuple[tuple[int, int], ...] = ()
    oob_count: int = 0

    @property
    def n_pred(self) -> int:
        return self.tp + self.fp


def match_grid(
    pred: Sequence[tuple[int, int]],
    gt: Iterable[tuple[int, int]],
    dims: tuple[int, int] = (9, 9),
    sample_id: str = "",
) -> MatchResult:
    """One-to-one exact-cell matching of predicted against ground-truth cells.

    Each ground-truth cell is matched by at most one prediction; duplicate
    predictions of an already-matched cell count as FP.
    """
    n, m = dims
    unmatched = {(int(r), int(c)) for r, c in gt}
    matched: list[tuple[int, int]] = []
    fp_cells: list[tuple[int, int]] = []
    oob = 0
    for r, c in pred:
        if not (0 <= r < n and 0 <= c < m):
            oob += 1
            continue
        cell = (int(r), int(c))
        if cell in unmatched:
            unmatched.remove(cell)
            matched.append(cell)
        else:
            fp_cells.append(cell)
    fn_cells = sorted(unmatched)
    return MatchResult(
        sample_id=sample_id,
        tp=len(matched),
        fp=len(fp_cells) + oob,
        fn=len(fn_cells),
        matched=tuple(matched),
        fp_cells=tuple(fp_cells),
        fn_cells=tuple(fn_cells),
        oob_count=oob,
    )


_UNMATCHABLE = 1e9


def match_continuous(
    pred: Sequence[tuple[float, float]],
    gt: Sequence[tuple[float, float]],
    tau: float = 5.0,
    bounds: tuple[float, float] = (0.0, 100.0),
    sample_id: str = "",
) -> MatchResult:
    """Distance-thresholded bipartite matching for normalized coordinates.

    Minimum-cost (Hungarian) assignment on Euclidean distance, with pairs
    farther than ``tau`` unmatchable; the thresholded costs make the match
    maximum-cardinality first, minimum total distance second. Predictions
    outside ``bounds`` are FPs counted as out-of-bounds.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    lo, hi = bounds
    in_bounds = [p for p in pred if lo <= p[0] <= hi and lo <= p[1] <= hi]
    oob = len(pred) - len(in_bounds)
    tp = 0
    if in_bounds and len(gt) > 0:
        p = np.asarray(in_bounds, dtype=float)
        g = np.asarray(gt, dtype=float)
        dist = np.linalg.norm(p[:, None, :] - g[None, :, :], axis=-1)
        cost = np.where(dist <= tau, dist, _UNMATCHABLE)
        rows, cols = linear_sum_assignment(cost)
        tp = int(np.sum(dist[rows, cols] <= tau))
    fp = len(pred) - tp
    fn = len(gt) - tp
    return MatchResult(sample_id=sample_id, tp=tp, fp=fp, fn=fn, oob_count=oob)


def exact_match(pred: Sequence[tuple[int, int]], gt: Iterable[tuple[int, int]]) -> bool:
    """True iff the deduplicated predicted cell set equals the ground truth."""
    return {(int(r), int(c)) for r, c in pred} == {(int(r), int(c)) for r, c in gt}


def consistency(parsed: ParsedResponse) -> bool:
    """True iff the number of emitted coordinates equals the stated count
    (the -1 sentinel never matches)."""
    return parsed.answer != SENTINEL and parsed.answer == len(parsed.coords)


def f1_from_tallies(tp: int, fp: int, fn: int) -> float:
    """Micro F1 from summed tallies; 1.0 when there is nothing to match."""
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 1.0
    return 2 * tp / denom


def cell_f1_map(results: Iterable[MatchResult], dims: tuple[int, int] = (9, 9)) -> np.ndarray:
    """Per-cell F1 percentages from aggregated TP/FP/FN tallies.

    TP and FN attribute to the ground-truth cell, FP to the predicted cell.
    Cells with no ground truth and no FP are NaN (undefined).
    """
    n, m = dims
    tp = np.zeros((n, m), dtype=np.int64)
    fp = np.zeros((n, m), dtype=np.int64)
    fn = np.zeros((n, m), dtype=np.int64)
    for res in results:
        for r, c in res.matched:
            tp[r, c] += 1
        for r, c in res.fp_cells:
            fp[r, c] += 1
        for r, c in res.fn_cells:
            fn[r, c] += 1
    denom = 2 * tp + fp + fn
    with np.errstate(divide="ignore", invalid="ignore"):
        grid = np.where(denom > 0, 200.0 * tp / np.maximum(denom, 1), np.nan)
    return grid


def accuracy(
    preds: Sequence[int], labels: Sequence[int]
) -> tuple[float, dict[int, float]]:
    """Exact-equality rate overall and grouped by label."""
    if len(preds) != len(labels):
        raise LengthMismatch(f"{len(preds)} predictions vs {len(labels)} labels")
    if not labels:
        return 0.0, {}
    correct_by_label: dict[int, int] = {}
    total_by_label: dict[int, int] = {}
    hits = 0
    for p, y in zip(preds, labels):
        total_by_label[y] = total_by_label.get(y, 0) + 1
        if p == y:
            hits += 1
            correct_by_label[y] = correct_by_label.get(y, 0) + 1
    per_label = {
        y: correct_by_label.get(y, 0) / total_by_label[y]
        for y in sorted(total_by_label)
    }
    return hits / len(labels), per_label


@dataclass
class MetricReport:
    """Split-level summary of one evaluation run."""

    n_samples: int
    accuracy: float
    per_count_accuracy: dict[int, float] = field(default_factory=dict)
    precision: float | None = None
    recall: float | None = None
    f1: float | None = None
    macro_f1: float | None = None
    em_rate: float | None = None
    consistency_rate: float | None = None
    oob_rate: float | None = None
    cell_f1: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {
            "n_samples": self.n_samples,
            "accuracy": self.accuracy,
            "per_count_accuracy": {str(k): v for k, v in self.per_count_accuracy.items()},
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "macro_f1": self.macro_f1,
            "em_rate": self.em_rate,
            "consistency_rate": self.consistency_rate,
            "oob_rate": self.oob_rate,
        }
        if self.cell_f1 is not None:
            out["cell_f1"] = [
                [None if np.isnan(v) else round(float(v), 4) for v in row]
                for row in self.cell_f1
            ]
        return out


def summarize(
    preds: Sequence[int],
    labels: Sequence[int],
    matches: Sequence[MatchResult] | None = None,
    ems: Sequence[bool] | None = None,
    consistencies: Sequence[bool] | None = None,
    dims: tuple[int, int] = (9, 9),
    with_cell_map: bool = True,
) -> MetricReport:
    """Aggregate per-sample outcomes into a MetricReport.

    Coordinate metrics (F1/EM/consistency/OOB/cell map) are included only
    when matching results are supplied, i.e. for pointing approaches.
    """
    acc, per_count = accuracy(preds, labels)
    report = MetricReport(n_samples=len(labels), accuracy=acc, per_count_accuracy=per_count)
    if matches is not None:
        tp = sum(m.tp for m in matches)
        fp = sum(m.fp for m in matches)
        fn = sum(m.fn for m in matches)
        report.precision = tp / (tp + fp) if tp + fp else 1.0
        report.recall = tp / (tp + fn) if tp + fn else 1.0
        report.f1 = f1_from_tallies(tp, fp, fn)
        report.macro_f1 = float(
            np.mean([f1_from_tallies(m.tp, m.fp, m.fn) for m in matches])
        ) if matches else 1.0
        n_pred = sum(m.n_pred for m in matches)
        report.oob_rate = (sum(m.oob_count for m in matches) / n_pred) if n_pred else 0.0
        if with_cell_map:
            report.cell_f1 = cell_f1_map(matches, dims)
    if ems is not None and len(ems) > 0:
        report.em_rate = sum(ems) / len(ems)
    if consistencies is not None and len(consistencies) > 0:
        report.consistency_rate = sum(consistencies) / len(consistencies)
    return report
