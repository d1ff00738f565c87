"""Built-in reference models.

These exercise the full evaluate -> parse -> metrics pipeline without any
neural network: a perfect oracle, a configurable noisy oracle for metric
calibration, and a classical-vision counter that detects rendered objects by
exact color thresholding plus connected-component shape classification.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import ndimage

from .builder import Sample
from .prompts import Approach, PLURALS, REAL_WORLD_QUERY, format_ptc_response, ft_target, FTMode
from .render import PALETTE, prototype, _FOUR_CONN
from .scene import Color, GridCoord, ObjectSpec, PixelGeometry, Shape, all_cells
from .seeding import substream

__all__ = [
    "NoiseConfig",
    "UnparseableQuery",
    "perfect_oracle",
    "noisy_oracle",
    "pixel_counter",
]


class UnparseableQuery(ValueError):
    """The query does not name a (color, shape) pair or the generic query."""


def perfect_oracle(sample: Sample, approach: Approach) -> str:
    """Ground-truth response in the format the approach expects."""
    if approach in (Approach.PTC, Approach.COORD_COUNT):
        return ft_target(sample, FTMode.PTC)
    if approach is Approach.LTC:
        items = "\n".join(
            f"{i}. object at ({r}, {c})" for i, (r, c) in enumerate(sorted(sample.coords), 1)
        )
        return f"<list>\n{items}\n</list>\n<answer>{sample.label}</answer>"
    # DC and Reasoning answer with the bare count
    return str(sample.label)


@dataclass(frozen=True)
class NoiseConfig:
    """Controlled corruption of oracle responses.

    omit_rate drops each ground-truth coordinate independently;
    hallucinate_rate adds, per ground-truth coordinate, a point in a uniformly
    chosen unused cell; jitter_rate moves a kept coordinate to an adjacent
    cell. answer_mode "consistent" states the emitted coordinate count;
    "independent_error" states the true label, corrupted by +-1 with
    probability error_rate.
    """

    omit_rate: float = 0.0
    hallucinate_rate: float = 0.0
    jitter_rate: float = 0.0
    answer_mode: str = "consistent"
    error_rate: float = 0.0

    def __post_init__(self) -> None:
        for name in ("omit_rate", "hallucinate_rate", "jitter_rate", "error_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.answer_mode not in ("consistent", "independent_error"):
            raise ValueError(f"unknown answer_mode {self.answer_mode!r}")


def _neighbors(cell: GridCoord, dims: tuple[int, int]) -> list[GridCoord]:
    n, m = dims
    out = []
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        r, c = cell.row + dr, cell.col + dc
        if 0 <= r < n and 0 <= c < m:
            out.append(GridCoord(r, c))
    return out


def noisy_oracle(sample: Sample, cfg: NoiseConfig, seed: int = 0) -> str:
    """Seeded corrupted PtC response for metric calibration."""
    rng = substream(seed, "noisy-oracle", sample.id)
    dims = (9, 9)
    gt = [GridCoord(*c) for c in sample.coords]

    kept = [c for c in gt if rng.random() >= cfg.omit_rate]
    emitted: list[GridCoord] = []
    for c in kept:
        if cfg.jitter_rate and rng.random() < cfg.jitter_rate:
            emitted.append(rng.choice(_neighbors(c, dims)))
        else:
            emitted.append(c)
    if cfg.hallucinate_rate:
        for _ in gt:
            if rng.random() < cfg.hallucinate_rate:
                used = set(gt) | set(emitted)
                free = [c for c in all_cells(dims) if c not in used]
                if free:
                    emitted.append(rng.choice(free))

    if cfg.answer_mode == "consistent":
        answer = len(emitted)
    else:
        answer = sample.label
        if rng.random() < cfg.error_rate:
            answer += rng.choice((-1, 1))
    return format_ptc_response(emitted, answer)


# --- classical-vision counter -------------------------------------------------

_QUERY_RE = re.compile(r"how many (\w+) (\w+) are there\?", re.IGNORECASE)
_SHAPE_FROM_PLURAL = {plural: shape for shape, plural in PLURALS.items()}
_IOU_THRESHOLD = 0.95


def _parse_query(query: str) -> ObjectSpec | None:
    """(color, shape) from a counting query; None for the generic real-world
    query (count every object)."""
    if query.strip().lower() == REAL_WORLD_QUERY.lower():
        return None
    m = _QUERY_RE.fullmatch(query.strip())
    if m is None:
        raise UnparseableQuery(query)
    color_word, shape_word = m.group(1).lower(), m.group(2).lower()
    try:
        color = Color(color_word)
    except ValueError:
        raise UnparseableQuery(query) from None
    shape = _SHAPE_FROM_PLURAL.get(shape_word)
    if shape is None:
        raise UnparseableQuery(query)
    return ObjectSpec(shape, color)


def _bbox_crop(mask: np.ndarray) -> np.ndarray:
    rows = np.any(mask, axis=1)
    cols = np.any(mask, axis=0)
    r0, r1 = np.where(rows)[0][[0, -1]]
    c0, c1 = np.where(cols)[0][[0, -1]]
    return mask[r0 : r1 + 1, c0 : c1 + 1]


def _iou_aligned(a: np.ndarray, b: np.ndarray) -> float:
    """IoU of two masks after aligning their bounding boxes top-left."""
    h = max(a.shape[0], b.shape[0])
    w = max(a.shape[1], b.shape[1])
    ca = np.zeros((h, w), dtype=bool)
    cb = np.zeros((h, w), dtype=bool)
    ca[: a.shape[0], : a.shape[1]] = a
    cb[: b.shape[0], : b.shape[1]] = b
    union = np.logical_or(ca, cb).sum()
    return float(np.logical_and(ca, cb).sum() / union) if union else 0.0


@lru_cache(maxsize=None)
def _prototype_crop(shape: Shape) -> np.ndarray:
    return _bbox_crop(prototype(shape).mask)


def _classify_component(mask: np.ndarray) -> Shape | None:
    crop = _bbox_crop(mask)
    best_shape, best_iou = None, 0.0
    for shape in Shape:
        iou = _iou_aligned(crop, _prototype_crop(shape))
        if iou > best_iou:
            best_shape, best_iou = shape, iou
    return best_shape if best_iou >= _IOU_THRESHOLD else None


def _detect_color(image: np.ndarray, color: Color, wanted: Shape | None, geom: PixelGeometry) -> list[GridCoord]:
    r, g, b = PALETTE[color]
    mask = image[..., 0] == r
    np.logical_and(mask, image[..., 1] == g, out=mask)
    np.logical_and(mask, image[..., 2] == b, out=mask)
    if not mask.any():
        return []
    labels, n = ndimage.label(mask, structure=_FOUR_CONN)
    cells: list[GridCoord] = []
    for i, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None:
            continue
        comp_mask = labels[sl] == i
        shape = _classify_component(comp_mask)
        if shape is None or (wanted is not None and shape is not wanted):
            continue
        rows, cols = np.nonzero(comp_mask)
        cy = rows.mean() + sl[0].start
        cx = cols.mean() + sl[1].start
        cells.append(
            GridCoord(
                int((cy - geom.padding) // geom.cell_size),
                int((cx - geom.padding) // geom.cell_size),
            )
        )
    return cells


def pixel_counter(
    image: np.ndarray, query: str, geom: PixelGeometry = PixelGeometry()
) -> str:
    """Count rendered objects matching the query; answer in PtC format.

    Thresholds pixels exactly equal to the queried palette color, labels
    4-connected components, classifies each by mask IoU against the shape
    prototypes (match at IoU >= 0.95), maps centroids to grid cells, and
    emits the row-major sorted cells with their count. The generic
    real-world query counts objects of every palette color and shape.
    """
    target = _parse_query(query)
    if target is not None:
        cells = _detect_color(image, target.color, target.shape, geom)
    else:
        cells = []
        for color in Color:
            cells.extend(_detect_color(image, color, None, geom))
    cells.sort()
    return format_ptc_response(cells, len(cells))
