"""Real-image adapter: instance masks to pointing supervision.

Converts mask-annotated image collections (incrementally built scenes, OCID
style) into the same manifest schema as the synthetic splits: one point per
instance, coordinates normalized to [0, 100] with one decimal digit, scenes
split without overlap, and geometric augmentation that transforms points
with the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from PIL import Image

from .prompts import REAL_WORLD_QUERY
from .seeding import child_seed, substream

__all__ = [
    "EmptyMask",
    "DegenerateCrop",
    "InsufficientScenes",
    "NormPoint",
    "InstanceAnnotation",
    "SplitPolicy",
    "AugmentConfig",
    "mask_to_point",
    "denormalize",
    "split_scenes",
    "transform_image",
    "transform_points",
    "augment",
    "expand_train_set",
]


class EmptyMask(ValueError):
    """Instance mask has no foreground pixels."""


class DegenerateCrop(ValueError):
    """A crop would remove every annotated point."""


class InsufficientScenes(ValueError):
    """Scene pool cannot satisfy the requested split sizes."""


class NormPoint(tuple):
    """(x, y) in [0, 100], one decimal digit of precision."""

    def __new__(cls, x: float, y: float):
        x, y = round(float(x), 1), round(float(y), 1)
        if not (0.0 <= x <= 100.0 and 0.0 <= y <= 100.0):
            raise ValueError(f"point ({x}, {y}) outside [0, 100]")
        return super().__new__(cls, (x, y))

    @property
    def x(self) -> float:
        return self[0]

    @property
    def y(self) -> float:
        return self[1]


def mask_to_point(mask: np.ndarray, image_dims: tuple[int, int] | None = None) -> NormPoint:
    """Representative point of an instance mask.

    Takes the mask centroid, then snaps to the mask pixel closest to it
    (ties broken row-major), so the point always lies on the visible
    instance. Returns the pixel normalized to [0, 100] in both axes.

    ``image_dims`` is (width, height); defaults to the mask's own shape.
    """
    pixels = np.argwhere(np.asarray(mask, dtype=bool))  # (row, col), row-major
    if pixels.size == 0:
        raise EmptyMask("mask has no foreground pixels")
    if image_dims is None:
        height, width = np.asarray(mask).shape[:2]
    else:
        width, height = image_dims
    centroid = pixels.mean(axis=0)
    d2 = ((pixels - centroid) ** 2).sum(axis=1)
    row, col = pixels[int(np.argmin(d2))]  # argmin keeps row-major order on ties
    return NormPoint(100.0 * col / width, 100.0 * row / height)


def denormalize(point: NormPoint, image_dims: tuple[int, int]) -> tuple[int, int]:
    """Back to integer (row, col) pixel indices."""
    width, height = image_dims
    return int(round(point.y * height / 100.0)), int(round(point.x * width / 100.0))


@dataclass
class InstanceAnnotation:
    """One annotated image: instance masks plus scene bookkeeping."""

    image_ref: str
    scene_id: str
    masks: list[np.ndarray] = field(default_factory=list)
    label_image: np.ndarray | None = None  # alternative input; label 0 = background
    location: str = ""  # floor / table
    view: str = ""      # camera view tag

    def instance_masks(self) -> list[np.ndarray]:
        if self.masks:
            return self.masks
        if self.label_image is None:
            return []
        labels = np.unique(self.label_image)
        return [self.label_image == k for k in labels if k != 0]

    @property
    def count(self) -> int:
        return len(self.masks) if self.masks else len(self.instance_masks())


@dataclass
class SplitPolicy:
    """Scene-level split targets and count gates."""

    sizes: dict[str, int] = field(
        default_factory=lambda: {"train": 1160, "val": 200, "id_test": 420, "ood_test": 510}
    )
    id_gate: tuple[int, int] = (1, 10)
    ood_gate: tuple[int, int] = (11, 20)
    seed: int = 0


def _gated(images: Sequence[InstanceAnnotation], gate: tuple[int, int]) -> list[InstanceAnnotation]:
    lo, hi = gate
    return [a for a in images if lo <= a.count <= hi]


def split_scenes(
    annotations: Sequence[InstanceAnnotation], policy: SplitPolicy | None = None
) -> dict[str, list[InstanceAnnotation]]:
    """Assign whole scenes to splits; no scene id ever spans two splits.

    Scenes are interleaved across (location, view) strata in seeded order and
    assigned first-fit: images within the id gate fill train, val, then
    id_test; images within the ood gate fill ood_test. Raises
    InsufficientScenes when the targets cannot be met exactly.
    """
    policy = policy or SplitPolicy()
    scenes: dict[str, list[InstanceAnnotation]] = {}
    for a in annotations:
        scenes.setdefault(a.scene_id, []).append(a)

    strata: dict[tuple[str, str], list[str]] = {}
    for sid, images in scenes.items():
        strata.setdefault((images[0].location, images[0].view), []).append(sid)
    interleaved: list[str] = []
    stratum_lists = []
    for key in sorted(strata):
        ids = sorted(strata[key])
        substream(policy.seed, "scene-split", *key).shuffle(ids)
        stratum_lists.append(ids)
    i = 0
    while any(stratum_lists):
        for ids in stratum_lists:
            if i < len(ids):
                interleaved.append(ids[i])
        i += 1
        if all(i >= len(ids) for ids in stratum_lists):
            break

    deficits = dict(policy.sizes)
    out: dict[str, list[InstanceAnnotation]] = {name: [] for name in policy.sizes}
    id_splits = [s for s in ("train", "val", "id_test") if s in deficits]
    for sid in interleaved:
        images = scenes[sid]
        id_imgs = _gated(images, policy.id_gate)
        ood_imgs = _gated(images, policy.ood_gate)
        placed = False
        for split in id_splits:
            if id_imgs and len(id_imgs) <= deficits[split]:
                out[split].extend(id_imgs)
                deficits[split] -= len(id_imgs)
                placed = True
                break
        if not placed and "ood_test" in deficits and ood_imgs and len(ood_imgs) <= deficits["ood_test"]:
            out["ood_test"].extend(ood_imgs)
            deficits["ood_test"] -= len(ood_imgs)
    if any(v > 0 for v in deficits.values()):
        raise InsufficientScenes(f"unmet split targets: {deficits}")
    return out


def annotation_to_record(ann: InstanceAnnotation, split: str) -> dict:
    """Manifest record in the synthetic schema, with normalized point coords."""
    dims = None
    if ann.label_image is not None:
        h, w = ann.label_image.shape[:2]
        dims = (w, h)
    elif ann.masks:
        h, w = ann.masks[0].shape[:2]
        dims = (w, h)
    points = [mask_to_point(m, dims) for m in ann.instance_masks()]
    return {
        "id": f"{split}/{ann.scene_id}/{ann.image_ref}",
        "split": split,
        "image_path": ann.image_ref,
        "query": REAL_WORLD_QUERY,
        "object": None,
        "coords": [[p.x, p.y] for p in points],
        "label": len(points),
        "scene_id": ann.scene_id,
        "view": ann.view,
    }


# --- augmentation --------------------------------------------------------------


@dataclass
class AugmentConfig:
    """Default magnitudes; the source data fixes none of these."""

    color_jitter: tuple[float, float] = (0.7, 1.3)   # per-channel gain range
    crop_scale: tuple[float, float] = (0.7, 0.95)    # crop side as fraction
    translate_frac: float = 0.1                      # max shift per axis
    rotate_deg: float = 15.0                         # small-angle range
    right_angle_prob: float = 0.25                   # chance of an exact 90k turn
    resize_scale: tuple[float, float] = (0.75, 1.25)
    crop_retries: int = 5


Op = tuple[str, dict]


def _rot90_points(points: list[tuple[float, float]], k: int) -> list[tuple[float, float]]:
    # clockwise quarter turns in normalized (x, y), y down
    out = points
    for _ in range(k % 4):
        out = [(100.0 - y, x) for x, y in out]
    return out


def _rotate_points(points, deg: float, dims: tuple[int, int]):
    # clockwise rotation about the image center, performed in pixel space:
    # normalized space is anisotropic for non-square images
    w, h = dims
    rad = math.radians(deg)
    cos, sin = math.cos(rad), math.sin(rad)
    cx, cy = w / 2.0, h / 2.0
    out = []
    for x, y in points:
        px, py = x / 100.0 * w - cx, y / 100.0 * h - cy
        qx, qy = px * cos - py * sin, px * sin + py * cos
        out.append((100.0 * (qx + cx) / w, 100.0 * (qy + cy) / h))
    return out


def transform_image(image: np.ndarray, op: Op) -> np.ndarray:
    """Apply one augmentation op to an image array (HxW or HxWx3).

    Boolean arrays are resampled nearest so masks stay binary.
    """
    name, p = op
    arr = np.asarray(image)
    is_mask = arr.dtype == bool
    if name == "color":
        if is_mask or arr.ndim == 2:
            return arr.copy()
        gains = np.asarray(p["gains"], dtype=float)
        return np.clip(arr.astype(float) * gains, 0, 255).astype(np.uint8)
    if name == "rot90":
        return np.ascontiguousarray(np.rot90(arr, k=-p["k"]))
    if name == "rotate":
        im = Image.fromarray(arr.astype(np.uint8) * 255 if is_mask else arr)
        resample = Image.NEAREST if is_mask else Image.BILINEAR
        rotated = np.asarray(im.rotate(-p["deg"], resample=resample, fillcolor=0))
        return rotated > 127 if is_mask else rotated
    if name == "crop":
        x0, y0, x1, y1 = p["box"]
        return np.ascontiguousarray(arr[y0:y1, x0:x1])
    if name == "translate":
        dx, dy = p["shift"]
        out = np.zeros_like(arr)
        h, w = arr.shape[:2]
        src_y = slice(max(0, -dy), min(h, h - dy))
        src_x = slice(max(0, -dx), min(w, w - dx))
        dst_y = slice(max(0, dy), min(h, h + dy))
        dst_x = slice(max(0, dx), min(w, w + dx))
        out[dst_y, dst_x] = arr[src_y, src_x]
        return out
    if name == "resize":
        w1, h1 = p["size"]
        im = Image.fromarray(arr.astype(np.uint8) * 255 if is_mask else arr)
        resample = Image.NEAREST if is_mask else Image.BILINEAR
        resized = np.asarray(im.resize((w1, h1), resample=resample))
        return resized > 127 if is_mask else resized
    raise ValueError(f"unknown op {name!r}")


def transform_points(
    points: Sequence[tuple[float, float]], op: Op, image_dims: tuple[int, int]
) -> list[tuple[float, float]]:
    """Apply the same op to normalized points; points leaving the frame are
    dropped. Raises DegenerateCrop when a crop drops every point."""
    name, p = op
    w, h = image_dims
    pts = [(float(x), float(y)) for x, y in points]
    if name == "color":
        return pts
    if name == "rot90":
        return _rot90_points(pts, p["k"])
    if name == "rotate":
        rotated = _rotate_points(pts, p["deg"], (w, h))
        return [(x, y) for x, y in rotated if 0 <= x <= 100 and 0 <= y <= 100]
    if name == "crop":
        x0, y0, x1, y1 = p["box"]
        kept = []
        for x, y in pts:
            px, py = x / 100.0 * w, y / 100.0 * h
            if x0 <= px < x1 and y0 <= py < y1:
                kept.append((100.0 * (px - x0) / (x1 - x0), 100.0 * (py - y0) / (y1 - y0)))
        if pts and not kept:
            raise DegenerateCrop("crop removed all points")
        return kept
    if name == "translate":
        dx, dy = p["shift"]
        kept = []
        for x, y in pts:
            nx, ny = x + 100.0 * dx / w, y + 100.0 * dy / h
            if 0 <= nx <= 100 and 0 <= ny <= 100:
                kept.append((nx, ny))
        return kept
    if name == "resize":
        return pts  # identity in normalized space
    raise ValueError(f"unknown op {name!r}")


def _draw_ops(rng, dims: tuple[int, int], ops: Sequence[str], cfg: AugmentConfig) -> list[Op]:
    w, h = dims
    drawn: list[Op] = []
    for name in ops:
        if name == "color":
            drawn.append(("color", {"gains": [rng.uniform(*cfg.color_jitter) for _ in range(3)]}))
        elif name == "rotate":
            if rng.random() < cfg.right_angle_prob:
                drawn.append(("rot90", {"k": rng.randrange(1, 4)}))
            else:
                drawn.append(("rotate", {"deg": rng.uniform(-cfg.rotate_deg, cfg.rotate_deg)}))
        elif name == "crop":
            scale = rng.uniform(*cfg.crop_scale)
            cw, ch = max(1, int(w * scale)), max(1, int(h * scale))
            x0 = rng.randrange(0, w - cw + 1)
            y0 = rng.randrange(0, h - ch + 1)
            drawn.append(("crop", {"box": (x0, y0, x0 + cw, y0 + ch)}))
        elif name == "translate":
            mx, my = int(w * cfg.translate_frac), int(h * cfg.translate_frac)
            drawn.append(("translate", {"shift": (rng.randint(-mx, mx), rng.randint(-my, my))}))
        elif name == "resize":
            scale = rng.uniform(*cfg.resize_scale)
            drawn.append(("resize", {"size": (max(1, int(w * scale)), max(1, int(h * scale)))}))
        else:
            raise ValueError(f"unknown augmentation {name!r}")
    return drawn


def augment(
    image: np.ndarray,
    points: Sequence[tuple[float, float]],
    ops: Sequence[str],
    seed: int,
    cfg: AugmentConfig | None = None,
) -> tuple[np.ndarray, list[tuple[float, float]]]:
    """One augmented copy: seeded ops applied in order to image and points.

    A crop that would drop every point is redrawn up to the retry cap, then
    skipped. Geometric ops move points with the image; color ops leave them
    untouched.
    """
    cfg = cfg or AugmentConfig()
    rng = substream(seed, "augment")
    img = np.asarray(image)
    pts = [(float(x), float(y)) for x, y in points]
    for name in ops:
        h, w = img.shape[:2]
        for attempt in range(cfg.crop_retries + 1):
            (op,) = _draw_ops(rng, (w, h), [name], cfg)
            try:
                new_pts = transform_points(pts, op, (w, h))
            except DegenerateCrop:
                if attempt < cfg.crop_retries:
                    continue
                op = None
                new_pts = pts
            break
        if op is not None:
            img = transform_image(img, op)
            pts = new_pts
    return img, [(round(x, 1), round(y, 1)) for x, y in pts]


DEFAULT_TRAIN_OPS = ("color", "crop", "translate", "rotate", "resize")


def expand_train_set(
    records: Sequence[dict],
    load_image: Callable[[str], np.ndarray],
    n_copies: int = 10,
    ops: Sequence[str] = DEFAULT_TRAIN_OPS,
    seed: int = 0,
    cfg: AugmentConfig | None = None,
    save_image: Callable[[str, np.ndarray], None] | None = None,
) -> list[dict]:
    """Original plus ``n_copies`` augmented variants per training record
    (default expansion factor 11). Augmented image files are emitted through
    ``save_image`` when given; records always carry updated coordinates."""
    out: list[dict] = []
    for rec in records:
        out.append(rec)
        img = load_image(rec["image_path"])
        for k in range(n_copies):
            aug_img, pts = augment(
                img, rec["coords"], ops, seed=child_seed(seed, rec["id"], k), cfg=cfg
            )
            stem, dot, ext = rec["image_path"].rpartition(".")
            aug_path = f"{stem or rec['image_path']}__aug{k}{dot}{ext}" if dot else f"{rec['image_path']}__aug{k}"
            if save_image is not None:
                save_image(aug_path, aug_img)
            aug = dict(rec)
            aug["id"] = rec["id"] + f"::aug{k}"
            aug["image_path"] = aug_path
            aug["coords"] = [[x, y] for x, y in pts]
            aug["label"] = len(pts)
            out.append(aug)
    return out
