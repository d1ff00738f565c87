"""Deterministic rasterization of grid scenes.

Scenes render to 672x672 RGB arrays on a black background. Each object is a
fixed 64x64 boolean prototype mask stamped at its cell center and filled with
one of seven pure palette colors. No anti-aliasing: rendering is bit-exact,
so downstream pixel analysis can threshold on exact color values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from PIL import Image
from scipy import ndimage

from .scene import PixelGeometry, Scene, Shape, Color, cell_center_px

__all__ = [
    "PALETTE",
    "ShapePrototype",
    "prototype",
    "render",
    "save_png",
    "load_png",
    "black_image",
]

PALETTE: dict[Color, tuple[int, int, int]] = {
    Color.RED: (255, 0, 0),
    Color.GREEN: (0, 255, 0),
    Color.BLUE: (0, 0, 255),
    Color.CYAN: (0, 255, 255),
    Color.MAGENTA: (255, 0, 255),
    Color.YELLOW: (255, 255, 0),
    Color.WHITE: (255, 255, 255),
}

# Declared prototype geometry (the tile is object_size x object_size = 64 x 64):
#   circle   - filled disk, radius 32
#   square   - the full tile
#   triangle - filled isoceles, apex up, base = bottom edge
#   star     - filled 5-pointed star, apex up, outer radius 32, inner radius 13
#   plus     - union of horizontal and vertical bars of width 22
_TILE = 64
_STAR_OUTER = 32.0
_STAR_INNER = 13.0
_PLUS_BAR = 22


@dataclass(frozen=True)
class ShapePrototype:
    shape: Shape
    mask: np.ndarray  # (64, 64) bool

    @property
    def area(self) -> int:
        return int(self.mask.sum())


def _pixel_centers(size: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:size, 0:size]
    return xs + 0.5, ys + 0.5


def _fill_polygon(vertices: list[tuple[float, float]], size: int = _TILE) -> np.ndarray:
    """Even-odd rasterization of a polygon over pixel centers."""
    px, py = _pixel_centers(size)
    inside = np.zeros((size, size), dtype=bool)
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        if y1 == y2:
            continue
        crosses = ((y1 <= py) & (py < y2)) | ((y2 <= py) & (py < y1))
        xi = x1 + (py - y1) / (y2 - y1) * (x2 - x1)
        inside ^= crosses & (px < xi)
    return inside


_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def _largest_4cc(mask: np.ndarray) -> np.ndarray:
    """Keep the largest 4-connected component (drops stray rasterization pixels)."""
    labels, n = ndimage.label(mask, structure=_FOUR_CONN)
    if n <= 1:
        return mask
    sizes = ndimage.sum_labels(mask, labels, index=range(1, n + 1))
    return labels == (int(np.argmax(sizes)) + 1)


def _star_vertices() -> list[tuple[float, float]]:
    cx = cy = _TILE / 2.0
    verts = []
    for k in range(10):
        radius = _STAR_OUTER if k % 2 == 0 else _STAR_INNER
        angle = math.radians(-90.0 + k * 36.0)
        verts.append((cx + radius * math.cos(angle), cy + radius * math.sin(angle)))
    return verts


@lru_cache(maxsize=None)
def prototype(shape: Shape) -> ShapePrototype:
    """The fixed 64x64 boolean mask for a shape."""
    px, py = _pixel_centers(_TILE)
    half = _TILE / 2.0
    if shape is Shape.SQUARE:
        mask = np.ones((_TILE, _TILE), dtype=bool)
    elif shape is Shape.CIRCLE:
        mask = (px - half) ** 2 + (py - half) ** 2 <= half**2
    elif shape is Shape.TRIANGLE:
        half_width = py / _TILE * half
        mask = np.abs(px - half) <= half_width
    elif shape is Shape.STAR:
        mask = _fill_polygon(_star_vertices())
    elif shape is Shape.PLUS:
        lo = (_TILE - _PLUS_BAR) // 2
        hi = lo + _PLUS_BAR
        mask = np.zeros((_TILE, _TILE), dtype=bool)
        mask[lo:hi, :] = True
        mask[:, lo:hi] = True
    else:
        raise ValueError(f"unknown shape {shape!r}")
    mask = _largest_4cc(mask)
    mask.setflags(write=False)
    return ShapePrototype(shape=shape, mask=mask)


def render(scene: Scene, geom: PixelGeometry = PixelGeometry()) -> np.ndarray:
    """Rasterize a scene to an (image_size, image_size, 3) uint8 array.

    Pure function of (scene, geom): the same scene always yields the same
    bytes. Objects are stamped centered in their cells; placement rules keep
    an axis-aligned gap of cell_size - object_size pixels between objects.
    """
    geom.check_fits(scene.dims)
    canvas = np.zeros((geom.image_size, geom.image_size, 3), dtype=np.uint8)
    half = geom.object_size // 2
    for cell, spec in scene.placements.items():
        mask = prototype(spec.shape).mask
        cx, cy = cell_center_px(cell, geom)
        x0, y0 = cx - half, cy - half
        region = canvas[y0 : y0 + geom.object_size, x0 : x0 + geom.object_size]
        region[mask] = PALETTE[spec.color]
    return canvas


def black_image(geom: PixelGeometry = PixelGeometry()) -> np.ndarray:
    """All-black canvas of the configured size."""
    return np.zeros((geom.image_size, geom.image_size, 3), dtype=np.uint8)


def save_png(image: np.ndarray, path) -> None:
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


def load_png(path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
