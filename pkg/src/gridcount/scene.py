"""Grid-scene domain model.

A scene is an N x M grid (default 9 x 9) of cells, each holding at most one
object. Objects are (shape, color) pairs drawn from fixed enumerations. The
designated target object determines the ground-truth coordinate set and the
count label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, NamedTuple

__all__ = [
    "Shape",
    "Color",
    "ObjectSpec",
    "GridCoord",
    "Scene",
    "PixelGeometry",
    "CellOccupied",
    "all_cells",
    "target_cells",
    "target_count",
    "add_object",
    "cell_center_px",
]


class Shape(str, Enum):
    CIRCLE = "circle"
    SQUARE = "square"
    STAR = "star"
    TRIANGLE = "triangle"
    PLUS = "plus"


class Color(str, Enum):
    RED = "red"
    GREEN = "green"
    BLUE = "blue"
    CYAN = "cyan"
    MAGENTA = "magenta"
    YELLOW = "yellow"
    WHITE = "white"


class ObjectSpec(NamedTuple):
    """One object kind: exact (shape, color) identity."""

    shape: Shape
    color: Color

    @property
    def key(self) -> str:
        """Stable slug used in file paths and seed streams, e.g. 'blue-star'."""
        return f"{self.color.value}-{self.shape.value}"

    @classmethod
    def from_key(cls, key: str) -> "ObjectSpec":
        color, shape = key.split("-", 1)
        return cls(Shape(shape), Color(color))


class GridCoord(NamedTuple):
    """Cell index (row, col); (0, 0) is the top-left cell."""

    row: int
    col: int


class CellOccupied(ValueError):
    """Raised when placing an object into a cell that already holds one."""


def all_cells(dims: tuple[int, int] = (9, 9)) -> list[GridCoord]:
    """All grid cells in row-major order."""
    n, m = dims
    return [GridCoord(r, c) for r in range(n) for c in range(m)]


def _check_bounds(cell: GridCoord, dims: tuple[int, int]) -> None:
    n, m = dims
    if not (0 <= cell.row < n and 0 <= cell.col < m):
        raise ValueError(f"cell {tuple(cell)} out of bounds for {n}x{m} grid")


@dataclass(frozen=True)
class Scene:
    """Immutable occupancy map plus the designated target object."""

    target: ObjectSpec
    dims: tuple[int, int] = (9, 9)
    placements: Mapping[GridCoord, ObjectSpec] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for cell in self.placements:
            _check_bounds(cell, self.dims)

    def __iter__(self) -> Iterator[tuple[GridCoord, ObjectSpec]]:
        return iter(self.placements.items())


def target_cells(scene: Scene) -> set[GridCoord]:
    """Cells whose placed object equals the scene target (shape AND color)."""
    return {cell for cell, spec in scene.placements.items() if spec == scene.target}


def target_count(scene: Scene) -> int:
    """Ground-truth count label: the cardinality of ``target_cells``."""
    return len(target_cells(scene))


def add_object(scene: Scene, cell: GridCoord, spec: ObjectSpec) -> Scene:
    """Return a new scene with ``spec`` placed at ``cell``.

    Raises:
        CellOccupied: the cell already holds an object (occlusion forbidden).
        ValueError: the cell is out of bounds.
    """
    cell = GridCoord(*cell)
    _check_bounds(cell, scene.dims)
    if cell in scene.placements:
        raise CellOccupied(f"cell {tuple(cell)} already holds {scene.placements[cell]}")
    placements = dict(scene.placements)
    placements[cell] = spec
    return Scene(target=scene.target, dims=scene.dims, placements=placements)


@dataclass(frozen=True)
class PixelGeometry:
    """Pixel layout of the rendered grid.

    The grid of ``cell_size`` cells is centered in the square image with
    ``padding`` pixels on each side: padding*2 + cell_size*N = image_size
    (3*2 + 74*9 = 672 for the defaults).
    """

    image_size: int = 672
    cell_size: int = 74
    padding: int = 3
    object_size: int = 64

    def check_fits(self, dims: tuple[int, int]) -> None:
        n, m = dims
        if n != m:
            raise ValueError(f"square grid required, got {n}x{m}")
        if self.padding * 2 + self.cell_size * n != self.image_size:
            raise ValueError(
                f"geometry does not tile a {n}x{m} grid: "
                f"{self.padding}*2 + {self.cell_size}*{n} != {self.image_size}"
            )


def cell_center_px(cell: GridCoord, geom: PixelGeometry = PixelGeometry()) -> tuple[int, int]:
    """Pixel center (x, y) of a cell; integer via floor(cell_size / 2)."""
    half = geom.cell_size // 2
    x = geom.padding + cell.col * geom.cell_size + half
    y = geom.padding + cell.row * geom.cell_size + half
    return x, y
