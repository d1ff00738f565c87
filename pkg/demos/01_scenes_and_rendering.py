"""Build a grid scene by hand and render it.

Scenes live on a 9x9 grid; each cell holds at most one object, identified by
(shape, color). Rendering is deterministic: same scene, same bytes.
"""

from pathlib import Path

import numpy as np

from gridcount import (
    Color,
    GridCoord,
    ObjectSpec,
    Scene,
    Shape,
    add_object,
    cell_center_px,
    prototype,
    render,
    save_png,
    target_cells,
    target_count,
)

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# Five blue stars (the targets) and a few distractors.
blue_star = ObjectSpec(Shape.STAR, Color.BLUE)
scene = Scene(target=blue_star)
for cell in [(0, 0), (2, 5), (4, 4), (6, 2), (8, 8)]:
    scene = add_object(scene, GridCoord(*cell), blue_star)
for cell, spec in [
    ((1, 7), ObjectSpec(Shape.PLUS, Color.RED)),
    ((5, 0), ObjectSpec(Shape.CIRCLE, Color.YELLOW)),
    ((7, 6), ObjectSpec(Shape.TRIANGLE, Color.MAGENTA)),
]:
    scene = add_object(scene, GridCoord(*cell), spec)

print("target cells:", sorted(target_cells(scene)))
print("ground-truth count:", target_count(scene))
print("center of cell (4, 4):", cell_center_px(GridCoord(4, 4)), "(image center)")

image = render(scene)
print("image:", image.shape, image.dtype, "non-black pixels:", int(np.any(image != 0, axis=-1).sum()))
save_png(image, out_dir / "scene.png")
print("wrote", out_dir / "scene.png")

# The five shape prototypes are fixed 64x64 masks.
for shape in Shape:
    proto = prototype(shape)
    print(f"prototype {shape.value:9s} area = {proto.area:4d} px")
