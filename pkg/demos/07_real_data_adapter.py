"""Convert mask-annotated real images into pointing supervision.

Instance masks become single points (centroid snapped onto the mask, then
normalized to [0, 100] with one decimal), scenes split without overlap, and
geometric augmentation moves the points with the pixels.
"""

import numpy as np

from gridcount import InstanceAnnotation, SplitPolicy, mask_to_point, split_scenes
from gridcount.realdata import annotation_to_record, augment, denormalize

# A ring-shaped instance: the raw centroid would fall in the hollow center,
# the snap keeps the point on the object.
yy, xx = np.mgrid[0:120, 0:160]
d2 = (yy - 60) ** 2 + (xx - 80) ** 2
ring = (d2 <= 40**2) & (d2 >= 28**2)
point = mask_to_point(ring, (160, 120))
r, c = denormalize(point, (160, 120))
print(f"ring mask point: {tuple(point)} -> pixel ({r}, {c}), on mask: {bool(ring[r, c])}")

# Tiny synthetic scene collection: 12 scenes x 4 incremental images.
annotations = []
for i in range(12):
    for j in range(4):
        label_img = np.zeros((60, 80), dtype=np.uint8)
        for k in range(j + 1):
            label_img[5 + 9 * k : 10 + 9 * k, 10 : 18] = k + 1
        annotations.append(
            InstanceAnnotation(
                image_ref=f"scene{i:02d}_img{j}.png",
                scene_id=f"scene{i:02d}",
                label_image=label_img,
                location="floor" if i % 2 else "table",
                view="top",
            )
        )

policy = SplitPolicy(sizes={"train": 24, "val": 8, "id_test": 8, "ood_test": 0}, seed=0)
splits = split_scenes(annotations, policy)
for name, anns in splits.items():
    scenes = sorted({a.scene_id for a in anns})
    print(f"{name:8s} {len(anns):3d} images from scenes {scenes}")

record = annotation_to_record(splits["train"][3], "train")
print("\nmanifest record:", {k: record[k] for k in ("id", "query", "coords", "label")})

# One augmented copy: the points follow the crop/rotation.
image = np.random.default_rng(0).integers(0, 255, (60, 80, 3), dtype=np.uint8)
aug_img, aug_pts = augment(image, record["coords"], ["color", "crop", "rotate"], seed=7)
print("augmented:", aug_img.shape, "points:", aug_pts)
