"""Build the coordinate-ablation sample sets.

Four sets probe how pointing-supervised models use coordinates: X-token
fine-tuning targets, black images with ground-truth coordinates prefilled,
leave-one-out prefills, and stratified source-target pairs for activation
patching (5,184 = 9 counts x 24 objects x 3 sources x 8 targets).
"""

from gridcount import (
    build_base,
    build_black_image_set,
    build_id_test,
    build_leave_one_out_set,
    build_patch_pairs,
    export_xft,
)

train, val = build_base(seed=0)
id_set = build_id_test(seed=0)

xft = export_xft(train)
print("x-ft export:", len(xft), "records; example target:", xft[5]["target"])

black = build_black_image_set(id_set[:81])
b = black[4]
print("\nblack-image set:", len(black), "samples sharing", b.image_path)
print("  prefill:", b.prefill)

loo = build_leave_one_out_set(id_set[:81])
v = loo[10]
print("\nleave-one-out:", len(loo), "variants from", 81, "samples")
print("  variant", v.id, "removed", v.meta["removed_cell"])
print("  prefill:", v.prefill)

pairs = build_patch_pairs(id_set, seed=0)
print("\npatch pairs:", len(pairs))
p = pairs[100]
print("  example:", p.source_id, "->", p.target_id,
      f"(counts {p.source_count} -> {p.target_count}, same object {p.object.key})")
