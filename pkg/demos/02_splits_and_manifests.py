"""Build the synthetic splits and inspect their structure.

Every split comes from incremental chains (the count-i image is the
count-(i-1) image plus one object), giving exactly uniform label histograms
and exact positional balance. Cardinalities are fixed:

    base      7,290  (4,860 train / 2,430 val, split by chain id)
    id       17,496  (24 held-out objects)
    ood      17,496  (counts 10..18)
    noisy_tr  7,290  (1-3 distractors per base image)
    noisy_ts  9 segments x 50,301
"""

from pathlib import Path

from gridcount import build_base, build_id_test, build_noisy_test_segment, write_manifest
from gridcount.builder import label_histogram
from gridcount.prompts import FTMode, ft_target

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

train, val = build_base(seed=0)
print("base:", len(train), "train +", len(val), "val")
print("train label histogram:", label_histogram(train))

sample = train[40]
print("\nsample:", sample.id)
print("  query:       ", sample.query)
print("  coords:      ", sample.coords)
print("  ptc target:  ", ft_target(sample, FTMode.PTC))
print("  xft target:  ", ft_target(sample, FTMode.XFT))
print("  dc target:   ", ft_target(sample, FTMode.DC))

id_set = build_id_test(seed=0)
print("\nid test:", len(id_set), "samples,", len({s.object for s in id_set}), "held-out objects")

segment = build_noisy_test_segment(id_set, d=3, seed=0)
noisy = segment[123]
print("noisy_ts d=3 segment:", len(segment), "samples")
print("  example distractors:", noisy.distractors.d, "x", noisy.distractors.specs[0].key,
      "at", noisy.distractors.cells)

path = out_dir / "base_train.jsonl"
write_manifest(train, path)
print("\nwrote manifest:", path, f"({path.stat().st_size / 1e6:.1f} MB)")
