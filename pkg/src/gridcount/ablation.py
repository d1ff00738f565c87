"""Ablation sample sets.

Builds the inputs for the coordinate ablations: X-token fine-tuning exports,
black-image samples with ground-truth coordinates prefilled, leave-one-out
variants, and stratified source-target pairs for activation patching. All
sets are pure functions of (split, seed); executing the ablations against a
neural model is out of scope here.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .builder import Sample
from .prompts import FTMode, ft_record
from .scene import ObjectSpec
from .seeding import substream

__all__ = [
    "PatchPair",
    "BLACK_IMAGE_PATH",
    "export_xft",
    "prefill_for",
    "build_black_image_set",
    "build_leave_one_out_set",
    "build_patch_pairs",
]

BLACK_IMAGE_PATH = "black.png"


def export_xft(base: Sequence[Sample]) -> list[dict]:
    """Fine-tuning records with every coordinate replaced by "X"."""
    return [ft_record(s, FTMode.XFT) for s in base]


def prefill_for(coords: Sequence[tuple]) -> str:
    """Assistant-side prefill up to the answer field: the model completes
    only the count."""
    parts = ", ".join(f"({a}, {b})" for a, b in sorted(coords))
    return f"Coordinates: {parts}. Answer:"


def build_black_image_set(id_set: Sequence[Sample]) -> list[Sample]:
    """Replace every image with the shared black image, injecting the
    ground-truth coordinates as an assistant prefill."""
    out = []
    for s in id_set:
        out.append(
            replace(
                s,
                id=s.id + "::black",
                image_path=BLACK_IMAGE_PATH,
                prefill=prefill_for(s.coords),
            )
        )
    return out


def build_leave_one_out_set(id_set: Sequence[Sample]) -> list[Sample]:
    """Per sample with label y, y variants each omitting one ground-truth
    coordinate from the prefill; the image stays unchanged and the removed
    cell is recorded in the sample metadata."""
    out = []
    for s in id_set:
        ordered = sorted(s.coords)
        for k, removed in enumerate(ordered):
            kept = ordered[:k] + ordered[k + 1 :]
            out.append(
                replace(
                    s,
                    id=s.id + f"::loo{k}",
                    prefill=prefill_for(kept),
                    meta={"removed_cell": [int(removed[0]), int(removed[1])]},
                )
            )
    return out


@dataclass(frozen=True)
class PatchPair:
    """Source-target pair for activation patching: same object, different
    counts."""

    source_id: str
    target_id: str
    object: ObjectSpec
    source_count: int
    target_count: int


def build_patch_pairs(id_set: Sequence[Sample], seed: int = 0) -> list[PatchPair]:
    """Stratified source-target pairs: for each (count, object) pick 3 seeded
    source chains, and for each source one target per other count (8) from
    the same chain. 9 counts x 24 objects x 3 x 8 = 5,184 pairs."""
    by_key: dict[tuple[ObjectSpec, int, int], Sample] = {
        (s.object, s.chain_id, s.label): s for s in id_set
    }
    objects = sorted({s.object for s in id_set}, key=lambda o: o.key)
    chain_ids = sorted({s.chain_id for s in id_set})
    counts = sorted({s.label for s in id_set})

    pairs: list[PatchPair] = []
    for count in counts:
        for obj in objects:
            rng = substream(seed, "patch-pairs", count, obj.key)
            for chain_id in rng.sample(chain_ids, 3):
                source = by_key[(obj, chain_id, count)]
                for target_count in counts:
                    if target_count == count:
                        continue
                    target = by_key.get((obj, chain_id, target_count))
                    if target is None:
                        # chain lacks this count; fall back to a seeded chain
                        candidates = [
                            c for c in chain_ids if (obj, c, target_count) in by_key
                        ]
                        target = by_key[(obj, rng.choice(candidates), target_count)]
                    pairs.append(
                        PatchPair(
                            source_id=source.id,
                            target_id=target.id,
                            object=obj,
                            source_count=count,
                            target_count=target_count,
                        )
                    )
    return pairs
