"""Synthetic split construction.

Every split is built from incremental chains: an ordered list of distinct
cells for one object, where the count-i image is the count-(i-1) image plus
one object. 81 chains per object, with the 81 first-placed cells forming a
permutation of the grid, give exact positional balance for count-1 samples
and an exactly uniform label distribution.

Splits (default 9x9 grid):
  base      7,290 = 9 counts x 10 train objects x 81 chains (4,860 / 2,430
            train/val split by chain id: chains 0..53 train, 54..80 val)
  id        17,496 = 9 counts x 24 held-out objects x 81 chains
  ood       17,496, chains of length 18, counts 10..18
  noisy_tr  7,290, one variant per base image with d in {1,2,3} distractors
  noisy_ts  9 segments x 50,301 = 729 blue-star id images x 23 distractor
            types x 3 spatial configurations, segment d has d distractors
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterator, Sequence

from .prompts import query_for
from .scene import Color, GridCoord, ObjectSpec, Scene, Shape, all_cells
from .seeding import child_seed, substream

__all__ = [
    "Chain",
    "DistractorInfo",
    "Sample",
    "SplitSpec",
    "SPLIT_SPECS",
    "TRAIN_ROSTER",
    "HELD_OUT_ROSTER",
    "NOISY_TS_TARGET",
    "InvalidLength",
    "build_chains",
    "build_base",
    "build_id_test",
    "build_ood_test",
    "build_noisy_train",
    "build_noisy_test_segment",
    "build_noisy_test",
    "scene_for",
    "label_histogram",
]

# Training roster: six colored plusses and four white shapes.
_PLUS_COLORS = (Color.RED, Color.GREEN, Color.BLUE, Color.CYAN, Color.MAGENTA, Color.YELLOW)
_HELD_OUT_SHAPES = (Shape.CIRCLE, Shape.SQUARE, Shape.STAR, Shape.TRIANGLE)

TRAIN_ROSTER: tuple[ObjectSpec, ...] = tuple(
    ObjectSpec(Shape.PLUS, c) for c in _PLUS_COLORS
) + tuple(ObjectSpec(s, Color.WHITE) for s in _HELD_OUT_SHAPES)

# Held-out roster: the 4 shapes recombined with the 6 plus colors (24 combos).
HELD_OUT_ROSTER: tuple[ObjectSpec, ...] = tuple(
    ObjectSpec(s, c) for s in _HELD_OUT_SHAPES for c in _PLUS_COLORS
)

NOISY_TS_TARGET = ObjectSpec(Shape.STAR, Color.BLUE)


class InvalidLength(ValueError):
    """Chain length exceeds the number of grid cells."""


@dataclass(frozen=True)
class Chain:
    """Ordered distinct cells for one object; prefix i is the count-i scene."""

    object: ObjectSpec
    cells: tuple[GridCoord, ...]
    chain_id: int


@dataclass(frozen=True, slots=True)
class DistractorInfo:
    d: int
    specs: tuple[ObjectSpec, ...]
    cells: tuple[GridCoord, ...]


@dataclass(frozen=True, slots=True)
class Sample:
    """One evaluation unit of a split manifest."""

    id: str
    split: str
    image_path: str
    query: str
    object: ObjectSpec | None
    coords: tuple[tuple, ...]  # row-major sorted; GridCoord for grid splits
    label: int
    chain_id: int
    seed: int
    distractors: DistractorInfo | None = None
    prefill: str | None = None
    meta: dict | None = None


@dataclass(frozen=True)
class SplitSpec:
    name: str
    count_range: tuple[int, int]
    roster: tuple[ObjectSpec, ...]
    chains_per_object: int
    expected_size: int


SPLIT_SPECS: dict[str, SplitSpec] = {
    "base": SplitSpec("base", (1, 9), TRAIN_ROSTER, 81, 7290),
    "base_train": SplitSpec("base_train", (1, 9), TRAIN_ROSTER, 54, 4860),
    "base_val": SplitSpec("base_val", (1, 9), TRAIN_ROSTER, 27, 2430),
    "id": SplitSpec("id", (1, 9), HELD_OUT_ROSTER, 81, 17496),
    "ood": SplitSpec("ood", (10, 18), HELD_OUT_ROSTER, 81, 17496),
    "noisy_tr": SplitSpec("noisy_tr", (1, 9), TRAIN_ROSTER, 81, 7290),
    **{
        f"noisy_ts_d{d}": SplitSpec(f"noisy_ts_d{d}", (1, 9), (NOISY_TS_TARGET,), 81, 50301)
        for d in range(1, 10)
    },
}

_TRAIN_CHAIN_SPLIT = 54  # chains 0..53 -> train, 54..80 -> val


def build_chains(
    obj: ObjectSpec,
    n_chains: int = 81,
    length: int = 9,
    seed: int = 0,
    dims: tuple[int, int] = (9, 9),
) -> list[Chain]:
    """81 seeded chains whose first cells form a permutation of the grid.

    Cells after the first are drawn uniformly without replacement from the
    remaining empty cells. Deterministic for a fixed (seed, obj, length).
    """
    cells = all_cells(dims)
    if length > len(cells):
        raise InvalidLength(f"chain length {length} exceeds {len(cells)} cells")
    if n_chains != len(cells):
        raise ValueError(f"positional balance requires n_chains == {len(cells)}")
    rng = substream(seed, "chains", obj.key, length)
    first_cells = rng.sample(cells, len(cells))
    chains = []
    for i, first in enumerate(first_cells):
        pool = [c for c in cells if c != first]
        rest = rng.sample(pool, length - 1)
        chains.append(Chain(object=obj, cells=(first, *rest), chain_id=i))
    return chains


def _sample_id(split: str, obj: ObjectSpec, chain_id: int, label: int, suffix: str = "") -> str:
    return f"{split}/{obj.key}/{chain_id:03d}/{label:02d}{suffix}"


def _chain_samples(
    split: str,
    chain: Chain,
    counts: range,
    seed: int,
) -> Iterator[Sample]:
    for count in counts:
        coords = tuple(sorted(chain.cells[:count]))
        sid = _sample_id(split, chain.object, chain.chain_id, count)
        yield Sample(
            id=sid,
            split=split,
            image_path=sid + ".png",
            query=query_for(chain.object),
            object=chain.object,
            coords=coords,
            label=count,
            chain_id=chain.chain_id,
            seed=seed,
        )


def build_base(seed: int = 0) -> tuple[list[Sample], list[Sample]]:
    """Base training split: (4,860 train, 2,430 val), split by chain id."""
    train: list[Sample] = []
    val: list[Sample] = []
    for obj in TRAIN_ROSTER:
        for chain in build_chains(obj, 81, 9, seed=child_seed(seed, "base")):
            dest = train if chain.chain_id < _TRAIN_CHAIN_SPLIT else val
            split = "base_train" if chain.chain_id < _TRAIN_CHAIN_SPLIT else "base_val"
            for s in _chain_samples("base", chain, range(1, 10), seed):
                dest.append(replace(s, split=split))
    assert len(train) == SPLIT_SPECS["base_train"].expected_size
    assert len(val) == SPLIT_SPECS["base_val"].expected_size
    return train, val


def build_id_test(seed: int = 0) -> list[Sample]:
    """ID test split: 17,496 samples over the 24 held-out objects."""
    samples: list[Sample] = []
    for obj in HELD_OUT_ROSTER:
        for chain in build_chains(obj, 81, 9, seed=child_seed(seed, "id")):
            samples.extend(_chain_samples("id", chain, range(1, 10), seed))
    assert len(samples) == SPLIT_SPECS["id"].expected_size
    return samples


def build_ood_test(seed: int = 0) -> list[Sample]:
    """OOD test split: 17,496 samples with counts 10..18 on length-18 chains."""
    samples: list[Sample] = []
    for obj in HELD_OUT_ROSTER:
        for chain in build_chains(obj, 81, 18, seed=child_seed(seed, "ood")):
            samples.extend(_chain_samples("ood", chain, range(10, 19), seed))
    assert len(samples) == SPLIT_SPECS["ood"].expected_size
    return samples


def _empty_cells(coords: Sequence[GridCoord], dims: tuple[int, int]) -> list[GridCoord]:
    taken = set(coords)
    return [c for c in all_cells(dims) if c not in taken]


def build_noisy_train(base: Sequence[Sample], seed: int = 0) -> list[Sample]:
    """One noisy variant per base image with d in {1,2,3} distractors.

    Within each target-object group (729 samples) the distractor count d
    cycles 1,2,3 over a seeded shuffle (243 each) and distractor types walk
    round-robin over the 9 non-target roster objects, so both the d-histogram
    and the type distribution are exactly uniform. Targets stay unchanged.
    """
    by_object: dict[ObjectSpec, list[Sample]] = {obj: [] for obj in TRAIN_ROSTER}
    for s in base:
        by_object[s.object].append(s)

    assigned: dict[str, DistractorInfo] = {}
    for obj, group in by_object.items():
        order = list(group)
        substream(seed, "noisy_tr", "d", obj.key).shuffle(order)
        non_targets = [o for o in TRAIN_ROSTER if o != obj]
        slot = 0
        for i, s in enumerate(order):
            d = (i % 3) + 1
            specs = tuple(non_targets[(slot + j) % len(non_targets)] for j in range(d))
            slot += d
            rng = substream(seed, "noisy_tr", "cells", s.id)
            cells = tuple(rng.sample(_empty_cells(s.coords, (9, 9)), d))
            assert len(cells) == d
            assigned[s.id] = DistractorInfo(d=d, specs=specs, cells=cells)

    out: list[Sample] = []
    for s in base:
        info = assigned[s.id]
        sid = _sample_id("noisy_tr", s.object, s.chain_id, s.label)
        out.append(
            replace(
                s,
                id=sid,
                split="noisy_tr",
                image_path=sid + ".png",
                seed=seed,
                distractors=info,
            )
        )
    assert len(out) == SPLIT_SPECS["noisy_tr"].expected_size
    hist = {1: 0, 2: 0, 3: 0}
    for s in out:
        hist[s.distractors.d] += 1
    assert hist == {1: 2430, 2: 2430, 3: 2430}
    return out


def build_noisy_test_segment(id_set: Sequence[Sample], d: int, seed: int = 0) -> list[Sample]:
    """Segment d of the distractor test set: 50,301 samples.

    Starts from the 729 blue-star id images; for each of the 23 remaining
    held-out combos, adds exactly d distractors of that single type in 3
    distinct seeded spatial configurations. Target cells and counts stay
    fixed.
    """
    if not 1 <= d <= 9:
        raise ValueError(f"segment must be in 1..9, got {d}")
    targets = [s for s in id_set if s.object == NOISY_TS_TARGET]
    assert len(targets) == 729, f"expected 729 blue-star id images, got {len(targets)}"
    distractor_types = [o for o in HELD_OUT_ROSTER if o != NOISY_TS_TARGET]
    split = f"noisy_ts_d{d}"

    out: list[Sample] = []
    for s in targets:
        empty = _empty_cells(s.coords, (9, 9))
        assert len(empty) >= d
        for dtype in distractor_types:
            rng = substream(seed, "noisy_ts", d, dtype.key, s.id)
            seen: set[frozenset] = set()
            for cfg in range(3):
                cells = tuple(rng.sample(empty, d))
                while frozenset(cells) in seen:
                    cells = tuple(rng.sample(empty, d))
                seen.add(frozenset(cells))
                sid = _sample_id(split, s.object, s.chain_id, s.label, f"__{dtype.key}__cfg{cfg}")
                out.append(
                    replace(
                        s,
                        id=sid,
                        split=split,
                        image_path=sid + ".png",
                        seed=seed,
                        distractors=DistractorInfo(d=d, specs=(dtype,) * d, cells=cells),
                    )
                )
    assert len(out) == SPLIT_SPECS[split].expected_size
    return out


def build_noisy_test(id_set: Sequence[Sample], seed: int = 0) -> dict[int, list[Sample]]:
    """All nine distractor segments keyed by d. Prefer the per-segment builder
    when memory matters: the full set holds 452,709 samples."""
    return {d: build_noisy_test_segment(id_set, d, seed) for d in range(1, 10)}


def scene_for(sample: Sample) -> Scene:
    """Reconstruct the scene (targets plus distractors) behind a sample."""
    placements: dict[GridCoord, ObjectSpec] = {
        GridCoord(*c): sample.object for c in sample.coords
    }
    if sample.distractors is not None:
        for spec, cell in zip(sample.distractors.specs, sample.distractors.cells):
            placements[GridCoord(*cell)] = spec
    return Scene(target=sample.object, placements=placements)


def label_histogram(samples: Sequence[Sample]) -> dict[int, int]:
    hist: dict[int, int] = {}
    for s in samples:
        hist[s.label] = hist.get(s.label, 0) + 1
    return dict(sorted(hist.items()))
