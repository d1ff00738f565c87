import io

import pytest

from gridcount.builder import (
    HELD_OUT_ROSTER,
    NOISY_TS_TARGET,
    TRAIN_ROSTER,
    InvalidLength,
    build_base,
    build_chains,
    build_noisy_test_segment,
    build_noisy_train,
    label_histogram,
    scene_for,
)
from gridcount.manifest import sample_to_record, write_manifest
from gridcount.scene import GridCoord, ObjectSpec, all_cells, target_cells, target_count

RED_PLUS = TRAIN_ROSTER[0]


def test_rosters():
    assert len(TRAIN_ROSTER) == 10
    assert len(HELD_OUT_ROSTER) == 24
    assert len(set(TRAIN_ROSTER) | set(HELD_OUT_ROSTER)) == 34  # disjoint
    assert NOISY_TS_TARGET in HELD_OUT_ROSTER


def test_chains_first_cells_are_a_permutation():
    chains = build_chains(RED_PLUS, 81, 9, seed=123)
    firsts = [c.cells[0] for c in chains]
    assert sorted(firsts) == all_cells()


def test_chain_cells_distinct():
    for chain in build_chains(RED_PLUS, 81, 18, seed=5):
        assert len(set(chain.cells)) == len(chain.cells) == 18


def test_chains_deterministic():
    a = build_chains(RED_PLUS, 81, 9, seed=7)
    b = build_chains(RED_PLUS, 81, 9, seed=7)
    assert a == b
    c = build_chains(RED_PLUS, 81, 9, seed=8)
    assert a != c


def test_chains_differ_across_objects():
    a = build_chains(TRAIN_ROSTER[0], 81, 9, seed=7)
    b = build_chains(TRAIN_ROSTER[1], 81, 9, seed=7)
    assert [c.cells for c in a] != [c.cells for c in b]


def test_invalid_length():
    with pytest.raises(InvalidLength):
        build_chains(RED_PLUS, 81, 82, seed=0)


def test_base_sizes_and_balance(base_splits):
    train, val = base_splits
    assert len(train) == 4860
    assert len(val) == 2430
    assert label_histogram(train) == {k: 540 for k in range(1, 10)}
    assert label_histogram(val) == {k: 270 for k in range(1, 10)}
    assert label_histogram(train + val) == {k: 810 for k in range(1, 10)}


def test_base_chain_split_disjoint(base_splits):
    train, val = base_splits
    train_chains = {(s.object, s.chain_id) for s in train}
    val_chains = {(s.object, s.chain_id) for s in val}
    assert not train_chains & val_chains


def test_id_split(id_set):
    assert len(id_set) == 17496
    assert label_histogram(id_set) == {k: 1944 for k in range(1, 10)}
    assert {s.object for s in id_set} == set(HELD_OUT_ROSTER)


def test_ood_split(ood_set):
    assert len(ood_set) == 17496
    hist = label_histogram(ood_set)
    assert min(hist) == 10 and max(hist) == 18
    assert hist == {k: 1944 for k in range(10, 19)}


def test_incremental_prefix_property(id_set):
    by_chain = {}
    for s in id_set:
        by_chain.setdefault((s.object, s.chain_id), {})[s.label] = set(s.coords)
    for counts in by_chain.values():
        for y in range(2, 10):
            added = counts[y] - counts[y - 1]
            assert len(added) == 1
            assert counts[y - 1] < counts[y]


def test_positional_balance_count1(id_set):
    per_object = {}
    for s in id_set:
        if s.label == 1:
            per_object.setdefault(s.object, []).append(s.coords[0])
    for cells in per_object.values():
        assert sorted(cells) == all_cells()


def test_sample_invariants(id_set):
    for s in id_set[:500]:
        assert s.label == len(s.coords)
        assert list(s.coords) == sorted(s.coords)  # row-major normalized


def test_scene_for_matches_labels(id_set):
    for s in id_set[::971]:
        scene = scene_for(s)
        assert target_count(scene) == s.label
        assert target_cells(scene) == {GridCoord(*c) for c in s.coords}


def test_noisy_train(noisy_tr, base_splits):
    train, val = base_splits
    base = train + val
    assert len(noisy_tr) == 7290
    hist = {}
    for s in noisy_tr:
        hist[s.distractors.d] = hist.get(s.distractors.d, 0) + 1
    assert hist == {1: 2430, 2: 2430, 3: 2430}
    # targets unchanged vs. the base counterpart, distractors disjoint
    for noisy, orig in zip(noisy_tr, base):
        assert noisy.coords == orig.coords
        assert noisy.label == orig.label
        assert not set(noisy.distractors.cells) & set(noisy.coords)
        assert noisy.object not in noisy.distractors.specs


def test_noisy_train_type_uniformity(noisy_tr):
    counts = {}
    for s in noisy_tr:
        for spec in s.distractors.specs:
            counts[spec] = counts.get(spec, 0) + 1
    assert set(counts.values()) == {1458}
    assert len(counts) == 10


def test_noisy_test_segment(id_set):
    seg = build_noisy_test_segment(id_set, 2, seed=0)
    assert len(seg) == 50301
    blue_star_images = {
        (s.chain_id, s.label): s.coords for s in id_set if s.object == NOISY_TS_TARGET
    }
    for s in seg[:2000]:
        assert s.object == NOISY_TS_TARGET
        assert s.distractors.d == 2
        assert len(set(s.distractors.specs)) == 1  # homogeneous type
        assert s.coords == blue_star_images[(s.chain_id, s.label)]  # targets fixed
        assert not set(s.distractors.cells) & set(s.coords)


def test_noisy_test_three_distinct_configs(id_set):
    seg = build_noisy_test_segment(id_set, 1, seed=0)
    by_image_type = {}
    for s in seg:
        key = (s.chain_id, s.label, s.distractors.specs[0])
        by_image_type.setdefault(key, []).append(frozenset(s.distractors.cells))
    for configs in by_image_type.values():
        assert len(configs) == 3
        assert len(set(configs)) == 3


def test_manifest_bytes_deterministic(tmp_path):
    def build_bytes():
        train, _ = build_base(42)
        buf = io.StringIO()
        for s in train:
            import json

            buf.write(json.dumps(sample_to_record(s)) + "\n")
        return buf.getvalue()

    assert build_bytes() == build_bytes()


def test_different_seeds_differ():
    a, _ = build_base(0)
    b, _ = build_base(1)
    assert [s.coords for s in a] != [s.coords for s in b]


def test_id_and_ood_chains_are_fresh(id_set, ood_set):
    id_chains = {}
    for s in id_set:
        if s.label == 9:
            id_chains[(s.object, s.chain_id)] = s.coords
    ood_prefixes = {}
    for s in ood_set:
        if s.label == 10:
            ood_prefixes[(s.object, s.chain_id)] = s.coords
    overlaps = sum(
        1
        for key, coords in id_chains.items()
        if key in ood_prefixes and set(coords) <= set(ood_prefixes[key])
    )
    assert overlaps < len(id_chains) * 0.01  # not extensions of the id chains
