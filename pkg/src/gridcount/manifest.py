"""JSONL manifest serialization.

One sample per line with a fixed key order, so identical builds produce
byte-identical files. Coordinates are stored row-major sorted.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Iterator

from .builder import DistractorInfo, Sample
from .scene import GridCoord, ObjectSpec

__all__ = [
    "sample_to_record",
    "record_to_sample",
    "write_manifest",
    "iter_manifest",
    "read_manifest",
    "write_jsonl",
    "read_jsonl",
]


def _spec_to_json(spec: ObjectSpec | None):
    if spec is None:
        return None
    return {"shape": spec.shape.value, "color": spec.color.value}


def _spec_from_json(obj) -> ObjectSpec | None:
    if obj is None:
        return None
    from .scene import Color, Shape

    return ObjectSpec(Shape(obj["shape"]), Color(obj["color"]))


def sample_to_record(sample: Sample) -> dict:
    record = {
        "id": sample.id,
        "split": sample.split,
        "image_path": sample.image_path,
        "query": sample.query,
        "object": _spec_to_json(sample.object),
        "coords": [list(c) for c in sample.coords],
        "label": sample.label,
        "distractors": None,
        "chain_id": sample.chain_id,
        "seed": sample.seed,
    }
    if sample.distractors is not None:
        record["distractors"] = {
            "d": sample.distractors.d,
            "specs": [_spec_to_json(s) for s in sample.distractors.specs],
            "cells": [list(c) for c in sample.distractors.cells],
        }
    if sample.prefill is not None:
        record["prefill"] = sample.prefill
    if sample.meta is not None:
        record["meta"] = sample.meta
    return record


def _coords_from_json(coords) -> tuple[tuple, ...]:
    out = []
    for pair in coords:
        a, b = pair
        if isinstance(a, int) and isinstance(b, int):
            out.append(GridCoord(a, b))
        else:
            out.append((float(a), float(b)))
    return tuple(out)


def record_to_sample(record: dict) -> Sample:
    distractors = None
    if record.get("distractors"):
        d = record["distractors"]
        distractors = DistractorInfo(
            d=d["d"],
            specs=tuple(_spec_from_json(s) for s in d["specs"]),
            cells=tuple(GridCoord(*c) for c in d["cells"]),
        )
    return Sample(
        id=record["id"],
        split=record["split"],
        image_path=record["image_path"],
        query=record["query"],
        object=_spec_from_json(record.get("object")),
        coords=_coords_from_json(record["coords"]),
        label=record["label"],
        chain_id=record.get("chain_id", -1),
        seed=record.get("seed", 0),
        distractors=distractors,
        prefill=record.get("prefill"),
        meta=record.get("meta"),
    )


def write_jsonl(records: Iterable[dict], path) -> int:
    """Write dict records as JSONL; returns the number of lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, separators=(", ", ": ")) + "\n")
            n += 1
    return n


def read_jsonl(path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_manifest(samples: Iterable[Sample], path) -> int:
    return write_jsonl((sample_to_record(s) for s in samples), path)


def iter_manifest(path) -> Iterator[Sample]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                yield record_to_sample(json.loads(line))


def read_manifest(path) -> list[Sample]:
    return list(iter_manifest(path))
