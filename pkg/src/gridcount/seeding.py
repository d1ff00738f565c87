"""Deterministic seed substreams.

Every random decision in the toolkit flows from one master seed through a
named substream, so independently built pieces (per split, per object, per
image) are reproducible regardless of build order or parallelism.
"""

from __future__ import annotations

import hashlib
import random

__all__ = ["child_seed", "substream"]


def child_seed(master: int, *names: object) -> int:
    """Derive a stable 64-bit seed from a master seed and stream names."""
    tag = ":".join([str(int(master))] + [str(n) for n in names])
    digest = hashlib.blake2b(tag.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def substream(master: int, *names: object) -> random.Random:
    """Seeded RNG for the named substream; same inputs give the same stream."""
    return random.Random(child_seed(master, *names))
