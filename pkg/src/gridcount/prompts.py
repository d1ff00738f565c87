"""Queries, approach prompts, fine-tuning targets, and generation budgets."""

from __future__ import annotations

from enum import Enum
from typing import TYPE_CHECKING, Iterable

from .scene import ObjectSpec, Shape

if TYPE_CHECKING:
    from .builder import Sample

__all__ = [
    "Approach",
    "FTMode",
    "PLURALS",
    "REAL_WORLD_QUERY",
    "MOLMO_PTC_PROMPT",
    "query_for",
    "approach_prompt",
    "budget_for",
    "format_ptc_response",
    "ft_target",
    "ft_record",
]


class Approach(str, Enum):
    DC = "dc"                    # direct counting
    PTC = "ptc"                  # point then count
    COORD_COUNT = "coordcount"   # PtC prompt, answer = number of coordinates
    LTC = "ltc"                  # list then count
    REASONING = "reasoning"


class FTMode(str, Enum):
    DC = "dc"
    PTC = "ptc"
    XFT = "xft"  # each coordinate replaced by the literal token "X"


PLURALS: dict[Shape, str] = {
    Shape.CIRCLE: "circles",
    Shape.SQUARE: "squares",
    Shape.STAR: "stars",
    Shape.TRIANGLE: "triangles",
    Shape.PLUS: "pluses",
}

REAL_WORLD_QUERY = "How many objects are there?"


def query_for(obj: ObjectSpec) -> str:
    """Counting query for one object kind, e.g. 'How many blue stars are there?'."""
    return f"How many {obj.color.value} {PLURALS[obj.shape]} are there?"


_DC_PROMPT = "Answer using as few words as possible."

_PTC_PROMPT = (
    "Count the object(s) in the image. First generate the object's location(s) "
    "(returning a pair of (x, y) coordinates between 0 and 100), then return the "
    'total number of objects. Only answer with "Coordinates: ... Answer:".'
)

MOLMO_PTC_PROMPT = "Count by pointing."

_LTC_PROMPT = """You are given an image.

1. First, list all instances of the object mentioned in the question as a numbered list. Each list item must contain a brief identifier (e.g., position or distinguishing detail).

2. Then, count the number of listed items.

3. Finally, provide the final answer within <answer></answer>. The answer must match the number of listed items.

Output format:

<list>

1.

2.

</list>

<answer>N</answer>

Question:"""

_REASONING_PROMPT = "Only answer with the numerical value."

_PROMPTS: dict[Approach, str] = {
    Approach.DC: _DC_PROMPT,
    Approach.PTC: _PTC_PROMPT,
    Approach.COORD_COUNT: _PTC_PROMPT,  # shares PtC's prompt
    Approach.LTC: _LTC_PROMPT,
    Approach.REASONING: _REASONING_PROMPT,
}


def approach_prompt(approach: Approach, molmo: bool = False) -> str:
    """Fixed instruction text for a counting approach.

    ``molmo=True`` selects the pointing-style prompt variant for the PtC
    family instead of the default one.
    """
    if molmo and approach in (Approach.PTC, Approach.COORD_COUNT):
        return MOLMO_PTC_PROMPT
    return _PROMPTS[approach]


# max_new_tokens per approach: fine-tuned DC=5 and PtC=1,000; training-free
# PtC/LtC=3,000 and Reasoning=32,768. Training-free DC reuses 5 (short-answer
# prompt); override per run when a model needs more.
_BUDGETS_FINETUNED: dict[Approach, int] = {
    Approach.DC: 5,
    Approach.PTC: 1000,
    Approach.COORD_COUNT: 1000,
    Approach.LTC: 3000,
    Approach.REASONING: 32768,
}
_BUDGETS_TRAINING_FREE: dict[Approach, int] = {
    Approach.DC: 5,
    Approach.PTC: 3000,
    Approach.COORD_COUNT: 3000,
    Approach.LTC: 3000,
    Approach.REASONING: 32768,
}


def budget_for(approach: Approach, finetuned: bool = False) -> int:
    """Generation budget (max new tokens) for an approach."""
    table = _BUDGETS_FINETUNED if finetuned else _BUDGETS_TRAINING_FREE
    return table[approach]


def format_ptc_response(coords: Iterable[tuple], answer: int) -> str:
    """Canonical point-then-count string: coordinates sorted row-major, then
    the final count: 'Coordinates: (r1, c1), (r2, c2). Answer: y'."""
    parts = ", ".join(f"({a}, {b})" for a, b in sorted(coords))
    return f"Coordinates: {parts}. Answer: {answer}"


def ft_target(sample: "Sample", mode: FTMode) -> str:
    """Fine-tuning target string for a sample.

    DC is the bare count; PtC prepends the row-major sorted coordinates; XFT
    is the PtC skeleton with every coordinate replaced by the token "X".
    """
    if mode is FTMode.DC:
        return str(sample.label)
    if mode is FTMode.PTC:
        return format_ptc_response(sample.coords, sample.label)
    if mode is FTMode.XFT:
        parts = ", ".join("X" for _ in sample.coords)
        return f"Coordinates: {parts}. Answer: {sample.label}"
    raise ValueError(f"unknown fine-tuning mode {mode!r}")


def ft_record(sample: "Sample", mode: FTMode) -> dict:
    """One JSONL fine-tuning record: {image_path, prompt, target}."""
    return {
        "image_path": sample.image_path,
        "prompt": sample.query,
        "target": ft_target(sample, mode),
    }
