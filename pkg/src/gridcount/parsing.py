"""Model-output parsing: answer extraction and coordinate extraction.

The parser never raises on arbitrary text. Failure to find an answer is
encoded by the sentinel -1. Extraction order: convert standalone English
number words to digits, locate the "Answer:" field when present, then take
the first maximal digit run. Coordinates are parenthesized "(a, b)" pairs;
malformed fragments are skipped and duplicates preserved.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .prompts import Approach

__all__ = [
    "SENTINEL",
    "ParsedResponse",
    "normalize_numbers",
    "extract_count",
    "extract_coords",
    "extract_ltc_answer",
    "derived_count",
    "parse_response",
    "predicted_count",
]

SENTINEL = -1

_NUMBER_WORDS = {
    "zero": 0, "one": 1, "two": 2, "three": 3, "four": 4, "five": 5,
    "six": 6, "seven": 7, "eight": 8, "nine": 9, "ten": 10,
    "eleven": 11, "twelve": 12, "thirteen": 13, "fourteen": 14, "fifteen": 15,
    "sixteen": 16, "seventeen": 17, "eighteen": 18, "nineteen": 19,
    "twenty": 20, "thirty": 30, "forty": 40, "fifty": 50,
    "sixty": 60, "seventy": 70, "eighty": 80, "ninety": 90,
}

_WORD_RE = re.compile(r"\b(" + "|".join(_NUMBER_WORDS) + r")\b", re.IGNORECASE)
_DIGITS_RE = re.compile(r"\d+")
_ANSWER_FIELD_RE = re.compile(r"answer\s*:", re.IGNORECASE)
_COORD_INT_RE = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")
# real-world mode: non-negative decimals with at most one fractional digit
_COORD_DEC_RE = re.compile(r"\(\s*(\d+(?:\.\d)?)\s*,\s*(\d+(?:\.\d)?)\s*\)")
_LTC_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.IGNORECASE | re.DOTALL)


def normalize_numbers(text: str) -> str:
    """Replace standalone English number words (zero..twenty and the tens up
    to ninety) with digits; word boundaries respected, case-insensitive."""
    return _WORD_RE.sub(lambda m: str(_NUMBER_WORDS[m.group(0).lower()]), text)


def extract_count(text: str) -> int:
    """First maximal digit run as a non-negative integer, or -1 if none.

    When an "Answer:" field is present the scan starts after its first
    occurrence (point-then-count format), falling back to a whole-text scan
    if nothing follows it.
    """
    normalized = normalize_numbers(text)
    anchor = _ANSWER_FIELD_RE.search(normalized)
    if anchor is not None:
        match = _DIGITS_RE.search(normalized, anchor.end())
        if match is not None:
            return int(match.group(0))
    match = _DIGITS_RE.search(normalized)
    return int(match.group(0)) if match is not None else SENTINEL


def extract_coords(text: str, decimals: bool = False) -> list[tuple]:
    """All well-formed "(a, b)" pairs in textual order.

    Grid mode (default) accepts integer pairs; ``decimals=True`` additionally
    accepts one fractional digit per component (real-world coordinates).
    Malformed pairs are discarded; duplicates are preserved.
    """
    if decimals:
        return [
            (float(a), float(b)) for a, b in _COORD_DEC_RE.findall(text)
        ]
    return [(int(a), int(b)) for a, b in _COORD_INT_RE.findall(text)]


def extract_ltc_answer(text: str) -> int:
    """Integer inside the first <answer>...</answer> element, or -1."""
    match = _LTC_ANSWER_RE.search(text)
    if match is None:
        return SENTINEL
    normalized = normalize_numbers(match.group(1))
    digits = _DIGITS_RE.search(normalized)
    return int(digits.group(0)) if digits is not None else SENTINEL


@dataclass(frozen=True)
class ParsedResponse:
    """Structured view of raw model text."""

    raw: str
    coords: tuple[tuple, ...] = ()
    answer: int = SENTINEL

    @property
    def coord_count(self) -> int:
        return len(self.coords)


def derived_count(parsed: ParsedResponse) -> int:
    """The coordinate-count answer: |coords|, independent of the stated count."""
    return len(parsed.coords)


def parse_response(text: str, decimals: bool = False) -> ParsedResponse:
    """Parse arbitrary text into coordinates plus the extracted answer."""
    return ParsedResponse(
        raw=text,
        coords=tuple(extract_coords(text, decimals=decimals)),
        answer=extract_count(text),
    )


def predicted_count(parsed: ParsedResponse, approach: Approach) -> int:
    """Final count under an approach's answer-derivation rule."""
    if approach is Approach.COORD_COUNT:
        return derived_count(parsed)
    if approach is Approach.LTC:
        return extract_ltc_answer(parsed.raw)
    # DC, PtC, and Reasoning all read the extracted answer (Answer:-anchored
    # when the field is present).
    return parsed.answer
