"""Parse raw model text under every counting approach.

Extraction rules: number words become digits, the first digit run after the
"Answer:" field (or anywhere, if the field is absent) becomes the count, and
"(a, b)" tuples become the coordinate list. -1 encodes extraction failure.
"""

from gridcount import parse_response, predicted_count
from gridcount.parsing import extract_ltc_answer, normalize_numbers
from gridcount.prompts import Approach

responses = [
    "7",
    "The answer is five",
    "twenty",
    "no digits here",
    "Coordinates: (0, 0), (2, 5). Answer: 2",
    "Coordinates: (1, 1), (2, 2), (3, 3). Answer: 12",   # inconsistent
    "(1, ), (3, 4)",                                      # malformed pair dropped
    "<list>\n1. one star top-left\n2. another\n</list>\n<answer>2</answer>",
]

for text in responses:
    parsed = parse_response(text)
    print(f"raw: {text!r}")
    print(f"  normalized: {normalize_numbers(text)!r}")
    print(f"  coords={list(parsed.coords)} answer={parsed.answer}")
    for approach in (Approach.DC, Approach.PTC, Approach.COORD_COUNT, Approach.LTC):
        print(f"  as {approach.value:10s} -> {predicted_count(parsed, approach)}")
    print()

# the LtC extractor reads only the <answer> element
print("ltc extraction:", extract_ltc_answer("<answer>seven</answer>"))
