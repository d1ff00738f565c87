import pytest

from gridcount.builder import Sample
from gridcount.parsing import extract_coords, extract_count, parse_response
from gridcount.prompts import (
    Approach,
    FTMode,
    MOLMO_PTC_PROMPT,
    REAL_WORLD_QUERY,
    approach_prompt,
    budget_for,
    format_ptc_response,
    ft_record,
    ft_target,
    query_for,
)
from gridcount.scene import Color, GridCoord, ObjectSpec, Shape


def _sample(coords, label, obj=ObjectSpec(Shape.STAR, Color.BLUE)):
    return Sample(
        id="t/x/000/01",
        split="t",
        image_path="t.png",
        query=query_for(obj),
        object=obj,
        coords=tuple(sorted(GridCoord(*c) for c in coords)),
        label=label,
        chain_id=0,
        seed=0,
    )


def test_query_examples():
    assert query_for(ObjectSpec(Shape.STAR, Color.BLUE)) == "How many blue stars are there?"
    assert query_for(ObjectSpec(Shape.PLUS, Color.RED)) == "How many red pluses are there?"
    assert query_for(ObjectSpec(Shape.CIRCLE, Color.WHITE)) == "How many white circles are there?"
    assert REAL_WORLD_QUERY == "How many objects are there?"


def test_approach_prompt_fixtures():
    assert approach_prompt(Approach.DC) == "Answer using as few words as possible."
    assert approach_prompt(Approach.REASONING) == "Only answer with the numerical value."
    assert "<answer>N</answer>" in approach_prompt(Approach.LTC)
    assert approach_prompt(Approach.LTC).endswith("Question:")
    ptc = approach_prompt(Approach.PTC)
    assert ptc.startswith("Count the object(s) in the image.")
    assert '"Coordinates: ... Answer:"' in ptc
    assert approach_prompt(Approach.COORD_COUNT) == ptc  # shared prompt
    assert approach_prompt(Approach.PTC, molmo=True) == MOLMO_PTC_PROMPT == "Count by pointing."


def test_generation_budgets():
    assert budget_for(Approach.DC, finetuned=True) == 5
    assert budget_for(Approach.PTC, finetuned=True) == 1000
    assert budget_for(Approach.PTC, finetuned=False) == 3000
    assert budget_for(Approach.LTC, finetuned=False) == 3000
    assert budget_for(Approach.REASONING) == 32768


def test_ft_target_ptc_row_major():
    s = _sample([(2, 5), (0, 0)], 2)
    assert ft_target(s, FTMode.PTC) == "Coordinates: (0, 0), (2, 5). Answer: 2"


def test_ft_target_xft():
    s = _sample([(2, 5), (0, 0)], 2)
    assert ft_target(s, FTMode.XFT) == "Coordinates: X, X. Answer: 2"


def test_ft_target_dc():
    s = _sample([(i, i) for i in range(7)], 7)
    assert ft_target(s, FTMode.DC) == "7"


def test_row_major_order_row_then_col():
    s = _sample([(1, 0), (0, 8), (0, 1)], 3)
    assert ft_target(s, FTMode.PTC) == "Coordinates: (0, 1), (0, 8), (1, 0). Answer: 3"


def test_format_ptc_empty():
    assert format_ptc_response([], 0) == "Coordinates: . Answer: 0"


def test_ft_record_fields():
    s = _sample([(0, 0)], 1)
    rec = ft_record(s, FTMode.PTC)
    assert rec == {
        "image_path": "t.png",
        "prompt": "How many blue stars are there?",
        "target": "Coordinates: (0, 0). Answer: 1",
    }


def test_ptc_round_trip_over_generated_samples(base_splits):
    train, val = base_splits
    for s in (train + val)[::37]:
        parsed = parse_response(ft_target(s, FTMode.PTC))
        assert parsed.coords == s.coords
        assert parsed.answer == s.label
        assert len(parsed.coords) == s.label


def test_xft_has_label_many_x_and_no_tuples(base_splits):
    train, _ = base_splits
    for s in train[::101]:
        target = ft_target(s, FTMode.XFT)
        head = target.split(". Answer:")[0]
        assert head.count("X") == s.label
        assert extract_coords(target) == []
        assert extract_count(target) == s.label


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        ft_target(_sample([(0, 0)], 1), "bogus")
