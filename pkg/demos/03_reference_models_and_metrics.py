"""Score the built-in reference models on a slice of the id split.

The perfect oracle pins the ceiling (everything 100%), the noisy oracle
calibrates the metrics (known omission rate -> known recall), and the pixel
counter exercises the whole render -> detect -> parse -> score pipeline
without any neural network.
"""

import random

from gridcount import NoiseConfig, RunConfig, build_id_test, evaluate_run
from gridcount.prompts import Approach

id_set = build_id_test(seed=0)
subset = random.Random(0).sample(id_set, 600)


def show(name, report):
    def pct(v):
        return "  n/a " if v is None else f"{100 * v:5.1f}%"

    print(f"{name:22s} acc={pct(report.accuracy)} f1={pct(report.f1)} "
          f"em={pct(report.em_rate)} cons={pct(report.consistency_rate)}")


show("perfect oracle (ptc)", evaluate_run(
    RunConfig(manifest="", model="oracle", approach=Approach.PTC), samples=subset).report)

show("pixel counter (ptc)", evaluate_run(
    RunConfig(manifest="", model="pixel", approach=Approach.PTC), samples=subset).report)

# 20% of coordinates dropped: recall ~0.8; the stated answer tracks the
# emitted coordinates (consistent mode) so consistency stays at 100%.
noise = NoiseConfig(omit_rate=0.2, answer_mode="consistent")
show("noisy oracle omit=.2", evaluate_run(
    RunConfig(manifest="", model="noisy", approach=Approach.PTC, noise=noise),
    samples=subset).report)

# Deriving the count from the coordinates (coordcount) vs. trusting the
# stated answer: identical here because the noisy oracle is consistent.
show("noisy, coordcount", evaluate_run(
    RunConfig(manifest="", model="noisy", approach=Approach.COORD_COUNT, noise=noise),
    samples=subset).report)

# An answer field that errs independently of the (perfect) coordinates:
# consistency collapses while grounding stays perfect.
err = NoiseConfig(answer_mode="independent_error", error_rate=0.5)
show("noisy, wrong answers", evaluate_run(
    RunConfig(manifest="", model="noisy", approach=Approach.PTC, noise=err),
    samples=subset).report)
