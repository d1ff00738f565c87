"""Cell-level F1 maps: how grounding quality varies across the grid.

A model that systematically misses one region shows up as a cold cell in the
9x9 F1 map. Here an adversarial oracle drops every point in the right-most
column, then the map and its SVG heatmap make the bias obvious.
"""

from pathlib import Path

import numpy as np

from gridcount import build_id_test
from gridcount.metrics import cell_f1_map, match_grid
from gridcount.parsing import parse_response
from gridcount.prompts import format_ptc_response
from gridcount.report import heatmap_svg, write_cell_grid_csv

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

id_set = build_id_test(seed=0)


def right_column_blind_oracle(sample):
    kept = [c for c in sample.coords if c[1] < 8]  # drops col 8 entirely
    return format_ptc_response(kept, len(kept))


results = []
for s in id_set[:5000]:
    parsed = parse_response(right_column_blind_oracle(s))
    results.append(match_grid(parsed.coords, s.coords, sample_id=s.id))

grid = cell_f1_map(results)
print("cell F1 map (rows 0..8, cols 0..8):")
for row in grid:
    print("  " + " ".join("  -  " if np.isnan(v) else f"{v:5.1f}" for v in row))
print("column means:", np.round(np.nanmean(grid, axis=0), 1))

(out_dir / "bias_heatmap.svg").write_text(heatmap_svg(grid, title="right-column-blind oracle"))
write_cell_grid_csv(grid, out_dir / "bias_heatmap.csv")
print("wrote", out_dir / "bias_heatmap.svg", "and .csv")
