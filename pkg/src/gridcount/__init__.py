"""gridcount: benchmark generation and evaluation for pointing-based counting.

Library surface, by area:

- scene / render: grid scenes, shape prototypes, deterministic rasterization
- builder: synthetic splits with exact cardinalities and balance
- prompts / parsing: approach prompts, fine-tune targets, response parsing
- refmodels: perfect oracle, noisy oracle, classical pixel counter
- metrics: grounding F1, exact match, consistency, cell-level F1 maps
- ablation: X-token exports, black-image, leave-one-out, patch pairs
- realdata: instance masks to points, scene splits, augmentation
- evaluate / report / cli: run orchestration and report emission
"""

from .scene import (
    Shape,
    Color,
    ObjectSpec,
    GridCoord,
    Scene,
    PixelGeometry,
    CellOccupied,
    all_cells,
    target_cells,
    target_count,
    add_object,
    cell_center_px,
)
from .render import PALETTE, ShapePrototype, prototype, render, save_png, load_png
from .builder import (
    Chain,
    Sample,
    SplitSpec,
    SPLIT_SPECS,
    TRAIN_ROSTER,
    HELD_OUT_ROSTER,
    build_chains,
    build_base,
    build_id_test,
    build_ood_test,
    build_noisy_train,
    build_noisy_test,
    build_noisy_test_segment,
    scene_for,
)
from .prompts import (
    Approach,
    FTMode,
    query_for,
    approach_prompt,
    budget_for,
    ft_target,
    format_ptc_response,
    REAL_WORLD_QUERY,
)
from .parsing import (
    ParsedResponse,
    SENTINEL,
    normalize_numbers,
    extract_count,
    extract_coords,
    extract_ltc_answer,
    derived_count,
    parse_response,
    predicted_count,
)
from .refmodels import NoiseConfig, UnparseableQuery, perfect_oracle, noisy_oracle, pixel_counter
from .metrics import (
    MatchResult,
    MetricReport,
    match_grid,
    match_continuous,
    exact_match,
    consistency,
    cell_f1_map,
    accuracy,
    summarize,
)
from .ablation import (
    PatchPair,
    export_xft,
    build_black_image_set,
    build_leave_one_out_set,
    build_patch_pairs,
)
from .realdata import (
    NormPoint,
    InstanceAnnotation,
    SplitPolicy,
    mask_to_point,
    split_scenes,
    augment,
)
from .evaluate import RunConfig, evaluate_run, score_response
from .manifest import read_manifest, write_manifest

__version__ = "0.1.0"
