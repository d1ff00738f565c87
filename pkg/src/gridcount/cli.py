"""Command-line interface.

Subcommands: generate, export-ft, evaluate, ablate, adapt-real, report.
Every random decision derives from --seed; identical invocations produce
byte-identical manifests and images.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import builder
from .ablation import (
    BLACK_IMAGE_PATH,
    build_black_image_set,
    build_leave_one_out_set,
    build_patch_pairs,
    export_xft,
)
from .builder import SPLIT_SPECS, scene_for
from .evaluate import RunConfig, evaluate_run
from .manifest import read_manifest, write_jsonl, write_manifest
from .prompts import Approach, FTMode, ft_record
from .refmodels import NoiseConfig
from .render import black_image, render, save_png
from .report import write_per_count_csv, write_summary_csv, heatmap_svg

SPLIT_CHOICES = ["base", "id", "ood", "noisy_tr", "noisy_ts"]


def _render_samples(samples, images_root: Path) -> None:
    for s in samples:
        path = images_root / s.image_path
        path.parent.mkdir(parents=True, exist_ok=True)
        save_png(render(scene_for(s)), path)


def _check_size(name: str, actual: int) -> None:
    expected = SPLIT_SPECS[name].expected_size
    status = "ok" if actual == expected else "MISMATCH"
    print(f"  {name:14s} {actual:7d} (expected {expected:7d}) {status}")
    if actual != expected:
        sys.exit(f"cardinality mismatch for split {name}: {actual} != {expected}")


def cmd_generate(args) -> None:
    out = Path(args.out)
    manifests = out / "manifests"
    images_root = out / "images"
    seed = args.seed
    requested = args.split or ["base", "id", "ood"]
    segments = args.segments or list(range(1, 10))

    base_train = base_val = id_set = None
    print(f"generating splits {requested} with seed {seed}")
    if "base" in requested or "noisy_tr" in requested:
        base_train, base_val = builder.build_base(seed)
    if "base" in requested:
        write_manifest(base_train, manifests / "base_train.jsonl")
        write_manifest(base_val, manifests / "base_val.jsonl")
        _check_size("base_train", len(base_train))
        _check_size("base_val", len(base_val))
        _check_size("base", len(base_train) + len(base_val))
        if args.render:
            _render_samples(base_train + base_val, images_root)
    if "id" in requested or "noisy_ts" in requested:
        id_set = builder.build_id_test(seed)
    if "id" in requested:
        write_manifest(id_set, manifests / "id.jsonl")
        _check_size("id", len(id_set))
        if args.render:
            _render_samples(id_set, images_root)
    if "ood" in requested:
        ood = builder.build_ood_test(seed)
        write_manifest(ood, manifests / "ood.jsonl")
        _check_size("ood", len(ood))
        if args.render:
            _render_samples(ood, images_root)
    if "noisy_tr" in requested:
        noisy_tr = builder.build_noisy_train(base_train + base_val, seed)
        write_manifest(noisy_tr, manifests / "noisy_tr.jsonl")
        _check_size("noisy_tr", len(noisy_tr))
        if args.render:
            _render_samples(noisy_tr, images_root)
    if "noisy_ts" in requested:
        for d in segments:
            segment = builder.build_noisy_test_segment(id_set, d, seed)
            write_manifest(segment, manifests / f"noisy_ts_d{d}.jsonl")
            _check_size(f"noisy_ts_d{d}", len(segment))
            if args.render:
                _render_samples(segment, images_root)
    print(f"manifests written to {manifests}")


def cmd_export_ft(args) -> None:
    mode = FTMode(args.mode)
    samples = read_manifest(args.manifest)
    n = write_jsonl((ft_record(s, mode) for s in samples), args.out)
    print(f"wrote {n} {mode.value} fine-tuning records to {args.out}")


def _parse_noise(text: str | None) -> NoiseConfig:
    if not text:
        return NoiseConfig()
    kwargs: dict = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "omit":
            kwargs["omit_rate"] = float(value)
        elif key == "hallucinate":
            kwargs["hallucinate_rate"] = float(value)
        elif key == "jitter":
            kwargs["jitter_rate"] = float(value)
        elif key == "answer":
            if value.startswith("error"):
                kwargs["answer_mode"] = "independent_error"
                _, _, rate = value.partition(":")
                kwargs["error_rate"] = float(rate) if rate else 0.0
            else:
                kwargs["answer_mode"] = "consistent"
        else:
            raise SystemExit(f"unknown noise key {key!r}")
    return NoiseConfig(**kwargs)


def _load_toml(path: str | None) -> dict:
    if not path:
        return {}
    try:
        import tomllib  # py311+
    except ModuleNotFoundError:
        import tomli as tomllib
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def cmd_evaluate(args) -> None:
    config = _load_toml(args.config)

    def pick(flag, key, default=None):
        return flag if flag is not None else config.get(key, default)

    noise_text = pick(args.noise, "noise")
    cfg = RunConfig(
        manifest=args.manifest,
        model=pick(args.model, "model", "oracle"),
        approach=Approach(pick(args.approach, "approach", "ptc")),
        noise=_parse_noise(noise_text) if noise_text else None,
        endpoint_url=pick(args.endpoint_url, "endpoint_url"),
        endpoint_model=pick(args.endpoint_model, "endpoint_model"),
        token_env=pick(args.token_env, "token_env", "GRIDCOUNT_API_TOKEN"),
        offline_responses=pick(args.offline_responses, "offline_responses"),
        images_root=pick(args.images_root, "images_root"),
        max_new_tokens=pick(args.max_new_tokens, "max_new_tokens"),
        finetuned=bool(pick(args.finetuned or None, "finetuned", False)),
        concurrency=int(pick(args.concurrency, "concurrency", 4)),
        retries=int(pick(args.retries, "retries", 3)),
        out_dir=args.out,
        seed=int(pick(args.seed, "seed", 0)),
        decimals=bool(pick(args.decimals or None, "decimals", False)),
        tau=float(pick(args.tau, "tau", 5.0)),
    )
    result = evaluate_run(cfg)
    report = result.report
    if args.out:
        split = result.outcomes[0].sample.split if result.outcomes else ""
        run_name = Path(args.out).name
        with open(Path(args.out) / "run.json", "w", encoding="utf-8") as fh:
            json.dump(
                {"run": run_name, "split": split, "model": cfg.model,
                 "approach": cfg.approach.value, "manifest": str(args.manifest)},
                fh, indent=2,
            )
        from .report import write_run_report

        write_run_report(args.out, run_name, split, cfg.model, cfg.approach.value, report)
    def pct(v):
        return "n/a" if v is None else f"{100 * v:.2f}%"

    print(
        f"n={report.n_samples} accuracy={pct(report.accuracy)} f1={pct(report.f1)} "
        f"em={pct(report.em_rate)} consistency={pct(report.consistency_rate)} "
        f"oob={pct(report.oob_rate)}"
    )


def cmd_ablate(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    which = set(args.which or ["all"])
    if "all" in which:
        which = {"xft", "black", "loo", "patch-pairs"}

    if "xft" in which:
        if not args.base_train or not args.base_val:
            raise SystemExit("xft export requires --base-train and --base-val manifests")
        train = read_manifest(args.base_train)
        val = read_manifest(args.base_val)
        n1 = write_jsonl(iter(export_xft(train)), out / "xft_train.jsonl")
        n2 = write_jsonl(iter(export_xft(val)), out / "xft_val.jsonl")
        print(f"  xft: {n1} train + {n2} val records")

    needs_id = which & {"black", "loo", "patch-pairs"}
    if needs_id:
        if not args.id_manifest:
            raise SystemExit("--id-manifest is required for black/loo/patch-pairs")
        id_set = read_manifest(args.id_manifest)
    if "black" in which:
        samples = build_black_image_set(id_set)
        write_manifest(samples, out / "black_image.jsonl")
        save_png(black_image(), out / BLACK_IMAGE_PATH)
        print(f"  black-image: {len(samples)} samples (shared {BLACK_IMAGE_PATH})")
    if "loo" in which:
        samples = build_leave_one_out_set(id_set)
        write_manifest(samples, out / "leave_one_out.jsonl")
        print(f"  leave-one-out: {len(samples)} variants")
    if "patch-pairs" in which:
        pairs = build_patch_pairs(id_set, args.seed)
        records = (
            {
                "source_id": p.source_id,
                "target_id": p.target_id,
                "object": {"shape": p.object.shape.value, "color": p.object.color.value},
                "source_count": p.source_count,
                "target_count": p.target_count,
            }
            for p in pairs
        )
        n = write_jsonl(records, out / "patch_pairs.jsonl")
        expected = 5184
        print(f"  patch-pairs: {n} (expected {expected})")
        if n != expected:
            sys.exit(f"patch pair cardinality mismatch: {n} != {expected}")


def cmd_adapt_real(args) -> None:
    from PIL import Image

    from .realdata import (
        InstanceAnnotation,
        SplitPolicy,
        annotation_to_record,
        expand_train_set,
        split_scenes,
    )

    rows = list(csv.DictReader(open(args.scenes_csv, encoding="utf-8")))
    annotations = []
    masks_dir = Path(args.masks_dir)
    for row in rows:
        label_img = np.asarray(Image.open(masks_dir / row["mask"]))
        annotations.append(
            InstanceAnnotation(
                image_ref=row["image"],
                scene_id=row["scene_id"],
                label_image=label_img,
                location=row.get("location", ""),
                view=row.get("view", ""),
            )
        )
    sizes = None
    if args.sizes:
        train, val, id_test, ood_test = (int(v) for v in args.sizes.split(","))
        sizes = {"train": train, "val": val, "id_test": id_test, "ood_test": ood_test}
    policy = SplitPolicy(seed=args.seed, **({"sizes": sizes} if sizes else {}))
    splits = split_scenes(annotations, policy)

    out = Path(args.out)
    images_dir = Path(args.images_dir)
    aug_dir = out / "augmented"
    for name, anns in splits.items():
        records = [annotation_to_record(a, name) for a in anns]
        if name == "train" and args.copies > 0:
            aug_dir.mkdir(parents=True, exist_ok=True)

            def load(path: str) -> np.ndarray:
                return np.asarray(Image.open(images_dir / path).convert("RGB"))

            def save(path: str, img: np.ndarray) -> None:
                target = aug_dir / path
                target.parent.mkdir(parents=True, exist_ok=True)
                Image.fromarray(img).save(target)

            records = expand_train_set(
                records, load, n_copies=args.copies, seed=args.seed, save_image=save
            )
        n = write_jsonl(iter(records), out / f"real_{name}.jsonl")
        print(f"  real_{name}: {n} records")


def cmd_report(args) -> None:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    curve: dict[int, float] = {}
    for run_dir in args.runs:
        run_dir = Path(run_dir)
        meta_path = run_dir / "run.json"
        metrics_path = run_dir / "metrics.json"
        if not metrics_path.exists():
            print(f"  skipping {run_dir}: no metrics.json")
            continue
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        metrics = json.loads(metrics_path.read_text())
        rows.append(
            {
                "run": meta.get("run", run_dir.name),
                "split": meta.get("split", ""),
                "model": meta.get("model", ""),
                "approach": meta.get("approach", ""),
                "n_samples": metrics.get("n_samples"),
                "accuracy": metrics.get("accuracy"),
                "precision": metrics.get("precision"),
                "recall": metrics.get("recall"),
                "f1": metrics.get("f1"),
                "em_rate": metrics.get("em_rate"),
                "consistency_rate": metrics.get("consistency_rate"),
                "oob_rate": metrics.get("oob_rate"),
            }
        )
        split = meta.get("split", "")
        if split.startswith("noisy_ts_d"):
            curve[int(split.removeprefix("noisy_ts_d"))] = metrics.get("accuracy", 0.0)
        cell = metrics.get("cell_f1")
        if cell is not None:
            grid = np.array(
                [[np.nan if v is None else v for v in row] for row in cell], dtype=float
            )
            name = meta.get("run", run_dir.name)
            svg = heatmap_svg(grid, title=f"{name} cell F1 (%)")
            (out / f"{name}_cell_f1.svg").write_text(svg, encoding="utf-8")
    write_summary_csv(rows, out / "summary.csv")
    if curve:
        write_per_count_csv(curve, out / "distractor_curve.csv", key_name="distractors")
    print(f"report for {len(rows)} runs written to {out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcount",
        description="Benchmark generation and evaluation for pointing-based counting",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build synthetic splits (manifests and images)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--split", nargs="+", choices=SPLIT_CHOICES)
    p.add_argument("--segments", nargs="+", type=int, help="noisy_ts segments (default 1..9)")
    p.add_argument("--render", action=argparse.BooleanOptionalAction, default=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("export-ft", help="export fine-tuning JSONL from a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", required=True, choices=[m.value for m in FTMode])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_ft)

    p = sub.add_parser("evaluate", help="run a model over a manifest and score it")
    p.add_argument("--manifest", required=True)
    p.add_argument("--model", choices=["oracle", "noisy", "pixel", "prefill", "endpoint", "offline"])
    p.add_argument("--approach", choices=[a.value for a in Approach])
    p.add_argument("--noise", help="e.g. omit=0.2,hallucinate=0.1,answer=consistent")
    p.add_argument("--endpoint-url")
    p.add_argument("--endpoint-model")
    p.add_argument("--token-env")
    p.add_argument("--offline-responses")
    p.add_argument("--images-root")
    p.add_argument("--max-new-tokens", type=int)
    p.add_argument("--finetuned", action="store_true", default=False)
    p.add_argument("--concurrency", type=int)
    p.add_argument("--retries", type=int)
    p.add_argument("--decimals", action="store_true", default=False)
    p.add_argument("--tau", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="TOML file with defaults for these flags")
    p.add_argument("--out", help="run directory for records and reports")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="emit ablation sample sets")
    p.add_argument("--which", nargs="+", choices=["all", "xft", "black", "loo", "patch-pairs"])
    p.add_argument("--base-train", help="base_train.jsonl manifest (for xft)")
    p.add_argument("--base-val", help="base_val.jsonl manifest (for xft)")
    p.add_argument("--id-manifest", help="id.jsonl manifest (for black/loo/patch-pairs)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("adapt-real", help="convert mask-annotated real images to manifests")
    p.add_argument("--images-dir", required=True)
    p.add_argument("--masks-dir", required=True)
    p.add_argument("--scenes-csv", required=True, help="columns: image,mask,scene_id,location,view")
    p.add_argument("--sizes", help="train,val,id_test,ood_test targets (default 1160,200,420,510)")
    p.add_argument("--copies", type=int, default=10, help="augmented copies per train image")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_adapt_real)

    p = sub.add_parser("report", help="aggregate run directories into CSV + SVG reports")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
