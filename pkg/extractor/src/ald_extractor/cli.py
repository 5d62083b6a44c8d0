"""CLI: export model heads, render restricted saliency maps, evaluate pruned heads."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import ExtractorError
from .evaluate import eval_pruned_head
from .export import export_head
from .saliency import (
    DEFAULT_SAMPLES,
    DEFAULT_SIGMA_FRACTION,
    SaliencyJob,
    discover_images,
    render_saliency,
)
from .zoo import class_labels, model_names


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except ExtractorError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ald-extract",
        description="Bridge between the local model zoo and the head-weight "
        "analysis tool (ALDW files in, selection JSON out).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    export = sub.add_parser("export", help="write a model head as an ALDW matrix")
    export.add_argument("--model", required=True, choices=model_names())
    export.add_argument("--out", required=True)
    export.add_argument("--seed", type=int, default=0,
                        help="init seed when no pretrained weights are cached")
    export.set_defaults(func=cmd_export)

    saliency = sub.add_parser(
        "saliency", help="render neuron-restricted Smooth Grad-CAM++ overlays"
    )
    saliency.add_argument("--model", required=True, choices=model_names())
    saliency.add_argument("--selection", required=True,
                          help="selection JSON produced by the analysis CLI")
    saliency.add_argument("--images", required=True, help="directory of images")
    saliency.add_argument("--target", required=True,
                          help="class index or class label")
    saliency.add_argument("--out", required=True, help="output directory")
    saliency.add_argument("--stages", choices=("all", "terminals"), default="all")
    saliency.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    saliency.add_argument("--sigma", type=float, default=DEFAULT_SIGMA_FRACTION,
                          help="noise sigma as a fraction of the input range")
    saliency.add_argument("--seed", type=int, default=0)
    saliency.set_defaults(func=cmd_saliency)

    evaluate = sub.add_parser("eval", help="top-1 accuracy with a pruned head")
    evaluate.add_argument("--model", required=True, choices=model_names())
    evaluate.add_argument("--head", required=True, help="pruned ALDW matrix")
    evaluate.add_argument("--images", required=True,
                          help="folder of class-named subdirectories")
    evaluate.add_argument("--seed", type=int, default=0)
    evaluate.set_defaults(func=cmd_eval)

    return parser


def cmd_export(args) -> None:
    manifest = export_head(args.model, args.out, seed=args.seed)
    print(json.dumps(manifest.as_dict(), indent=2))


def _resolve_target(model: str, text: str) -> int:
    if text.lstrip("-").isdigit():
        return int(text)
    labels = [s.lower() for s in class_labels(model)]
    if text.lower() in labels:
        return labels.index(text.lower())
    raise ExtractorError(f"target {text!r} is neither an index nor a known label")


def cmd_saliency(args) -> None:
    job = SaliencyJob(
        model=args.model,
        image_paths=discover_images(args.images),
        target_class=_resolve_target(args.model, args.target),
        selection_path=Path(args.selection),
        out_dir=Path(args.out),
        stage_filter=args.stages,
        samples=args.samples,
        sigma_fraction=args.sigma,
        seed=args.seed,
    )
    if not job.image_paths:
        raise ExtractorError(f"no images found under {args.images}")
    written = render_saliency(job)
    print(json.dumps({"written": [str(p) for p in written]}, indent=2))


def cmd_eval(args) -> None:
    report = eval_pruned_head(args.model, args.head, args.images, seed=args.seed)
    print(json.dumps(report.as_dict(), indent=2))


if __name__ == "__main__":
    sys.exit(main())
