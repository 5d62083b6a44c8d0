"""Command-line entry point: fit, tree, select, prune, synth.

All commands are deterministic given their flags and input bytes; seeds
are explicit. Reports are JSON on stdout unless ``--out`` redirects them
to a file. Exit codes: 0 ok, 2 I/O or malformed input, 3 usage, 4 no
fittable classes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .ald_core import AldParams, ClassFit, ald_sample, fit_class
from .errors import AldfitError, InvalidParams, IoFailure, MissingFit
from .plotting import build_panel, fit_plot_svg, plot_points_csv
from .pruner import (
    all_keep_mask,
    apply_mask,
    mask_by_residual,
    mask_by_terminal,
    threshold_from_text,
)
from .tensor_io import WeightMatrix, read_matrix, write_matrix
from .weight_tree import WeightTreeNode, build_tree, select_neurons, stage_label

EXIT_OK = 0
EXIT_IO = 2
EXIT_USAGE = 3
EXIT_NO_FIT = 4

# classes plotted in the original head-weight study; used as the default
# filter whenever the input matrix carries labels that include them
DEFAULT_LABEL_FILTER = ("tricycle", "web site", "whiptail")


class UsageError(Exception):
    """Semantic flag errors detected after parsing."""


class NoFittableClasses(Exception):
    """Every selected class failed to produce any branch fit."""


class _Parser(argparse.ArgumentParser):
    """argparse reserves exit code 2 for usage; this tool uses 3."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits directly for --help and errors
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoFittableClasses as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_FIT
    except (IoFailure, OSError, AldfitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="aldfit",
        description="Fit asymmetric Laplace priors to classifier-head weights, "
        "build sign-split trees, select neurons, and emit pruning masks.",
    )
    parser.add_argument("--version", action="version", version=f"aldfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit both sign branches of each class")
    _add_input_flags(fit)
    fit.add_argument("--plot", metavar="PATH.svg", help="write quantile-plot SVG")
    fit.add_argument("--csv", metavar="PATH.csv", help="write plot points as CSV")
    fit.set_defaults(func=cmd_fit)

    tree = sub.add_parser("tree", help="emit the full sign-split tree as JSON")
    _add_input_flags(tree)
    _add_tree_flags(tree)
    tree.set_defaults(func=cmd_tree)

    select = sub.add_parser("select", help="emit terminal-node neuron selections")
    _add_input_flags(select)
    _add_tree_flags(select)
    select.set_defaults(func=cmd_select)

    prune = sub.add_parser("prune", help="write a pruned copy of the matrix")
    _add_input_flags(prune)
    _add_tree_flags(prune)
    prune.add_argument(
        "--rule", choices=("residual", "terminal"), required=True,
        help="residual: drop high standardized residuals; terminal: keep tree terminals",
    )
    prune.add_argument(
        "--threshold", type=threshold_from_text, default=None,
        help="standardized-residual cutoff for --rule residual (accepts inf)",
    )
    prune.set_defaults(func=cmd_prune)

    synth = sub.add_parser("synth", help="write a synthetic ALD-distributed matrix")
    synth.add_argument("--lambda", dest="lam", type=float, required=True)
    synth.add_argument("--kappa", type=float, required=True)
    synth.add_argument("--m", type=float, default=0.0)
    synth.add_argument("--K", type=int, required=True, help="number of classes")
    synth.add_argument("--D", type=int, required=True, help="features per class")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, metavar="PATH")
    synth.set_defaults(func=cmd_synth)

    return parser


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, metavar="PATH", help="ALDW or CSV matrix")
    p.add_argument("--out", metavar="PATH", help="output file (default: JSON to stdout)")
    p.add_argument(
        "--class", dest="classes", type=int, action="append", metavar="N",
        help="class index to process (repeatable; default: all, or the "
        "bundled label filter when labels are present)",
    )
    p.add_argument(
        "--label", dest="labels", action="append", metavar="NAME",
        help="class label to process (repeatable)",
    )


def _add_tree_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--min-leaf", type=int, default=4)


# --- shared helpers ---------------------------------------------------------


def _load(args) -> tuple[WeightMatrix, str]:
    path = Path(args.input)
    digest = "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()
    return read_matrix(path), digest


def _resolve_classes(matrix: WeightMatrix, classes, labels) -> list[int]:
    k = matrix.num_classes
    chosen: set[int] = set()
    if classes:
        for c in classes:
            if not 0 <= c < k:
                raise UsageError(f"--class {c} out of range for K={k}")
            chosen.add(c)
    if labels:
        if matrix.class_labels is None:
            raise UsageError("--label given but the matrix has no class labels")
        lowered = [s.lower() for s in matrix.class_labels]
        for name in labels:
            hits = [i for i, s in enumerate(lowered) if s == name.lower()]
            if not hits:
                raise UsageError(f"--label {name!r} not found in matrix labels")
            chosen.update(hits)
    if chosen:
        return sorted(chosen)
    if matrix.class_labels is not None:
        defaults = _default_label_classes(matrix.class_labels)
        if defaults:
            return defaults
    return list(range(k))


def _default_label_classes(class_labels: list[str]) -> list[int]:
    hits = []
    for i, label in enumerate(class_labels):
        head = label.lower().split(",")[0].strip()
        if head in DEFAULT_LABEL_FILTER:
            hits.append(i)
    return hits


def _emit_json(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _label_of(matrix: WeightMatrix, k: int) -> str | None:
    return matrix.class_labels[k] if matrix.class_labels is not None else None


# --- fit ---------------------------------------------------------------------


def cmd_fit(args) -> None:
    matrix, digest = _load(args)
    selected = _resolve_classes(matrix, args.classes, args.labels)

    entries = []
    panels = []
    any_fit = False
    for k in selected:
        cf = fit_class(matrix.row(k))
        entries.append(_class_entry(matrix, k, cf))
        if cf.positive.fit is not None or cf.negative.fit is not None:
            any_fit = True
            panels.append(build_panel(k, _label_of(matrix, k), cf, matrix.row(k)))
    if not any_fit:
        raise NoFittableClasses(
            f"none of the {len(selected)} selected classes produced a branch fit"
        )

    report = {
        "matrix_name": matrix.name,
        "tool_version": __version__,
        "input_digest": digest,
        "location_m": 0.0,
        "classes": entries,
    }
    _emit_json(report, args.out)
    if args.plot:
        Path(args.plot).write_text(fit_plot_svg(panels), encoding="utf-8")
    if args.csv:
        Path(args.csv).write_text(plot_points_csv(panels), encoding="utf-8")


def _class_entry(matrix: WeightMatrix, k: int, cf: ClassFit) -> dict:
    branches = {}
    errors = {}
    for summary in (cf.positive, cf.negative):
        if summary.fit is not None:
            branches[summary.sign] = {
                "sign": summary.sign,
                "count": summary.fit.count,
                "slope": summary.fit.slope,
                "intercept": summary.fit.intercept,
                "r_squared": summary.fit.r_squared,
                "residual_sd": summary.fit.residual_sd,
                "rate_ml": summary.rate_ml,
                "excluded_near_zero": summary.excluded_near_zero,
            }
        else:
            branches[summary.sign] = None
            errors[summary.sign] = (
                f"{summary.error} ({summary.n_values} value(s) after "
                f"near-zero exclusion)"
            )
    entry = {
        "class_index": k,
        "label": _label_of(matrix, k),
        "branches": branches,
        "combined": None,
    }
    if errors:
        entry["branch_errors"] = errors
    if cf.params is not None:
        entry["combined"] = {
            "lambda": cf.params.lam,
            "kappa": cf.params.kappa,
            "m": cf.params.m,
        }
    return entry


# --- tree / select -----------------------------------------------------------


def cmd_tree(args) -> None:
    matrix, digest = _load(args)
    selected = _resolve_classes(matrix, args.classes, args.labels)
    _check_tree_flags(args)
    classes = []
    for k in selected:
        tree = build_tree(matrix.row(k), depth=args.depth, min_leaf=args.min_leaf)
        classes.append(
            {
                "class_index": k,
                "label": _label_of(matrix, k),
                "tree": _tree_json(tree),
            }
        )
    _emit_json(
        {
            "matrix_name": matrix.name,
            "tool_version": __version__,
            "input_digest": digest,
            "depth": args.depth,
            "min_leaf": args.min_leaf,
            "classes": classes,
        },
        args.out,
    )


def _tree_json(node: WeightTreeNode) -> dict:
    doc = {
        "path": node.sign_path,
        "label": stage_label(node.sign_path),
        "size": node.size,
        "pivot": node.pivot,
        "indices": [int(i) for i in node.member_indices],
        "fit": None,
        "fit_error": node.fit_error,
        "children": None,
    }
    if node.fit is not None:
        doc["fit"] = {
            "sign": node.fit.sign,
            "count": node.fit.count,
            "slope": node.fit.slope,
            "intercept": node.fit.intercept,
            "r_squared": node.fit.r_squared,
            "residual_sd": node.fit.residual_sd,
        }
    if node.children is not None:
        doc["children"] = [_tree_json(child) for child in node.children]
    return doc


def cmd_select(args) -> None:
    matrix, digest = _load(args)
    selected = _resolve_classes(matrix, args.classes, args.labels)
    _check_tree_flags(args)
    selections = []
    for k in selected:
        tree = build_tree(matrix.row(k), depth=args.depth, min_leaf=args.min_leaf)
        sel = select_neurons(tree, k)
        selections.append(
            {
                "class_index": sel.class_index,
                "label": _label_of(matrix, k),
                "depth": sel.depth,
                "positive_terminal": sel.positive_terminal,
                "negative_terminal": sel.negative_terminal,
                "stages": [
                    {"path": st.path, "label": st.label, "indices": st.indices}
                    for st in sel.per_level
                ],
            }
        )
    _emit_json(
        {
            "matrix_name": matrix.name,
            "tool_version": __version__,
            "input_digest": digest,
            "depth": args.depth,
            "min_leaf": args.min_leaf,
            "selections": selections,
        },
        args.out,
    )


def _check_tree_flags(args) -> None:
    if args.depth < 1:
        raise UsageError(f"--depth must be >= 1, got {args.depth}")
    if args.min_leaf < 2:
        raise UsageError(f"--min-leaf must be >= 2, got {args.min_leaf}")


# --- prune ---------------------------------------------------------------------


def cmd_prune(args) -> None:
    if args.rule == "residual" and args.threshold is None:
        raise UsageError("--rule residual requires --threshold")
    if args.out is None:
        raise UsageError("prune writes a binary matrix; --out is required")
    _check_tree_flags(args)

    matrix, digest = _load(args)
    restricted = set(_resolve_classes(matrix, args.classes, args.labels))

    masks = []
    entries = []
    failures = 0
    for k in range(matrix.num_classes):
        error = None
        if k not in restricted:
            mask = all_keep_mask(k, matrix.num_features, note="not selected")
        elif args.rule == "residual":
            cf = fit_class(matrix.row(k))
            try:
                mask = mask_by_residual(matrix.row(k), cf, args.threshold, class_index=k)
            except MissingFit as exc:
                mask = all_keep_mask(k, matrix.num_features, note=str(exc))
                error = str(exc)
                failures += 1
        else:
            tree = build_tree(matrix.row(k), depth=args.depth, min_leaf=args.min_leaf)
            mask = mask_by_terminal(select_neurons(tree, k), matrix.num_features)
        masks.append(mask)
        if k in restricted:
            entries.append(
                {
                    "class_index": k,
                    "kept": mask.kept,
                    "dropped": mask.dropped,
                    "dropped_indices": [int(i) for i in np.flatnonzero(~mask.keep)],
                    "error": error,
                }
            )
    if args.rule == "residual" and failures == len(restricted):
        raise NoFittableClasses(
            "residual rule failed for every selected class (missing branch fits)"
        )

    pruned = apply_mask(matrix, masks)
    write_matrix(pruned, args.out)
    rule_doc: dict = {"kind": args.rule}
    if args.rule == "residual":
        # JSON has no infinity literal
        rule_doc["threshold"] = (
            args.threshold if math.isfinite(args.threshold) else "inf"
        )
    else:
        rule_doc["depth"] = args.depth
        rule_doc["min_leaf"] = args.min_leaf
    _emit_json(
        {
            "matrix_name": matrix.name,
            "tool_version": __version__,
            "input_digest": digest,
            "rule": rule_doc,
            "out": str(args.out),
            "classes": entries,
        },
        None,
    )


# --- synth ---------------------------------------------------------------------


def cmd_synth(args) -> None:
    if args.K < 1:
        raise UsageError(f"--K must be >= 1, got {args.K}")
    if args.D < 2:
        raise UsageError(f"--D must be >= 2, got {args.D}")
    if args.seed < 0:
        raise UsageError(f"--seed must be >= 0, got {args.seed}")
    try:
        params = AldParams(m=args.m, lam=args.lam, kappa=args.kappa)
    except InvalidParams as exc:
        raise UsageError(str(exc)) from exc

    sample = ald_sample(params, args.K * args.D, seed=args.seed)
    values = sample.values.reshape(args.K, args.D).astype(np.float32)
    name = (
        f"synth_ald_lam{args.lam:g}_kap{args.kappa:g}_m{args.m:g}_seed{args.seed}"
    )
    matrix = WeightMatrix(name=name, values=values)
    write_matrix(matrix, args.out)
    _emit_json(
        {
            "name": name,
            "out": str(args.out),
            "num_classes": args.K,
            "num_features": args.D,
            "lambda": args.lam,
            "kappa": args.kappa,
            "m": args.m,
            "seed": args.seed,
        },
        None,
    )


if __name__ == "__main__":
    sys.exit(main())
