"""Keep/drop masks from fit residuals or tree terminals, and their application.

Residual pruning drops a weight when its standardized log-space residual
``|log|theta| - (a*x + b)| / residual_sd`` exceeds the threshold, using the
weight's own rank-based ``x`` within its branch fit. Residuals are
standardized by the branch residual standard deviation so one threshold
works across branches of different scales. Weights that were excluded
from the regression as near-zero are kept.

Pruned matrices stay full-shape with zeros in dropped positions so they
can be loaded back into a model head unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .ald_core import ClassFit, rank_grid
from .errors import MissingFit, ShapeMismatch
from .tensor_io import WeightMatrix
from .weight_tree import NeuronSelection


@dataclass(frozen=True)
class PruneMask:
    """Per-class boolean keep vector plus the rule that produced it."""

    class_index: int
    keep: np.ndarray
    rule: Mapping[str, object]

    def __post_init__(self) -> None:
        arr = np.asarray(self.keep, dtype=bool)
        arr.setflags(write=False)
        object.__setattr__(self, "keep", arr)

    @property
    def kept(self) -> int:
        return int(np.count_nonzero(self.keep))

    @property
    def dropped(self) -> int:
        return int(self.keep.size - self.kept)


def mask_by_residual(
    theta_k,
    fits: ClassFit,
    threshold: float,
    class_index: int = 0,
) -> PruneMask:
    """Drop weights whose standardized branch residual exceeds ``threshold``.

    ``fits`` must come from fitting this same vector; each branch fit's
    ``member_indices`` identify the weights it standardizes. A branch that
    has fittable values but no fit (degenerate or constant) raises
    :class:`MissingFit`.
    """
    if not threshold > 0:
        raise ValueError(f"threshold must be > 0, got {threshold}")
    t = np.asarray(theta_k, dtype=np.float64)
    keep = np.ones(t.size, dtype=bool)
    for summary in (fits.positive, fits.negative):
        if summary.fit is None:
            if summary.n_values >= 1:
                raise MissingFit(
                    f"{summary.sign} branch has {summary.n_values} value(s) "
                    f"but no fit ({summary.error})"
                )
            continue
        fit = summary.fit
        x = rank_grid(fit.count)
        log_abs = np.log(np.abs(t[fit.member_indices]))
        residuals = log_abs - (fit.slope * x + fit.intercept)
        if fit.residual_sd > 0:
            z = np.abs(residuals) / fit.residual_sd
        else:
            z = np.where(residuals == 0.0, 0.0, np.inf)
        keep[fit.member_indices[z > threshold]] = False
    return PruneMask(
        class_index=class_index,
        keep=keep,
        rule={"kind": "residual_z", "threshold": threshold},
    )


def mask_by_terminal(selection: NeuronSelection, num_features: int) -> PruneMask:
    """Keep only the union of the two terminal-node index sets."""
    keep = np.zeros(num_features, dtype=bool)
    keep[selection.positive_terminal] = True
    keep[selection.negative_terminal] = True
    return PruneMask(
        class_index=selection.class_index,
        keep=keep,
        rule={"kind": "terminal_only", "depth": selection.depth},
    )


def all_keep_mask(class_index: int, num_features: int, note: str | None = None) -> PruneMask:
    """Identity mask for classes where a rule could not be evaluated."""
    rule: dict[str, object] = {"kind": "all_keep"}
    if note:
        rule["note"] = note
    return PruneMask(
        class_index=class_index,
        keep=np.ones(num_features, dtype=bool),
        rule=rule,
    )


def apply_mask(matrix: WeightMatrix, masks: Sequence[PruneMask]) -> WeightMatrix:
    """Zero dropped entries; kept entries stay bit-identical, shape unchanged."""
    if len(masks) != matrix.num_classes:
        raise ShapeMismatch(
            f"{len(masks)} masks for {matrix.num_classes} classes"
        )
    out = np.array(matrix.values, dtype=np.float32, copy=True)
    for row, mask in enumerate(masks):
        if mask.keep.size != matrix.num_features:
            raise ShapeMismatch(
                f"mask for class {mask.class_index} has length {mask.keep.size}, "
                f"matrix has D={matrix.num_features}"
            )
        out[row, ~mask.keep] = 0.0
    return WeightMatrix(
        name=matrix.name,
        values=out,
        class_labels=matrix.class_labels,
    )


def threshold_from_text(text: str) -> float:
    """Parse a CLI threshold, accepting ``inf`` for the identity mask."""
    value = float(text)
    if math.isnan(value) or value <= 0:
        raise ValueError(f"threshold must be > 0 or inf, got {text}")
    return value
