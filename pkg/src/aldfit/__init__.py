"""Asymmetric Laplace fitting, sign-split trees, and pruning for classifier heads."""

from .ald_core import (
    NEAR_ZERO_EPS,
    AldParams,
    AldSample,
    BranchFit,
    BranchSummary,
    ClassFit,
    ald_from_branch_rates,
    ald_log_pdf_slope,
    ald_pdf,
    ald_sample,
    exp_rate_from_branch,
    fit_branch,
    fit_class,
    rank_grid,
    split_by_sign,
)
from .pruner import PruneMask, apply_mask, mask_by_residual, mask_by_terminal
from .tensor_io import WeightMatrix, from_bytes, read_matrix, to_bytes, write_matrix
from .weight_tree import (
    NeuronSelection,
    Stage,
    WeightTreeNode,
    build_tree,
    select_neurons,
)

__version__ = "0.1.0"

__all__ = [
    "NEAR_ZERO_EPS",
    "AldParams",
    "AldSample",
    "BranchFit",
    "BranchSummary",
    "ClassFit",
    "NeuronSelection",
    "PruneMask",
    "Stage",
    "WeightMatrix",
    "WeightTreeNode",
    "__version__",
    "ald_from_branch_rates",
    "ald_log_pdf_slope",
    "ald_pdf",
    "ald_sample",
    "apply_mask",
    "build_tree",
    "exp_rate_from_branch",
    "fit_branch",
    "fit_class",
    "from_bytes",
    "mask_by_residual",
    "mask_by_terminal",
    "rank_grid",
    "read_matrix",
    "select_neurons",
    "split_by_sign",
    "to_bytes",
    "write_matrix",
]
