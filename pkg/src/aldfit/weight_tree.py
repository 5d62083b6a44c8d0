"""Recursive sign-split trees over one class's weight vector.

The root always splits at zero (sign split, ties to the positive child).
Every deeper node splits its members at the node median, taken as the
``n//2``-th sorted element (the middle value, upper middle for even
sizes) so the pivot is always a member value; values >= pivot go to the
``+`` child and an even-sized node splits in half. Repeated median splits
make the all-``+`` path converge on the largest positive weights and the
all-``-`` path on the most negative ones.

A node stays unsplit when the depth limit is reached, when it has fewer
than ``min_leaf`` members, or when every member ties the pivot so the
``-`` child would be empty. Each node additionally carries a log-space
branch fit of its absolute values when one is possible; fit failures are
recorded on the node, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ald_core import NEAR_ZERO_EPS, BranchFit, fit_branch
from .errors import ConstantBranch, DegenerateBranch, EmptyVector

PLUS = "+"
MINUS = "-"


@dataclass(frozen=True)
class WeightTreeNode:
    """One node of the sign-split tree.

    ``sign_path`` is a string over ``+``/``-`` (empty at the root);
    ``pivot`` is the value this node was split at, None for leaves;
    ``children`` is a ``(plus_child, minus_child)`` pair, None for leaves.
    """

    sign_path: str
    member_indices: np.ndarray
    member_values: np.ndarray
    pivot: float | None
    fit: BranchFit | None
    fit_error: str | None
    children: tuple["WeightTreeNode", "WeightTreeNode"] | None

    @property
    def is_leaf(self) -> bool:
        return self.children is None

    @property
    def size(self) -> int:
        return int(self.member_indices.size)

    def walk(self):
        """Yield every node, breadth-first from the root."""
        queue = [self]
        while queue:
            node = queue.pop(0)
            yield node
            if node.children is not None:
                queue.extend(node.children)


@dataclass(frozen=True)
class Stage:
    """One tree node in reporting form: path, display label, indices."""

    path: str
    label: str
    indices: list[int]


@dataclass(frozen=True)
class NeuronSelection:
    """Terminal-node neuron choices for one class.

    ``positive_terminal`` is the leaf on the all-``+`` path (largest
    weights), ``negative_terminal`` the all-``-`` leaf (most negative);
    ``per_level`` lists every node for stage-wise reporting. ``depth`` is
    the deepest sign path actually reached.
    """

    class_index: int
    depth: int
    positive_terminal: list[int]
    negative_terminal: list[int]
    per_level: list[Stage]


def stage_label(path: str) -> str:
    """Display label for a sign path: "+2" for "++", the path itself when mixed."""
    if path == "":
        return "root"
    if all(c == path[0] for c in path):
        return f"{path[0]}{len(path)}"
    return path


def build_tree(theta_k, depth: int = 3, min_leaf: int = 4) -> WeightTreeNode:
    """Build the sign-split tree of one class vector.

    ``depth`` bounds the sign-path length; ``min_leaf`` stops splits of
    small nodes (the root sign split is always performed).
    """
    values = np.asarray(theta_k, dtype=np.float64)
    if values.size == 0:
        raise EmptyVector("cannot build a tree over an empty weight vector")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if min_leaf < 2:
        raise ValueError(f"min_leaf must be >= 2, got {min_leaf}")
    indices = np.arange(values.size)
    return _build_node("", values, indices, depth, min_leaf)


def _build_node(
    path: str,
    values: np.ndarray,
    indices: np.ndarray,
    depth: int,
    min_leaf: int,
) -> WeightTreeNode:
    is_root = path == ""
    pivot = None
    children = None

    if is_root:
        pivot = 0.0
        above = values >= pivot
    elif len(path) < depth and values.size >= min_leaf:
        pivot = float(np.sort(values)[values.size // 2])
        above = values >= pivot
        if not np.any(~above):
            # every member ties the pivot; splitting cannot make progress
            pivot = None

    if pivot is not None:
        children = (
            _build_node(path + PLUS, values[above], indices[above], depth, min_leaf),
            _build_node(path + MINUS, values[~above], indices[~above], depth, min_leaf),
        )

    fit, fit_error = _node_fit(path, values, indices)
    values = values.copy()
    indices = indices.copy()
    values.setflags(write=False)
    indices.setflags(write=False)
    return WeightTreeNode(
        sign_path=path,
        member_indices=indices,
        member_values=values,
        pivot=pivot,
        fit=fit,
        fit_error=fit_error,
        children=children,
    )


def _node_fit(path, values, indices):
    """Fit the node's reflected values when at least two usable ones exist."""
    reflected = np.abs(values)
    keep = reflected > NEAR_ZERO_EPS
    sign = "negative" if path.startswith(MINUS) else "positive"
    try:
        return fit_branch(reflected[keep], sign, indices=indices[keep]), None
    except DegenerateBranch:
        return None, "degenerate"
    except ConstantBranch:
        return None, "constant"


def select_neurons(tree: WeightTreeNode, class_index: int) -> NeuronSelection:
    """Extract terminal-node selections and per-stage membership."""
    positive = _follow(tree, 0)
    negative = _follow(tree, 1)
    stages = [
        Stage(
            path=node.sign_path,
            label=stage_label(node.sign_path),
            indices=[int(i) for i in node.member_indices],
        )
        for node in tree.walk()
    ]
    achieved = max(len(node.sign_path) for node in tree.walk())
    return NeuronSelection(
        class_index=class_index,
        depth=achieved,
        positive_terminal=[int(i) for i in positive.member_indices],
        negative_terminal=[int(i) for i in negative.member_indices],
        per_level=stages,
    )


def _follow(node: WeightTreeNode, side: int) -> WeightTreeNode:
    while node.children is not None:
        node = node.children[side]
    return node
