import math

import numpy as np
import pytest

from aldfit.ald_core import AldParams, ald_sample, fit_class, rank_grid
from aldfit.errors import MissingFit, ShapeMismatch
from aldfit.pruner import apply_mask, mask_by_residual, mask_by_terminal
from aldfit.weight_tree import NeuronSelection, build_tree, select_neurons

from conftest import make_matrix


def synthetic_theta(n=2000, seed=17):
    return ald_sample(AldParams(0.0, 2.0, 1.5), n, seed=seed).values


# --- residual rule ---------------------------------------------------------------


def test_infinite_threshold_keeps_everything():
    theta = synthetic_theta()
    mask = mask_by_residual(theta, fit_class(theta), math.inf)
    assert mask.kept == theta.size
    assert mask.dropped == 0


def test_single_outlier_dropped():
    # exact log-line with one value inflated by e^10; only it exceeds z=3
    x = rank_grid(64)
    theta = np.exp(2.0 * x + 0.3)
    outlier = 20
    theta[outlier] *= math.e**10
    mask = mask_by_residual(theta, fit_class(theta), 3.0)
    assert np.flatnonzero(~mask.keep).tolist() == [outlier]


def test_synthetic_drop_fraction_small():
    theta = synthetic_theta(n=100_000, seed=99)
    mask = mask_by_residual(theta, fit_class(theta), 3.0)
    assert mask.dropped / theta.size < 0.05


def test_drop_set_shrinks_with_threshold():
    theta = synthetic_theta(n=5000, seed=4)
    cf = fit_class(theta)
    previous = None
    for threshold in np.linspace(0.1, 4.0, 20):
        dropped = set(np.flatnonzero(~mask_by_residual(theta, cf, float(threshold)).keep))
        if previous is not None:
            assert dropped <= previous
        previous = dropped


def test_near_zero_weights_kept():
    theta = np.concatenate([synthetic_theta(200), [1e-15, -1e-14, 0.0]])
    cf = fit_class(theta)
    mask = mask_by_residual(theta, cf, 1.0)
    assert mask.keep[-3:].all()


def test_missing_fit_raises():
    theta = np.array([5.0, -1.0, -2.0, -3.0, -4.0])  # lone positive value
    with pytest.raises(MissingFit):
        mask_by_residual(theta, fit_class(theta), 3.0)


def test_empty_branch_is_fine():
    theta = np.array([1.0, 2.0, 4.0, 8.0])  # no negative values at all
    mask = mask_by_residual(theta, fit_class(theta), 3.0)
    assert mask.keep.size == 4


def test_bad_threshold():
    theta = synthetic_theta(100)
    cf = fit_class(theta)
    with pytest.raises(ValueError):
        mask_by_residual(theta, cf, 0.0)
    with pytest.raises(ValueError):
        mask_by_residual(theta, cf, -1.0)


# --- terminal rule ---------------------------------------------------------------


def test_terminal_mask_small():
    tree = build_tree([3.0, -1.0, -2.0, -4.0], depth=1, min_leaf=2)
    sel = select_neurons(tree, 0)
    assert sel.positive_terminal == [0]
    mask = mask_by_terminal(
        NeuronSelection(
            class_index=0,
            depth=1,
            positive_terminal=[0],
            negative_terminal=[3],
            per_level=sel.per_level,
        ),
        num_features=4,
    )
    assert mask.keep.tolist() == [True, False, False, True]


def test_terminal_mask_empty_negative():
    tree = build_tree([4.0, 3.0, 2.0, 1.0], depth=2, min_leaf=2)
    sel = select_neurons(tree, 0)
    mask = mask_by_terminal(sel, num_features=4)
    assert set(np.flatnonzero(mask.keep)) == set(sel.positive_terminal)


def test_terminal_mask_counts(rng):
    theta = rng.normal(size=512)
    sel = select_neurons(build_tree(theta, depth=3, min_leaf=4), 0)
    mask = mask_by_terminal(sel, num_features=512)
    assert mask.kept == len(sel.positive_terminal) + len(sel.negative_terminal)


# --- mask application --------------------------------------------------------------


def all_keep(k, d):
    return mask_by_residual(np.ones(d), _trivial_fits(d), math.inf, class_index=k)


def _trivial_fits(d):
    return fit_class(np.linspace(1.0, 2.0, d))


def test_apply_all_keep_is_identity(rng):
    m = make_matrix(rng.normal(size=(3, 20)))
    masks = [all_keep(k, 20) for k in range(3)]
    out = apply_mask(m, masks)
    assert out.values.tobytes() == m.values.tobytes()


def test_apply_all_drop_zeroes(rng):
    m = make_matrix(rng.normal(size=(2, 10)))
    masks = [
        mask_by_terminal(
            NeuronSelection(
                class_index=k,
                depth=1,
                positive_terminal=[],
                negative_terminal=[],
                per_level=[],
            ),
            num_features=10,
        )
        for k in range(2)
    ]
    out = apply_mask(m, masks)
    assert not out.values.any()


def test_apply_mixed_elementwise(rng):
    values = rng.normal(size=(4, 33)).astype(np.float32)
    m = make_matrix(values)
    theta = synthetic_theta(33, seed=1)
    cf = fit_class(theta)
    masks = [mask_by_residual(theta, cf, 1.0, class_index=k) for k in range(4)]
    out = apply_mask(m, masks)
    for k in range(4):
        keep = masks[k].keep
        assert np.array_equal(out.values[k][keep], values[k][keep])  # conserved bits
        assert not out.values[k][~keep].any()


def test_apply_idempotent(rng):
    m = make_matrix(rng.normal(size=(2, 33)))
    theta = synthetic_theta(33, seed=2)
    cf = fit_class(theta)
    masks = [mask_by_residual(theta, cf, 1.5, class_index=k) for k in range(2)]
    once = apply_mask(m, masks)
    twice = apply_mask(once, masks)
    assert twice.values.tobytes() == once.values.tobytes()


def test_apply_shape_errors(rng):
    m = make_matrix(rng.normal(size=(2, 8)))
    with pytest.raises(ShapeMismatch):
        apply_mask(m, [all_keep(0, 8)])
    with pytest.raises(ShapeMismatch):
        apply_mask(m, [all_keep(0, 8), all_keep(1, 9)])


def test_mask_preserves_name_and_labels(rng):
    m = make_matrix(rng.normal(size=(2, 8)), name="keepme", labels=["a", "b"])
    out = apply_mask(m, [all_keep(0, 8), all_keep(1, 8)])
    assert out.name == "keepme"
    assert out.class_labels == ["a", "b"]
