"""Asymmetric Laplace density, sampling, and per-branch log-space fitting.

The density used throughout, with location ``m``, scale rate ``lam > 0``
and asymmetry ``kappa > 0``::

    f(theta) = lam / (kappa + 1/kappa) * exp( (lam/kappa) * (theta - m))   theta <  m
             = lam / (kappa + 1/kappa) * exp(-(lam*kappa) * (theta - m))   theta >= m

so the right tail decays at rate ``lam*kappa`` and the left tail at rate
``lam/kappa``, and the mass below ``m`` is ``kappa**2 / (1 + kappa**2)``.

Branch fitting works on one sign branch of a class weight vector: values
are sorted ascending, placed on the unit grid ``x_i = i/(L-1)``, and
``log(value)`` is regressed on ``x`` by ordinary least squares. The OLS
slope/intercept are kept for plotting and goodness of fit; the parameter
mapping instead uses the maximum-likelihood exponential rate ``1/mean`` of
each branch, because the OLS slope of log order statistics on a uniform
grid is not a consistent rate estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .errors import (
    AtKink,
    ConstantBranch,
    DegenerateBranch,
    InvalidParams,
    InvalidRate,
    NonPositive,
)

BranchSign = Literal["positive", "negative"]

# |theta| below this is excluded from log-space regression (log blow-up)
NEAR_ZERO_EPS = 1e-12


@dataclass(frozen=True)
class AldParams:
    """Location ``m``, scale rate ``lam`` and asymmetry ``kappa``."""

    m: float
    lam: float
    kappa: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.m)):
            raise InvalidParams(f"location m must be finite, got {self.m}")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise InvalidParams(f"lambda must be > 0, got {self.lam}")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise InvalidParams(f"kappa must be > 0, got {self.kappa}")

    @property
    def rate_right(self) -> float:
        """Decay rate of the tail above ``m``."""
        return self.lam * self.kappa

    @property
    def rate_left(self) -> float:
        """Decay rate of the tail below ``m``."""
        return self.lam / self.kappa

    @property
    def mass_below(self) -> float:
        """Probability mass below the location parameter."""
        return self.kappa**2 / (1.0 + self.kappa**2)


@dataclass(frozen=True)
class BranchFit:
    """OLS fit of log branch values against the unit rank grid.

    ``member_indices`` carries the original column index of each sorted
    value, so ``member_indices[i]`` is the weight whose regressor was
    ``x_i = i/(count-1)``.
    """

    sign: BranchSign
    count: int
    slope: float
    intercept: float
    r_squared: float
    residual_sd: float
    member_indices: np.ndarray

    def predicted(self) -> np.ndarray:
        """Fitted log values on the rank grid."""
        x = rank_grid(self.count)
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class AldSample:
    """Deterministic i.i.d. draws from an asymmetric Laplace density."""

    params: AldParams
    seed: int
    values: np.ndarray


class SignBranch(NamedTuple):
    values: np.ndarray
    indices: np.ndarray


def ald_pdf(theta, params: AldParams):
    """Density at ``theta``; accepts a scalar or an array."""
    t = np.asarray(theta, dtype=np.float64)
    z = t - params.m
    prefactor = params.lam / (params.kappa + 1.0 / params.kappa)
    # exponent is <= 0 on both sides, so no overflow either way
    exponent = np.where(z < 0, params.rate_left * z, -params.rate_right * z)
    out = prefactor * np.exp(exponent)
    return float(out) if np.isscalar(theta) else out


def ald_log_pdf_slope(theta: float, params: AldParams) -> float:
    """d/dtheta log f: ``lam/kappa`` below ``m``, ``-lam*kappa`` above.

    Piecewise constant in ``theta``; undefined at the kink ``theta == m``.
    """
    if theta == params.m:
        raise AtKink(f"log-density slope undefined at theta == m == {params.m}")
    return params.rate_left if theta < params.m else -params.rate_right


def ald_sample(params: AldParams, n: int, seed: int) -> AldSample:
    """Composition sampler: pick a tail by its mass, then draw its exponential.

    With probability ``kappa^2/(1+kappa^2)`` emits ``m - E/rate_left``,
    otherwise ``m + E/rate_right``, with ``E`` a unit exponential.
    Deterministic per ``(params, n, seed)``.
    """
    if n < 1:
        raise ValueError(f"need n >= 1 draws, got {n}")
    rng = np.random.default_rng(seed)
    below = rng.random(n) < params.mass_below
    expo = rng.standard_exponential(n)
    values = np.where(
        below,
        params.m - expo / params.rate_left,
        params.m + expo / params.rate_right,
    )
    values.setflags(write=False)
    return AldSample(params=params, seed=seed, values=values)


def split_by_sign(theta_k, pivot: float = 0.0) -> tuple[SignBranch, SignBranch]:
    """Partition a weight vector at ``pivot``; ties go to the positive branch.

    Returns ``(positive, negative)`` branches, each holding values and the
    original column indices they came from.
    """
    t = np.asarray(theta_k, dtype=np.float64)
    idx = np.arange(t.size)
    pos = t >= pivot
    return (
        SignBranch(t[pos], idx[pos]),
        SignBranch(t[~pos], idx[~pos]),
    )


def rank_grid(count: int) -> np.ndarray:
    """Unit regressor grid ``x_i = i/(count-1)``, spanning [0, 1]."""
    return np.arange(count, dtype=np.float64) / (count - 1)


def fit_branch(values, sign: BranchSign, indices=None) -> BranchFit:
    """Least-squares fit of sorted log values against the unit rank grid.

    ``values`` must already be reflected to positive reals (negative-branch
    callers pass absolute values). Sorting is stable, so the fit is
    invariant to the order the values arrive in.
    """
    v = np.asarray(values, dtype=np.float64)
    if indices is None:
        idx = np.arange(v.size)
    else:
        idx = np.asarray(indices)
        if idx.shape != v.shape:
            raise ValueError("values and indices must have matching length")
    if v.size < 2:
        raise DegenerateBranch(f"branch has {v.size} value(s), need >= 2")
    if np.any(v <= 0):
        raise NonPositive("branch values must be > 0 after reflection")

    order = np.argsort(v, kind="stable")
    v_sorted = v[order]
    idx_sorted = idx[order]
    if v_sorted[0] == v_sorted[-1]:
        raise ConstantBranch("all branch values equal; zero target variance")

    L = v.size
    x = rank_grid(L)
    y = np.log(v_sorted)

    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    sxy = float(np.sum((x - x_mean) * (y - y_mean)))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean

    residuals = y - (slope * x + intercept)
    ss_res = float(np.sum(residuals**2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    r_squared = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    residual_sd = math.sqrt(ss_res / max(L - 2, 1))

    idx_sorted.setflags(write=False)
    return BranchFit(
        sign=sign,
        count=L,
        slope=slope,
        intercept=intercept,
        r_squared=r_squared,
        residual_sd=residual_sd,
        member_indices=idx_sorted,
    )


def exp_rate_from_branch(fit: BranchFit, values) -> float:
    """Maximum-likelihood exponential rate ``1/mean`` of the branch values.

    This, not the regression slope, feeds the parameter mapping; the fit is
    retained alongside for plotting and goodness of fit.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size < 2:
        raise DegenerateBranch(f"branch has {v.size} value(s), need >= 2")
    mean = float(v.mean())
    if not (mean > 0 and math.isfinite(mean)):
        raise InvalidRate(f"branch mean {mean} gives no positive rate")
    return 1.0 / mean


def ald_from_branch_rates(rate_pos: float, rate_neg: float, m: float = 0.0) -> AldParams:
    """Invert ``rate_pos = lam*kappa`` and ``rate_neg = lam/kappa``."""
    if not (rate_pos > 0 and math.isfinite(rate_pos)):
        raise InvalidRate(f"positive-branch rate must be > 0, got {rate_pos}")
    if not (rate_neg > 0 and math.isfinite(rate_neg)):
        raise InvalidRate(f"negative-branch rate must be > 0, got {rate_neg}")
    lam = math.sqrt(rate_pos * rate_neg)
    kappa = math.sqrt(rate_pos / rate_neg)
    return AldParams(m=m, lam=lam, kappa=kappa)


@dataclass(frozen=True)
class BranchSummary:
    """One sign branch of a class fit: regression, ML rate, bookkeeping.

    ``n_values`` counts the values that reached the regression attempt
    (after near-zero exclusion); ``error`` is ``"degenerate"`` or
    ``"constant"`` when no fit was possible, else None.
    """

    sign: BranchSign
    fit: BranchFit | None
    rate_ml: float | None
    n_values: int
    excluded_near_zero: int
    error: str | None


@dataclass(frozen=True)
class ClassFit:
    """Both branch summaries of one class plus the combined parameters."""

    positive: BranchSummary
    negative: BranchSummary
    params: AldParams | None

    def branch(self, sign: BranchSign) -> BranchSummary:
        return self.positive if sign == "positive" else self.negative


def fit_class(theta_k, pivot: float = 0.0, m: float = 0.0) -> ClassFit:
    """Split one class vector at ``pivot`` and fit both branches.

    Branch failures (too few values, constant values) are recorded in the
    summaries rather than raised; the combined parameters are present only
    when both branch rates are.
    """
    positive, negative = split_by_sign(theta_k, pivot)
    summaries = {}
    for sign, branch in (("positive", positive), ("negative", negative)):
        reflected = np.abs(branch.values)
        keep = reflected > NEAR_ZERO_EPS
        vals = reflected[keep]
        idx = branch.indices[keep]
        excluded = int(branch.values.size - vals.size)
        fit = None
        rate = None
        error = None
        try:
            fit = fit_branch(vals, sign, indices=idx)
            rate = exp_rate_from_branch(fit, vals)
        except DegenerateBranch:
            error = "degenerate"
        except ConstantBranch:
            error = "constant"
        summaries[sign] = BranchSummary(
            sign=sign,
            fit=fit,
            rate_ml=rate,
            n_values=int(vals.size),
            excluded_near_zero=excluded,
            error=error,
        )
    params = None
    if summaries["positive"].rate_ml is not None and summaries["negative"].rate_ml is not None:
        params = ald_from_branch_rates(
            summaries["positive"].rate_ml, summaries["negative"].rate_ml, m=m
        )
    return ClassFit(
        positive=summaries["positive"],
        negative=summaries["negative"],
        params=params,
    )
