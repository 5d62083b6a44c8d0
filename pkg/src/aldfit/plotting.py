"""Quantile-plot emission: self-contained SVG plus a CSV of the same points.

One panel per class inside a fixed 800x600 viewport: scatter of
``(x_i, log sorted |theta|)`` per branch with the fitted line drawn over
it. Scatter is thinned to at most ``MAX_SCATTER`` points per branch (the
CSV always carries every point).
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .ald_core import AldParams, ClassFit, rank_grid

WIDTH = 800
HEIGHT = 600
MARGIN_LEFT = 62
MARGIN_RIGHT = 16
PANEL_TOP = 30
PANEL_BOTTOM = 34
MAX_SCATTER = 512

BRANCH_COLOR = {"positive": "#1f77b4", "negative": "#d62728"}


@dataclass(frozen=True)
class BranchSeries:
    sign: str
    x: np.ndarray
    log_values: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    count: int


@dataclass(frozen=True)
class ClassPanel:
    class_index: int
    label: str | None
    series: list[BranchSeries]
    params: AldParams | None


def build_panel(class_index, label, class_fit: ClassFit, theta) -> ClassPanel:
    """Collect plottable branch series for one fitted class."""
    t = np.asarray(theta, dtype=np.float64)
    series = []
    for summary in (class_fit.positive, class_fit.negative):
        fit = summary.fit
        if fit is None:
            continue
        series.append(
            BranchSeries(
                sign=summary.sign,
                x=rank_grid(fit.count),
                log_values=np.log(np.abs(t[fit.member_indices])),
                slope=fit.slope,
                intercept=fit.intercept,
                r_squared=fit.r_squared,
                count=fit.count,
            )
        )
    return ClassPanel(
        class_index=class_index,
        label=label,
        series=series,
        params=class_fit.params,
    )


def plot_points_csv(panels: list[ClassPanel]) -> str:
    """Every plotted point: class, branch, rank, x, log|value|, fitted value."""
    buf = io.StringIO()
    buf.write("class_index,branch,rank,x,log_abs_value,fitted\n")
    for panel in panels:
        for s in panel.series:
            fitted = s.slope * s.x + s.intercept
            for i in range(s.count):
                buf.write(
                    f"{panel.class_index},{s.sign},{i},"
                    f"{s.x[i]:.9g},{s.log_values[i]:.9g},{fitted[i]:.9g}\n"
                )
    return buf.getvalue()


def fit_plot_svg(panels: list[ClassPanel]) -> str:
    """Render all panels stacked into one fixed-viewport SVG document."""
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    n = max(len(panels), 1)
    panel_height = HEIGHT / n
    for i, panel in enumerate(panels):
        parts.append(_render_panel(panel, i * panel_height, panel_height))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _render_panel(panel: ClassPanel, y_offset: float, panel_height: float) -> str:
    x0 = MARGIN_LEFT
    x1 = WIDTH - MARGIN_RIGHT
    y0 = y_offset + PANEL_TOP
    y1 = y_offset + panel_height - PANEL_BOTTOM
    if y1 <= y0:  # too many panels to draw axes; keep the title row only
        y1 = y0 + 1.0

    ys = [float(v) for s in panel.series for v in (s.log_values.min(), s.log_values.max())]
    ys += [s.intercept for s in panel.series]
    ys += [s.slope + s.intercept for s in panel.series]
    if not ys:
        ys = [0.0, 1.0]
    lo, hi = min(ys), max(ys)
    if hi == lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def sx(x: float) -> float:
        return x0 + x * (x1 - x0)

    def sy(y: float) -> float:
        return y1 - (y - lo) / (hi - lo) * (y1 - y0)

    out = [f'<g class="panel" data-class="{panel.class_index}">']
    out.append(_title_text(panel, x0, y_offset + 18))

    # axes and ticks
    out.append(
        f'<line x1="{x0}" y1="{y1:.2f}" x2="{x1}" y2="{y1:.2f}" '
        'stroke="#444" stroke-width="1"/>'
    )
    out.append(
        f'<line x1="{x0}" y1="{y0:.2f}" x2="{x0}" y2="{y1:.2f}" '
        'stroke="#444" stroke-width="1"/>'
    )
    for xt in (0.0, 0.25, 0.5, 0.75, 1.0):
        px = sx(xt)
        out.append(
            f'<line x1="{px:.2f}" y1="{y1:.2f}" x2="{px:.2f}" y2="{y1 + 4:.2f}" '
            'stroke="#444" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{px:.2f}" y="{y1 + 16:.2f}" font-size="10" '
            f'text-anchor="middle" fill="#333">{xt:g}</text>'
        )
    for yt in np.linspace(lo + pad, hi - pad, 4):
        py = sy(float(yt))
        out.append(
            f'<line x1="{x0 - 4}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" '
            'stroke="#444" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{x0 - 7}" y="{py + 3:.2f}" font-size="10" '
            f'text-anchor="end" fill="#333">{yt:.3g}</text>'
        )

    for s in panel.series:
        color = BRANCH_COLOR.get(s.sign, "#555")
        for j in _scatter_subset(s.count):
            out.append(
                f'<circle class="pt {s.sign}" cx="{sx(s.x[j]):.2f}" '
                f'cy="{sy(s.log_values[j]):.2f}" r="2" fill="{color}" '
                'fill-opacity="0.55"/>'
            )
        out.append(
            f'<line class="fitline {s.sign}" x1="{sx(0.0):.2f}" '
            f'y1="{sy(s.intercept):.2f}" x2="{sx(1.0):.2f}" '
            f'y2="{sy(s.slope + s.intercept):.2f}" stroke="{color}" '
            'stroke-width="1.5"/>'
        )
    out.append("</g>")
    return "\n".join(out)


def _title_text(panel: ClassPanel, x: float, y: float) -> str:
    bits = [f"class {panel.class_index}"]
    if panel.label:
        bits[0] += f" ({panel.label})"
    if panel.params is not None:
        bits.append(
            f"lambda={panel.params.lam:.4g} kappa={panel.params.kappa:.4g}"
        )
    for s in panel.series:
        bits.append(
            f"{s.sign[0]}: n={s.count} a={s.slope:.3g} "
            f"b={s.intercept:.3g} r2={s.r_squared:.3f}"
        )
    text = escape("   ".join(bits))
    return f'<text x="{x}" y="{y:.2f}" font-size="12" fill="#111">{text}</text>'


def _scatter_subset(count: int) -> np.ndarray:
    if count <= MAX_SCATTER:
        return np.arange(count)
    return np.unique(np.linspace(0, count - 1, MAX_SCATTER).round().astype(int))
