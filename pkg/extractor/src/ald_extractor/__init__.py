"""Model-zoo bridge for the head-weight analysis tool."""

from .evaluate import AccuracyReport, eval_pruned_head
from .export import ExportManifest, export_head
from .saliency import SaliencyJob, render_saliency, smooth_grad_campp
from .selection import Selection, load_selection

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "ExportManifest",
    "SaliencyJob",
    "Selection",
    "__version__",
    "eval_pruned_head",
    "export_head",
    "load_selection",
    "render_saliency",
    "smooth_grad_campp",
]
