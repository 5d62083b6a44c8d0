"""Top-1 accuracy of a model with its head swapped for a pruned matrix.

The image folder holds one subdirectory per class, named either by class
index or by the model's class label; any image files inside count as
samples of that class. The report always carries the unpruned baseline
alongside the pruned accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .aldw import read_aldw
from .errors import ExtractorError, ShapeMismatch
from .saliency import IMAGE_SUFFIXES, load_image
from .zoo import class_labels, get_spec, head_linear, load_model


@dataclass(frozen=True)
class AccuracyReport:
    model: str
    head: str
    num_images: int
    baseline_top1: float
    pruned_top1: float
    pretrained: bool

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "head": self.head,
            "num_images": self.num_images,
            "baseline_top1": self.baseline_top1,
            "pruned_top1": self.pruned_top1,
            "pretrained": self.pretrained,
        }


def collect_labeled_images(images_dir, labels: list[str]) -> list[tuple[Path, int]]:
    lowered = [s.lower() for s in labels]
    samples = []
    for sub in sorted(Path(images_dir).iterdir()):
        if not sub.is_dir():
            continue
        name = sub.name
        if name.isdigit() and int(name) < len(labels):
            target = int(name)
        elif name.lower() in lowered:
            target = lowered.index(name.lower())
        else:
            raise ExtractorError(
                f"folder {name!r} is neither a class index nor a known label"
            )
        for img in sorted(sub.iterdir()):
            if img.suffix.lower() in IMAGE_SUFFIXES:
                samples.append((img, target))
    if not samples:
        raise ExtractorError(f"no labeled images found under {images_dir}")
    return samples


def _top1(model, samples, input_size: int) -> float:
    hits = 0
    with torch.no_grad():
        for path, target in samples:
            logits = model(load_image(path, input_size))
            hits += int(logits.argmax(dim=1).item() == target)
    return hits / len(samples)


def eval_pruned_head(model_name: str, head_path, images_dir, seed: int = 0) -> AccuracyReport:
    model, pretrained = load_model(model_name, seed=seed)
    spec = get_spec(model_name)
    head = head_linear(model, model_name)

    _, pruned_values, _ = read_aldw(head_path)
    if tuple(pruned_values.shape) != tuple(head.weight.shape):
        raise ShapeMismatch(
            f"pruned matrix {pruned_values.shape} does not match the "
            f"{model_name} head {tuple(head.weight.shape)}"
        )

    samples = collect_labeled_images(images_dir, class_labels(model_name))
    baseline = _top1(model, samples, spec.input_size)

    with torch.no_grad():
        head.weight.copy_(torch.from_numpy(np.array(pruned_values)))
    pruned = _top1(model, samples, spec.input_size)

    return AccuracyReport(
        model=model_name,
        head=str(head_path),
        num_images=len(samples),
        baseline_top1=baseline,
        pruned_top1=pruned,
        pretrained=pretrained,
    )
