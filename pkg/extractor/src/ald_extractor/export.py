"""Export a classifier's final-layer weight matrix into an ALDW file."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path

from .aldw import write_aldw
from .zoo import class_labels, head_linear, load_model


@dataclass(frozen=True)
class ExportManifest:
    model: str
    layer: str
    num_classes: int
    num_features: int
    labels: int
    out: str
    checksum: str
    pretrained: bool

    def as_dict(self) -> dict:
        return {
            "model": self.model,
            "layer": self.layer,
            "num_classes": self.num_classes,
            "num_features": self.num_features,
            "labels": self.labels,
            "out": self.out,
            "checksum": self.checksum,
            "pretrained": self.pretrained,
        }


def export_head(model_name: str, out_path, seed: int = 0) -> ExportManifest:
    """Write the head weight matrix plus class labels; returns the manifest."""
    model, pretrained = load_model(model_name, seed=seed)
    head = head_linear(model, model_name)
    weights = head.weight.detach().cpu().numpy()
    labels = class_labels(model_name)
    write_aldw(out_path, f"{model_name}_head", weights, class_labels=labels)
    checksum = "sha256:" + hashlib.sha256(Path(out_path).read_bytes()).hexdigest()
    return ExportManifest(
        model=model_name,
        layer=type(head).__name__,
        num_classes=weights.shape[0],
        num_features=weights.shape[1],
        labels=len(labels),
        out=str(out_path),
        checksum=checksum,
        pretrained=pretrained,
    )
