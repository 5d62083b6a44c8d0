"""Registry of supported image classifiers and their head/feature anatomy.

Models are built from the local torchvision zoo. Pretrained weights are
used when present in the local cache; otherwise construction falls back to
a seeded random initialization (recorded on the manifest), which keeps
every shape-level contract intact in offline environments. ImageNet class
names ship with torchvision's weight metadata and need no download.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from urllib.parse import urlparse

import torch
from torchvision import models

from .errors import HeadNotFound, UnknownModel


@dataclass(frozen=True)
class ModelSpec:
    name: str
    builder: object
    weights_enum: object
    head_attr: str
    cam_attr: str | None  # last conv stage; None when CAM is unsupported
    input_size: int


_REGISTRY = {
    "resnet18": ModelSpec(
        "resnet18", models.resnet18, models.ResNet18_Weights.IMAGENET1K_V1,
        "fc", "layer4", 224,
    ),
    "resnet34": ModelSpec(
        "resnet34", models.resnet34, models.ResNet34_Weights.IMAGENET1K_V1,
        "fc", "layer4", 224,
    ),
    "resnet152": ModelSpec(
        "resnet152", models.resnet152, models.ResNet152_Weights.IMAGENET1K_V1,
        "fc", "layer4", 224,
    ),
    "swin_base_384": ModelSpec(
        "swin_base_384", models.swin_b, models.Swin_B_Weights.IMAGENET1K_V1,
        "head", None, 384,
    ),
}


def model_names() -> list[str]:
    return sorted(_REGISTRY)


def get_spec(name: str) -> ModelSpec:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownModel(
            f"unknown model {name!r}; available: {', '.join(model_names())}"
        ) from None


def class_labels(name: str) -> list[str]:
    return list(get_spec(name).weights_enum.meta["categories"])


def _weights_cached(spec: ModelSpec) -> bool:
    filename = Path(urlparse(spec.weights_enum.url).path).name
    return (Path(torch.hub.get_dir()) / "checkpoints" / filename).exists()


def load_model(name: str, seed: int = 0) -> tuple[torch.nn.Module, bool]:
    """Build the model; returns (model, pretrained_flag).

    Uses the cached pretrained weights when present and falls back to a
    seeded random initialization otherwise (no network attempts).
    """
    spec = get_spec(name)
    if _weights_cached(spec):
        model = spec.builder(weights=spec.weights_enum)
        pretrained = True
    else:
        torch.manual_seed(seed)
        model = spec.builder(weights=None)
        pretrained = False
    model.eval()
    return model, pretrained


def head_linear(model: torch.nn.Module, name: str) -> torch.nn.Linear:
    spec = get_spec(name)
    head = getattr(model, spec.head_attr, None)
    if not isinstance(head, torch.nn.Linear):
        raise HeadNotFound(
            f"{name}.{spec.head_attr} is not a single linear layer"
        )
    return head


def cam_stage(model: torch.nn.Module, name: str) -> torch.nn.Module:
    spec = get_spec(name)
    if spec.cam_attr is None:
        raise HeadNotFound(
            f"{name} has no supported convolutional stage for CAM extraction"
        )
    return getattr(model, spec.cam_attr)
