"""Smooth Grad-CAM++ restricted to subsets of final-layer neurons.

The class logit is recomputed from the last convolutional stage as
``sum_i w[target, i] * GAP(A)_i`` with the head weight row zeroed outside
the selected neuron subset, so gradients only flow through the chosen
neurons' contributions. First, second, and third derivative maps are
averaged over noise-perturbed copies of the input (the smoothing step),
combined into pixel weights, and reduced to a relu'd class activation map
over the clean activation.

Restricting to the full neuron set reproduces the unrestricted map
exactly: the bias term never contributes to activation gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from .errors import IndexOutOfRange
from .selection import Selection, load_selection
from .zoo import cam_stage, get_spec, head_linear, load_model

IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

DEFAULT_SAMPLES = 25
DEFAULT_SIGMA_FRACTION = 0.1  # of the normalized input's value range

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


@dataclass(frozen=True)
class SaliencyJob:
    model: str
    image_paths: list[Path]
    target_class: int
    selection_path: Path
    out_dir: Path
    stage_filter: str = "all"  # "all" or "terminals"
    samples: int = DEFAULT_SAMPLES
    sigma_fraction: float = DEFAULT_SIGMA_FRACTION
    seed: int = 0
    extra_stages: list = field(default_factory=list)


def load_image(path, input_size: int) -> torch.Tensor:
    """Decode, resize/crop, and normalize one image to a (1, 3, H, W) tensor."""
    img = Image.open(path).convert("RGB")
    img = img.resize((input_size, input_size), Image.BILINEAR)
    arr = np.asarray(img, dtype=np.float32) / 255.0
    tensor = torch.from_numpy(arr).permute(2, 0, 1)
    mean = torch.tensor(IMAGENET_MEAN).view(3, 1, 1)
    std = torch.tensor(IMAGENET_STD).view(3, 1, 1)
    return ((tensor - mean) / std).unsqueeze(0)


def neuron_mask(indices, num_features: int) -> torch.Tensor:
    mask = torch.zeros(num_features)
    for i in indices:
        if not 0 <= i < num_features:
            raise IndexOutOfRange(
                f"selection index {i} outside the head width {num_features}"
            )
        mask[i] = 1.0
    return mask


def smooth_grad_campp(
    model,
    stage,
    head_weight_row: torch.Tensor,
    image: torch.Tensor,
    samples: int = DEFAULT_SAMPLES,
    sigma_fraction: float = DEFAULT_SIGMA_FRACTION,
    seed: int = 0,
) -> np.ndarray:
    """CAM over the stage activation, upsampled to the input size, in [0, 1].

    ``head_weight_row`` is the (possibly masked) weight row of the target
    class; the logit is its dot product with the globally average-pooled
    stage activation.
    """
    captured: dict = {}

    def hook(_module, _inputs, output):
        captured["act"] = output

    handle = stage.register_forward_hook(hook)
    try:
        with torch.no_grad():
            model(image)
            act_clean = captured["act"].detach()

        sigma = sigma_fraction * float(image.max() - image.min())
        generator = torch.Generator().manual_seed(seed)
        d1 = torch.zeros_like(act_clean)
        d2 = torch.zeros_like(act_clean)
        d3 = torch.zeros_like(act_clean)
        for _ in range(samples):
            noise = torch.randn(image.shape, generator=generator) * sigma
            noisy = (image + noise).requires_grad_(True)
            model(noisy)
            act = captured["act"]
            pooled = F.adaptive_avg_pool2d(act, 1).flatten(1)
            logit = (pooled * head_weight_row).sum()
            (grad,) = torch.autograd.grad(logit, act)
            d1 += grad
            d2 += grad * grad
            d3 += grad * grad * grad
    finally:
        handle.remove()

    d1 /= samples
    d2 /= samples
    d3 /= samples
    denom = 2.0 * d2 + (act_clean * d3).sum(dim=(2, 3), keepdim=True)
    alpha = d2 / torch.where(denom.abs() < 1e-12, torch.full_like(denom, 1e-12), denom)
    channel_weights = (alpha * F.relu(d1)).sum(dim=(2, 3))
    cam = F.relu((channel_weights[:, :, None, None] * act_clean).sum(dim=1, keepdim=True))
    cam = F.interpolate(cam, size=image.shape[-2:], mode="bilinear", align_corners=False)
    cam = cam[0, 0].numpy()
    peak = cam.max()
    if peak > 0:
        cam = cam / peak
    return cam


def overlay_image(image_path, cam: np.ndarray, input_size: int) -> Image.Image:
    """Blend a heat colorization of the map over the resized source image."""
    base = Image.open(image_path).convert("RGB").resize(
        (input_size, input_size), Image.BILINEAR
    )
    base_arr = np.asarray(base, dtype=np.float32) / 255.0
    heat = np.stack([cam, 0.25 * cam, 1.0 - cam], axis=-1)  # blue -> red ramp
    blended = np.clip(0.55 * base_arr + 0.45 * heat, 0.0, 1.0)
    return Image.fromarray((blended * 255).astype(np.uint8))


def job_stages(selection: Selection, stage_filter: str) -> list[tuple[str, list[int]]]:
    """Terminal maps always; every tree stage too unless filtered out."""
    stages = [
        ("terminal_pos", selection.positive_terminal),
        ("terminal_neg", selection.negative_terminal),
    ]
    if stage_filter == "all":
        stages.extend((st["label"], st["indices"]) for st in selection.stages)
    return stages


def render_saliency(job: SaliencyJob) -> list[Path]:
    """Write one overlay per (image, stage); returns the written paths."""
    model, _ = load_model(job.model, seed=job.seed)
    spec = get_spec(job.model)
    head = head_linear(model, job.model)
    stage_module = cam_stage(model, job.model)
    num_features = head.weight.shape[1]
    selection = load_selection(job.selection_path, job.target_class)
    if selection.max_index() >= num_features:
        raise IndexOutOfRange(
            f"selection indices reach {selection.max_index()}, head width is "
            f"{num_features}"
        )

    weight_row = head.weight[job.target_class].detach()
    job.out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for image_path in job.image_paths:
        image = load_image(image_path, spec.input_size)
        for stage_name, indices in job_stages(selection, job.stage_filter):
            masked_row = weight_row * neuron_mask(indices, num_features)
            cam = smooth_grad_campp(
                model,
                stage_module,
                masked_row,
                image,
                samples=job.samples,
                sigma_fraction=job.sigma_fraction,
                seed=job.seed,
            )
            out_path = job.out_dir / (
                f"{Path(image_path).stem}__class{job.target_class}__{stage_name}.png"
            )
            overlay_image(image_path, cam, spec.input_size).save(out_path)
            written.append(out_path)
    return written


def discover_images(images_dir) -> list[Path]:
    paths = sorted(
        p for p in Path(images_dir).iterdir()
        if p.suffix.lower() in IMAGE_SUFFIXES
    )
    return paths
