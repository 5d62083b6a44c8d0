import shutil
import subprocess

import numpy as np
import pytest
from PIL import Image

ALDFIT = shutil.which("aldfit")


def run_aldfit(args):
    """Invoke the analysis CLI exactly as a user would (file interface only)."""
    assert ALDFIT is not None, "aldfit CLI must be installed for interop tests"
    return subprocess.run(
        [ALDFIT, *[str(a) for a in args]],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def resnet18_head(tmp_path_factory):
    from ald_extractor.export import export_head

    path = tmp_path_factory.mktemp("export") / "resnet18_head.aldw"
    manifest = export_head("resnet18", path)
    return path, manifest


@pytest.fixture(scope="session")
def image_dir(tmp_path_factory):
    rng = np.random.default_rng(7)
    folder = tmp_path_factory.mktemp("images")
    for name in ("left", "right"):
        arr = (rng.random((96, 96, 3)) * 255).astype(np.uint8)
        Image.fromarray(arr).save(folder / f"{name}.png")
    return folder


@pytest.fixture(scope="session")
def labeled_image_dir(tmp_path_factory):
    rng = np.random.default_rng(11)
    folder = tmp_path_factory.mktemp("labeled")
    for cls in ("341", "735"):  # hog, poncho
        sub = folder / cls
        sub.mkdir()
        for i in range(2):
            arr = (rng.random((64, 64, 3)) * 255).astype(np.uint8)
            Image.fromarray(arr).save(sub / f"{i}.png")
    return folder
