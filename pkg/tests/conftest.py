from pathlib import Path

import numpy as np
import pytest

from aldfit.tensor_io import WeightMatrix, write_matrix

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_matrix(values, name="test", labels=None) -> WeightMatrix:
    return WeightMatrix(
        name=name,
        values=np.asarray(values, dtype=np.float32),
        class_labels=labels,
    )


def matrix_file(tmp_path, values, name="test", labels=None, filename="m.aldw") -> Path:
    path = tmp_path / filename
    write_matrix(make_matrix(values, name=name, labels=labels), path)
    return path
