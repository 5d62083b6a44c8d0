#!/usr/bin/env python3
"""Regenerate tests/fixtures/digits_head.csv.

Trains a small multinomial logistic-regression classifier on the
scikit-learn digits dataset (10 classes x 64 pixel features) and commits
its final-layer weight matrix as the CSV fixture, one labeled row per
class. Deterministic: fixed solver seed, fixed scaling.
"""

from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits
from sklearn.linear_model import LogisticRegression

from aldfit.tensor_io import WeightMatrix, write_matrix

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "digits_head.csv"


def main() -> None:
    digits = load_digits()
    x = digits.data / 16.0  # pixel range [0, 16] -> [0, 1]
    y = digits.target
    clf = LogisticRegression(max_iter=2000, random_state=0)
    clf.fit(x, y)
    weights = np.asarray(clf.coef_, dtype=np.float32)
    labels = [f"digit-{d}" for d in range(weights.shape[0])]
    matrix = WeightMatrix(name="digits_head", values=weights, class_labels=labels)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    write_matrix(matrix, OUT)
    print(f"wrote {OUT} ({weights.shape[0]}x{weights.shape[1]}, "
          f"train acc {clf.score(x, y):.3f})")


if __name__ == "__main__":
    main()
