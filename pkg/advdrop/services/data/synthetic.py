"""
Toy datasets with known optimal behaviour, used by tests and smoke runs.
"""
from enum import Enum

import numpy as np

from advdrop.core.exceptions import ArgumentError
from advdrop.schemas.model import Task
from advdrop.services.data.dataset import Dataset


class SyntheticKind(str, Enum):
    TWO_GAUSSIANS = "two_gaussians"
    LINEAR_REGRESSION = "linear_regression"
    XOR = "xor"


def synthetic(kind: SyntheticKind, n: int, seed: int = 0) -> Dataset:
    """
    Generate a reproducible toy set.

    two_gaussians: unit-covariance blobs at -(2,2) and +(2,2), balanced labels.
    linear_regression: 3 features, noiseless affine target.
    xor: four tight clusters at (±1, ±1) labelled by sign disagreement.
    """
    if n < 4:
        raise ArgumentError(f"Synthetic sets need at least 4 samples, got {n}")
    kind = SyntheticKind(kind)
    rng = np.random.default_rng(seed)

    if kind is SyntheticKind.TWO_GAUSSIANS:
        labels = np.arange(n) % 2
        centers = np.where(labels[:, None] == 1, 2.0, -2.0) * np.ones((n, 2))
        features = centers + rng.standard_normal((n, 2))
        order = rng.permutation(n)
        return Dataset(features[order], labels[order].astype(np.int64), Task.CLASSIFICATION, name=kind.value)

    if kind is SyntheticKind.LINEAR_REGRESSION:
        features = rng.standard_normal((n, 3))
        weights, bias = rng.standard_normal(3), rng.standard_normal()
        return Dataset(features, features @ weights + bias, Task.REGRESSION, name=kind.value)

    corners = np.array([[-1.0, -1.0], [-1.0, 1.0], [1.0, -1.0], [1.0, 1.0]])
    cluster = rng.permutation(np.arange(n) % 4)
    features = corners[cluster] + 0.2 * rng.standard_normal((n, 2))
    labels = (np.sign(corners[cluster, 0]) != np.sign(corners[cluster, 1])).astype(np.int64)
    return Dataset(features, labels, Task.CLASSIFICATION, name=kind.value)
