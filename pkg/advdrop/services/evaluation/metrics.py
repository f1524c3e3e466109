"""
Point metrics for classification and regression outputs.
"""
from typing import Optional

import numpy as np

from advdrop.core.exceptions import DimensionError, LabelRangeError


def accuracy(predictions: np.ndarray, labels: np.ndarray) -> float:
    predictions, labels = np.asarray(predictions), np.asarray(labels)
    if predictions.shape != labels.shape:
        raise DimensionError(f"Predictions {predictions.shape} and labels {labels.shape} disagree")
    return float(np.mean(predictions == labels)) if len(labels) else 0.0


def top_k_accuracy(scores: np.ndarray, labels: np.ndarray, k: int = 1) -> float:
    """Fraction of rows whose label is among the k highest scores."""
    scores, labels = np.asarray(scores), np.asarray(labels)
    if scores.ndim != 2 or len(scores) != len(labels):
        raise DimensionError(f"Scores {scores.shape} and labels {labels.shape} disagree")
    k = min(k, scores.shape[1])
    top = np.argpartition(-scores, k - 1, axis=1)[:, :k]
    return float(np.mean(np.any(top == labels[:, None], axis=1)))


def rmse(predictions: np.ndarray, targets: np.ndarray) -> float:
    predictions = np.asarray(predictions, dtype=np.float64).reshape(-1)
    targets = np.asarray(targets, dtype=np.float64).reshape(-1)
    if predictions.shape != targets.shape:
        raise DimensionError(f"Predictions {predictions.shape} and targets {targets.shape} disagree")
    return float(np.sqrt(np.mean((predictions - targets) ** 2)))


def confusion_matrix(labels: np.ndarray, predictions: np.ndarray, n_classes: Optional[int] = None) -> np.ndarray:
    """C×C counts, rows indexed by true class."""
    labels = np.asarray(labels, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    if n_classes is None:
        n_classes = int(max(labels.max(initial=-1), predictions.max(initial=-1))) + 1
    if np.any(labels < 0) or np.any(labels >= n_classes) or np.any(predictions < 0) \
            or np.any(predictions >= n_classes):
        raise LabelRangeError(f"Class indices must lie in [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (labels, predictions), 1)
    return counts


def normalize_rows(counts: np.ndarray) -> np.ndarray:
    """Row-normalized confusion matrix; empty rows stay zero."""
    counts = np.asarray(counts, dtype=np.float64)
    totals = counts.sum(axis=1, keepdims=True)
    return np.divide(counts, totals, out=np.zeros_like(counts), where=totals > 0)
