import numpy as np
import pytest

from advdrop.core.exceptions import DimensionError, LabelRangeError
from advdrop.services.evaluation import accuracy, confusion_matrix, normalize_rows, rmse, top_k_accuracy


def test_accuracy():
    assert accuracy(np.array([0, 1, 1, 0]), np.array([0, 1, 0, 0])) == 0.75
    with pytest.raises(DimensionError):
        accuracy(np.array([0, 1]), np.array([0]))


def test_top_k_accuracy():
    scores = np.array([[0.1, 0.5, 0.4], [0.7, 0.2, 0.1]])
    labels = np.array([2, 1])
    assert top_k_accuracy(scores, labels, k=1) == 0.0
    assert top_k_accuracy(scores, labels, k=2) == 1.0


def test_rmse():
    assert rmse(np.array([[1.0], [3.0]]), np.array([1.0, 1.0])) == pytest.approx(np.sqrt(2.0))


def test_confusion_matrix_rows_are_true_classes():
    counts = confusion_matrix(np.array([0, 0, 1, 2]), np.array([0, 1, 1, 1]), n_classes=3)
    np.testing.assert_array_equal(counts, [[1, 1, 0], [0, 1, 0], [0, 1, 0]])
    normalized = normalize_rows(counts)
    np.testing.assert_allclose(normalized[0], [0.5, 0.5, 0.0])
    assert normalized.sum(axis=1).tolist() == [1.0, 1.0, 1.0]


def test_empty_confusion_rows_stay_zero():
    normalized = normalize_rows(np.array([[2, 0], [0, 0]]))
    np.testing.assert_array_equal(normalized, [[1.0, 0.0], [0.0, 0.0]])


def test_confusion_rejects_out_of_range_labels():
    with pytest.raises(LabelRangeError):
        confusion_matrix(np.array([0, 3]), np.array([0, 1]), n_classes=2)
