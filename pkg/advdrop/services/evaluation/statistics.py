"""
Run-comparison statistics: Student's t-test and effectiveness ratios.
"""
from typing import Sequence, Tuple

import numpy as np
from scipy import special, stats

from advdrop.core.exceptions import ArgumentError, UndefinedMetricError


def t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """Two-sided pooled-variance t-test p-value."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ArgumentError("Each sample needs at least two values", details={"sizes": [len(a), len(b)]})
    if np.var(a) == 0.0 and np.var(b) == 0.0:
        return 1.0 if a.mean() == b.mean() else 0.0
    return float(stats.ttest_ind(a, b, equal_var=True).pvalue)


def t_statistic(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    return float(stats.ttest_ind(np.asarray(sample_a, dtype=np.float64),
                                 np.asarray(sample_b, dtype=np.float64), equal_var=True).statistic)


def effectiveness_ratios(acc: float, time: float, base_acc: float, base_time: float) -> Tuple[float, float]:
    """
    Accuracy improvement per unit of extra training time.

    Accuracies are percentages, times seconds per epoch.

    Raises:
        ArgumentError: if base_time is not positive
        UndefinedMetricError: if time equals base_time (s2 divides by zero);
            s1 is still defined and travels in details["s1"]
    """
    if base_time <= 0:
        raise ArgumentError(f"Baseline time must be positive, got {base_time}")
    relative_time = (time - base_time) / base_time
    s1 = float(special.expit(acc - base_acc) / special.expit(relative_time))
    if relative_time == 0.0:
        raise UndefinedMetricError("s2 is undefined when both runs take the same time", details={"s1": s1})
    s2 = ((acc - base_acc) / base_acc) / relative_time
    return s1, float(s2)


def normalize_ratios(values: Sequence[float]) -> np.ndarray:
    """Min-max map to [0, 1]; a constant set maps to zeros."""
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return values
    low, high = values.min(), values.max()
    if high == low:
        return np.zeros_like(values)
    return (values - low) / (high - low)


def mean_std(values: Sequence[float]) -> Tuple[float, float]:
    """Mean and sample standard deviation (0 for a single value)."""
    values = np.asarray(values, dtype=np.float64)
    std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    return float(values.mean()), std
