"""
Seeded splits and subsets.
"""
import numpy as np

from advdrop.core.exceptions import ArgumentError, SplitError
from advdrop.services.data.dataset import Dataset, Normalization, NormalizationKind
from advdrop.utils.ids import Stream, make_rng


def split(ds: Dataset, fraction: float = 0.8, seed: int = 0):
    """
    Permute and cut into train and test.

    z-scored datasets are re-normalized with statistics of the training
    side only; the test side reuses them.

    Raises:
        ArgumentError: if fraction is outside (0, 1)
        SplitError: if either side would be empty
    """
    if not 0 < fraction < 1:
        raise ArgumentError(f"Split fraction must lie in (0, 1), got {fraction}")
    n = len(ds)
    n_train = int(round(fraction * n))
    if n_train == 0 or n_train == n:
        raise SplitError(f"Splitting {n} samples at {fraction} leaves an empty side",
                         details={"n": n, "fraction": fraction})
    order = make_rng(seed, Stream.SPLIT).permutation(n)
    train_idx, test_idx = np.sort(order[:n_train]), np.sort(order[n_train:])

    train, test = ds.take(train_idx, "train"), ds.take(test_idx, "test")
    if ds.normalization.kind is NormalizationKind.ZSCORE:
        raw = ds.raw_features()
        norm = Normalization.zscore(raw[train_idx])
        train = Dataset(norm.apply(raw[train_idx]), train.targets, ds.task, "train", norm, ds.name, ds.digests)
        test = Dataset(norm.apply(raw[test_idx]), test.targets, ds.task, "test", norm, ds.name, ds.digests)
    return train, test


def subset(ds: Dataset, n: int, seed: int = 0) -> Dataset:
    """Random n-sample subset, order preserved."""
    if n >= len(ds):
        return ds
    if n < 1:
        raise ArgumentError(f"Subset size must be positive, got {n}")
    chosen = np.sort(make_rng(seed, Stream.SPLIT).choice(len(ds), size=n, replace=False))
    return ds.take(chosen)
