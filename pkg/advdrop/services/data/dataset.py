"""
In-memory datasets and their normalization records.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Optional

import numpy as np

from advdrop.schemas.model import Task


class NormalizationKind(str, Enum):
    NONE = "none"
    ZSCORE = "zscore"
    SCALE = "scale"


@dataclass(frozen=True)
class Normalization:
    """Invertible per-feature transform applied at ingestion."""
    kind: NormalizationKind = NormalizationKind.NONE
    mean: Optional[np.ndarray] = None
    std: Optional[np.ndarray] = None
    scale: float = 1.0

    @classmethod
    def zscore(cls, raw: np.ndarray) -> "Normalization":
        """Population statistics; constant columns keep unit scale."""
        std = raw.std(axis=0)
        return cls(NormalizationKind.ZSCORE, mean=raw.mean(axis=0), std=np.where(std > 0, std, 1.0))

    def apply(self, raw: np.ndarray) -> np.ndarray:
        if self.kind is NormalizationKind.ZSCORE:
            return (raw - self.mean) / self.std
        if self.kind is NormalizationKind.SCALE:
            return raw / self.scale
        return raw.copy()

    def invert(self, features: np.ndarray) -> np.ndarray:
        if self.kind is NormalizationKind.ZSCORE:
            return features * self.std + self.mean
        if self.kind is NormalizationKind.SCALE:
            return features * self.scale
        return features.copy()


@dataclass(frozen=True)
class Dataset:
    """Features, targets and the record needed to undo normalization."""
    features: np.ndarray
    targets: np.ndarray
    task: Task = Task.CLASSIFICATION
    split: str = "all"
    normalization: Normalization = field(default_factory=Normalization)
    name: str = ""
    digests: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.features.ndim != 2 or len(self.features) != len(self.targets):
            raise ValueError(
                f"features {self.features.shape} and targets {self.targets.shape} do not align"
            )

    def __len__(self) -> int:
        return len(self.features)

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> Optional[int]:
        if self.task is not Task.CLASSIFICATION:
            return None
        return int(self.targets.max()) + 1 if len(self.targets) else 0

    def raw_features(self) -> np.ndarray:
        return self.normalization.invert(self.features)

    def take(self, indices: np.ndarray, split: Optional[str] = None) -> "Dataset":
        return replace(self, features=self.features[indices], targets=self.targets[indices],
                       split=split or self.split)
