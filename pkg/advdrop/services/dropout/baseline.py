"""
Baseline dropouts: none, Bernoulli and Gaussian multiplicative noise.

Bernoulli masks are not rescaled during training; eval multiplies by the
keep probability instead. Gaussian noise has unit mean, so eval is the
identity.
"""
import math
from typing import Optional, Tuple

import numpy as np

from advdrop.core.exceptions import DimensionError
from advdrop.schemas.model import DropoutKind, DropoutPolicy
from advdrop.services.autodiff import Tensor, mul
from advdrop.services.dropout.base import DropoutSite, Mode


class BaselineDropout(DropoutSite):
    """Fixed-rate dropout site."""

    def __init__(self, in_dim: int, policy: DropoutPolicy, site: int = 0):
        super().__init__(in_dim, site)
        if policy.kind is DropoutKind.ADVANCED:
            raise ValueError("Advanced dropout needs AdvancedDropoutLayer")
        self.kind = policy.kind.value
        self.p = policy.p
        self.variance = policy.variance
        self.stochastic = policy.kind is not DropoutKind.NONE

    def forward(self, pre: Tensor, rng: np.random.Generator, features: Optional[Tensor] = None,
                noise: Optional[np.ndarray] = None) -> Tensor:
        if pre.ndim != 2 or pre.shape[1] != self.in_dim:
            raise DimensionError(f"Site {self.site} expects width {self.in_dim}, got shape {pre.shape}")
        if self.kind == DropoutKind.NONE.value:
            return pre

        if self.mode is Mode.EVAL:
            return pre * self.p if self.kind == DropoutKind.BERNOULLI.value else pre

        if noise is None:
            if self.kind == DropoutKind.BERNOULLI.value:
                noise = (rng.random(pre.shape) < self.p)
            else:
                noise = 1.0 + math.sqrt(self.variance) * rng.standard_normal(pre.shape)
        return mul(pre, Tensor(noise, dtype=pre.dtype))

    def dropout_rate(self) -> Tuple[np.ndarray, float]:
        rate = 1.0 - self.p if self.kind == DropoutKind.BERNOULLI.value else 0.0
        return np.full(self.in_dim, rate), rate


def baseline_forward(d: BaselineDropout, pre: Tensor, rng: np.random.Generator) -> Tensor:
    return d.forward(pre, rng)
