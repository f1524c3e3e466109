"""
Shared pieces for dropout sites.
"""
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from advdrop.core.exceptions import ArgumentError
from advdrop.services.autodiff import Parameter, Tensor


class Mode(str, Enum):
    TRAIN = "train"
    EVAL = "eval"


def parse_mode(mode) -> Mode:
    try:
        return Mode(mode)
    except ValueError:
        raise ArgumentError(f"Invalid mode: {mode!r}", details={"allowed": [m.value for m in Mode]})


class DropoutSite:
    """Interface every dropout site implements."""

    stochastic = False

    def __init__(self, in_dim: int, site: int):
        self.in_dim = in_dim
        self.site = site
        self.mode = Mode.TRAIN

    def train(self) -> None:
        self.mode = Mode.TRAIN

    def eval(self) -> None:
        self.mode = Mode.EVAL

    def set_mode(self, mode) -> None:
        self.mode = parse_mode(mode)

    def parameters(self) -> List[Parameter]:
        return []

    def forward(self, pre: Tensor, rng: np.random.Generator, features: Optional[Tensor] = None,
                noise: Optional[np.ndarray] = None) -> Tensor:
        raise NotImplementedError

    def dropout_rate(self) -> Tuple[np.ndarray, float]:
        raise NotImplementedError

    def telemetry(self) -> dict:
        per_node, rate = self.dropout_rate()
        return {"site": self.site, "kind": self.kind, "rate": rate}
