"""
SGD with classical momentum, coupled weight decay and step schedules.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from advdrop.core.exceptions import ContractError
from advdrop.schemas.training import LRSchedule, TrainConfig
from advdrop.services.autodiff import Parameter

logger = logging.getLogger("advdrop.training")


@dataclass
class SGDState:
    """Velocity buffers aligned with the parameter list."""
    velocity: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def zeros(cls, params: Sequence[Parameter]) -> "SGDState":
        return cls([np.zeros_like(p.data) for p in params])


def lr_at(cfg: TrainConfig, epoch: int) -> float:
    """Learning rate for a 0-based epoch; decays once per milestone reached."""
    if cfg.lr_schedule is LRSchedule.CONSTANT:
        return cfg.lr
    passed = sum(1 for milestone in cfg.milestones if epoch >= milestone)
    return cfg.lr * cfg.lr_factor ** passed


def clip_grad_norm(grads: Sequence[np.ndarray], max_norm: float) -> Tuple[List[np.ndarray], float]:
    """Scale all gradients together so their global L2 norm is at most max_norm."""
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))
    if norm <= max_norm or norm == 0.0:
        return list(grads), norm
    scale = max_norm / norm
    return [g * scale for g in grads], norm


def sgd_step(
    params: Sequence[Parameter],
    grads: Sequence[Optional[np.ndarray]],
    state: SGDState,
    cfg: TrainConfig,
    lr: Optional[float] = None,
) -> None:
    """
    One update: v <- momentum*v + (g + wd*w); w <- w - lr*v.

    Entries outside a parameter's keep_mask get zero gradient and zero
    velocity and stay exactly zero.
    """
    if len(params) != len(grads) or len(params) != len(state.velocity):
        raise ContractError("Parameters, gradients and optimizer state are misaligned")
    lr = cfg.lr if lr is None else lr
    for index, (p, g) in enumerate(zip(params, grads)):
        g = np.zeros_like(p.data) if g is None else g
        v = cfg.momentum * state.velocity[index] + (g + cfg.weight_decay * p.data)
        if p.keep_mask is not None:
            v = v * p.keep_mask
        state.velocity[index] = v
        p.assign(p.data - lr * v)


class SGD:
    """Stateful wrapper around sgd_step for one parameter list."""

    def __init__(self, params: Sequence[Parameter], cfg: TrainConfig):
        self.params = list(params)
        self.cfg = cfg
        self.state = SGDState.zeros(self.params)

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self, lr: float) -> float:
        """Apply one update and return the pre-clip gradient norm (0 when clipping is off)."""
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        norm = 0.0
        if self.cfg.grad_clip is not None:
            grads, norm = clip_grad_norm(grads, self.cfg.grad_clip)
            if norm > self.cfg.grad_clip:
                logger.debug(f"Clipped gradient norm {norm:.3f} to {self.cfg.grad_clip}")
        sgd_step(self.params, grads, self.state, self.cfg, lr)
        return norm
