"""
Mini-batch objective.

The batch-mean negative log-likelihood is used as is: the N/N_b scale is
absorbed by the learning rate and the regularizer on all weights comes from
the optimizer's coupled weight decay, so no explicit KL term is added here.
"""
from typing import Optional, Sequence, Tuple

import numpy as np

from advdrop.core.exceptions import EmptyBatchError
from advdrop.schemas.training import LossKind
from advdrop.services.autodiff import Tensor, mse, softmax_cross_entropy
from advdrop.services.dropout import Mode


def batch_objective(
    model,
    x: np.ndarray,
    y: np.ndarray,
    loss: LossKind = LossKind.CROSS_ENTROPY,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[Sequence[Optional[np.ndarray]]] = None,
) -> Tuple[Tensor, Tensor]:
    """Train-mode forward with reparameterized masks; returns (loss, outputs)."""
    if len(x) == 0:
        raise EmptyBatchError()
    outputs = model.forward(x, mode=Mode.TRAIN, rng=rng, noise=noise)
    if loss is LossKind.CROSS_ENTROPY:
        return softmax_cross_entropy(outputs, y), outputs
    return mse(outputs, y), outputs


def sgvb_loss(
    model,
    x: np.ndarray,
    y: np.ndarray,
    loss: LossKind = LossKind.CROSS_ENTROPY,
    rng: Optional[np.random.Generator] = None,
    noise: Optional[Sequence[Optional[np.ndarray]]] = None,
) -> Tensor:
    """
    Scalar training loss for one mini batch.

    Args:
        model: Network to run in train mode
        x: Batch inputs
        y: Class indices or regression targets
        loss: cross_entropy or mse
        rng: Generator for the mask noise
        noise: Frozen per-site noise, overrides rng

    Returns:
        Tensor: 0-d loss on the graph of the forward pass
    """
    return batch_objective(model, x, y, loss, rng, noise)[0]
