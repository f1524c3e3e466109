"""
Central finite-difference checks for Tensor graphs.
"""
from typing import Callable, Dict, Sequence

import numpy as np

from advdrop.services.autodiff.tensor import Parameter, Tensor, no_grad


def numerical_gradient(loss_fn: Callable[[], Tensor], param: Parameter, h: float = 1e-5) -> np.ndarray:
    """
    Estimate d(loss)/d(param) by central differences.

    Args:
        loss_fn: Rebuilds the scalar loss from the current parameter values
        param: Parameter to perturb in place, restored afterwards
        h: Step size

    Returns:
        np.ndarray: Gradient estimate with the parameter's shape
    """
    original = param.numpy()
    grad = np.zeros_like(original)
    with no_grad():
        for index in np.ndindex(original.shape):
            shifted = original.copy()
            shifted[index] += h
            param.assign(shifted)
            upper = loss_fn().item()
            shifted[index] -= 2 * h
            param.assign(shifted)
            lower = loss_fn().item()
            grad[index] = (upper - lower) / (2 * h)
    param.assign(original)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max-norm error scaled by the larger of the two gradients."""
    scale = max(np.max(np.abs(analytic), initial=0.0), np.max(np.abs(numeric), initial=0.0), 1e-12)
    return float(np.max(np.abs(analytic - numeric), initial=0.0) / scale)


def check_gradients(
    loss_fn: Callable[[], Tensor],
    params: Sequence[Parameter],
    h: float = 1e-5,
) -> Dict[str, float]:
    """
    Compare backward() against finite differences for each parameter.

    Gradients on params are zeroed first. loss_fn must be deterministic,
    so any noise it uses has to be frozen by the caller.

    Returns:
        Dict: parameter name (or position) to relative error
    """
    for p in params:
        p.zero_grad()
    loss_fn().backward()
    analytic = [p.grad.copy() for p in params]
    errors = {}
    for i, (p, a) in enumerate(zip(params, analytic)):
        errors[p.name or str(i)] = relative_error(a, numerical_gradient(loss_fn, p, h))
    return errors
