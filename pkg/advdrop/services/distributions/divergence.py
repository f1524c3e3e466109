"""
Numerical KL divergence on an explicit grid.
"""
import logging
from typing import Callable, Union

import numpy as np
from scipy import integrate

from advdrop.core.config import settings
from advdrop.core.exceptions import DivergenceError

logger = logging.getLogger("advdrop.distributions")

Density = Union[Callable[[np.ndarray], np.ndarray], object]


def _log_density(density: Density, grid: np.ndarray) -> np.ndarray:
    if hasattr(density, "logpdf"):
        return np.asarray(density.logpdf(grid), dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.log(np.asarray(density(grid), dtype=np.float64))


def kl_divergence(p: Density, q: Density, grid: np.ndarray) -> float:
    """
    Trapezoidal KL(p || q) over a sorted grid.

    Densities may be plain callables or distribution objects; objects
    with a logpdf method are evaluated in log space so far tails do not
    underflow.

    Raises:
        DivergenceError: where q vanishes but p does not
    """
    grid = np.asarray(grid, dtype=np.float64)
    log_p = _log_density(p, grid)
    log_q = _log_density(q, grid)
    p_values = np.exp(log_p)
    support = p_values > 0
    if np.any(support & np.isneginf(log_q)):
        first = float(grid[np.argmax(support & np.isneginf(log_q))])
        raise DivergenceError("q vanishes where p has mass", details={"at": first})
    integrand = np.where(support, p_values * (log_p - np.where(support, log_q, 0.0)), 0.0)
    value = float(integrate.trapezoid(integrand, grid))
    if value < -1e-9:
        logger.warning(f"KL quadrature returned {value:.3e}; clipping to zero")
    return max(value, 0.0)


def truncated_support(
    density: Density,
    lower: float,
    upper: float,
    points: int = None,
    truncation: float = None,
    geometric: bool = True,
    scan_points: int = 20001,
) -> np.ndarray:
    """
    Grid covering where density >= truncation * max(density).

    A dense scan over [lower, upper] locates the bounds; the returned grid
    then spans them with `points` nodes, geometrically spaced for positive
    supports.
    """
    points = points or settings.KL_GRID_POINTS
    truncation = truncation if truncation is not None else settings.KL_TRUNCATION
    scan = np.geomspace(lower, upper, scan_points) if geometric else np.linspace(lower, upper, scan_points)
    log_values = _log_density(density, scan)
    keep = np.nonzero(log_values >= np.max(log_values) + np.log(truncation))[0]
    lo, hi = scan[max(keep[0] - 1, 0)], scan[min(keep[-1] + 1, scan_points - 1)]
    return np.geomspace(lo, hi, points) if geometric else np.linspace(lo, hi, points)
