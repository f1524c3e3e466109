"""
Model-free dropout-mask distribution.

A mask m is produced by pushing a Gaussian seed r ~ N(mu, sigma^2) through
a monotone mapping onto (0, 1). With the sigmoid mapping the law of m is
logit-normal, so its density, CDF and KL divergences all follow from the
seed Gaussian.
"""
import logging
import math
import warnings
from enum import Enum
from typing import Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy import integrate, special, stats

from advdrop.core.config import settings
from advdrop.core.exceptions import ArgumentError, DomainError, QuadratureError

logger = logging.getLogger("advdrop.distributions")

ArrayOrFloat = Union[float, np.ndarray]

# Largest float64 strictly below 1.
_ONE_MINUS = 1.0 - np.finfo(np.float64).epsneg


class MappingFunction(str, Enum):
    """Mapping from the real line onto (0, 1)."""
    SIGMOID = "sigmoid"


class ModelFreeDist(BaseModel):
    """Seed mean, seed standard deviation and mapping for one dropout site."""
    mu: float
    sigma: float
    mapping: MappingFunction = MappingFunction.SIGMOID

    model_config = ConfigDict(frozen=True)

    @field_validator("sigma", mode="before")
    def clamp_sigma(cls, v: float) -> float:
        v = float(v)
        if not v > 0:
            raise ValueError(f"sigma must be positive, got {v}")
        return max(v, settings.SIGMA_FLOOR)


def logit(m: ArrayOrFloat) -> ArrayOrFloat:
    """ln(m) - ln(1 - m) with m clamped away from the endpoints."""
    eps = settings.LOGIT_CLAMP
    m = np.clip(m, eps, 1.0 - eps)
    return np.log(m) - np.log1p(-m)


def _check_open_unit(m: np.ndarray) -> None:
    if np.any((m <= 0) | (m >= 1)):
        raise DomainError("Mask values must lie in the open interval (0, 1)",
                          details={"min": float(np.min(m)), "max": float(np.max(m))})


def sample_mask(d: ModelFreeDist, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n masks sigmoid(mu + sigma * eps)."""
    if n < 1:
        raise ArgumentError(f"Sample count must be at least 1, got {n}")
    eps = rng.standard_normal(n)
    m = special.expit(d.mu + d.sigma * eps)
    return np.clip(m, np.finfo(np.float64).tiny, _ONE_MINUS)


def pdf(d: ModelFreeDist, m: ArrayOrFloat) -> ArrayOrFloat:
    """Density of the mask at m in (0, 1)."""
    arr = np.asarray(m, dtype=np.float64)
    _check_open_unit(arr)
    density = stats.norm.pdf(logit(arr), loc=d.mu, scale=d.sigma) / (arr * (1.0 - arr))
    return float(density) if np.ndim(m) == 0 else density


def cdf(d: ModelFreeDist, m: ArrayOrFloat) -> ArrayOrFloat:
    arr = np.asarray(m, dtype=np.float64)
    _check_open_unit(arr)
    value = stats.norm.cdf(logit(arr), loc=d.mu, scale=d.sigma)
    return float(value) if np.ndim(m) == 0 else value


def mean_mask(mu: ArrayOrFloat, sigma: ArrayOrFloat) -> ArrayOrFloat:
    """
    Closed-form approximation of E[sigmoid(mu + sigma * eps)].

    Replaces the sigmoid by a scaled probit, which integrates against a
    Gaussian exactly: sigmoid(mu / sqrt(1 + pi * sigma^2 / 8)).
    """
    sigma_arr = np.asarray(sigma, dtype=np.float64)
    if np.any(sigma_arr <= 0):
        raise DomainError("sigma must be positive", details={"min": float(np.min(sigma_arr))})
    value = special.expit(np.asarray(mu, dtype=np.float64) / np.sqrt(1.0 + math.pi * sigma_arr ** 2 / 8.0))
    return float(value) if np.ndim(value) == 0 else value


def dropout_rate(mu: ArrayOrFloat, sigma: ArrayOrFloat) -> ArrayOrFloat:
    """One minus the expected mask."""
    return 1.0 - mean_mask(mu, sigma)


def normalization(d: ModelFreeDist, span: float = 12.0, pieces: int = 48) -> float:
    """
    Integrate the density over (0, 1) by adaptive quadrature.

    The interval is split at the images of mu + k*sigma so each piece
    holds a smooth section of the density. Seed mass beyond the float64
    resolution of the mapping (|logit| above ~27) cannot be represented,
    so for very large sigma the result equals the CDF mass between the
    clamp bounds rather than 1.
    """
    eps = settings.LOGIT_CLAMP
    knots = special.expit(d.mu + d.sigma * np.linspace(-span, span, pieces + 1))
    knots = np.unique(np.clip(knots, eps, 1.0 - eps))
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(knots[:-1], knots[1:]):
            try:
                value, _ = integrate.quad(lambda m: pdf(d, m), lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
            except integrate.IntegrationWarning as e:
                raise QuadratureError(f"Mask density quadrature failed on [{lo}, {hi}]: {e}",
                                      details={"mu": d.mu, "sigma": d.sigma})
            total += value
    return total


def _log_pdf_at_seed(d: ModelFreeDist, r: float) -> float:
    """Log density of the mask at m = sigmoid(r), without forming m."""
    log_m, log_one_minus = special.log_expit(r), special.log_expit(-r)
    return float(stats.norm.logpdf(r, loc=d.mu, scale=d.sigma) - log_m - log_one_minus)


def seed_normalization(d: ModelFreeDist, span: float = 12.0, pieces: int = 48) -> float:
    """
    Integrate the mask density over the seed variable r, with m = sigmoid(r).

    The integrand is pdf(sigmoid(r)) * dm/dr, both evaluated in log space,
    so it stays finite where m itself rounds to 0 or 1. This is the check
    that still works for very large sigma (150 and above), where the
    mask-space integral in `normalization` loses the tail mass.
    """
    knots = d.mu + d.sigma * np.linspace(-span, span, pieces + 1)

    def integrand(r: float) -> float:
        log_jacobian = special.log_expit(r) + special.log_expit(-r)
        return math.exp(_log_pdf_at_seed(d, r) + log_jacobian)

    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(knots[:-1], knots[1:]):
            try:
                value, _ = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)
            except integrate.IntegrationWarning as e:
                raise QuadratureError(f"Seed-space quadrature failed on [{lo}, {hi}]: {e}",
                                      details={"mu": d.mu, "sigma": d.sigma})
            total += value
    return total


def mask_kl(p: ModelFreeDist, q: ModelFreeDist) -> float:
    """
    KL(p || q) between two sigmoid-mapped masks.

    The mapping is a bijection, so the divergence equals the one between
    the Gaussian seeds.
    """
    return float(
        math.log(q.sigma / p.sigma)
        + (p.sigma ** 2 + (p.mu - q.mu) ** 2) / (2.0 * q.sigma ** 2)
        - 0.5
    )
