"""
Positive-support families used to approximate an inverse-gamma prior.
"""
import math
import warnings
from enum import Enum
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, optimize, stats

from advdrop.core.exceptions import DomainError, QuadratureError, UndefinedMomentsError

ArrayOrFloat = Union[float, np.ndarray]


class Family(str, Enum):
    SOFTPLUS_GAUSSIAN = "softplus_gaussian"
    LOG_NORMAL = "log_normal"


def softplus_inverse(y: ArrayOrFloat) -> ArrayOrFloat:
    """ln(e^y - 1), stable for small and large y."""
    y = np.asarray(y, dtype=np.float64)
    value = y + np.log(-np.expm1(-y))
    return float(value) if value.ndim == 0 else value


def _positive(y: ArrayOrFloat) -> np.ndarray:
    arr = np.asarray(y, dtype=np.float64)
    if np.any(arr <= 0):
        raise DomainError("Density is defined for positive values only",
                          details={"min": float(np.min(arr))})
    return arr


def _scalar_or_array(value: np.ndarray, like) -> ArrayOrFloat:
    return float(value) if np.ndim(like) == 0 else value


class SoftplusGaussian(BaseModel):
    """Law of softplus(X) for X ~ N(m, s^2)."""
    m: float
    s: float = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)

    def logpdf(self, y: ArrayOrFloat) -> ArrayOrFloat:
        arr = _positive(y)
        x = softplus_inverse(arr)
        # log of dx/dy = e^y / (e^y - 1)
        log_jacobian = -np.log(-np.expm1(-arr))
        return _scalar_or_array(stats.norm.logpdf(x, loc=self.m, scale=self.s) + log_jacobian, y)

    def pdf(self, y: ArrayOrFloat) -> ArrayOrFloat:
        return _scalar_or_array(np.exp(self.logpdf(y)), y)

    def _expect(self, fn) -> float:
        lo, hi = self.m - 12.0 * self.s, self.m + 12.0 * self.s
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                value, _ = integrate.quad(
                    lambda x: fn(np.logaddexp(0.0, x)) * stats.norm.pdf(x, self.m, self.s),
                    lo, hi, points=[self.m], epsabs=0.0, epsrel=1e-10, limit=200,
                )
            except integrate.IntegrationWarning as e:
                raise QuadratureError(f"Softplus-Gaussian moment quadrature failed: {e}",
                                      details={"m": self.m, "s": self.s})
        return value

    def mean(self) -> float:
        return self._expect(lambda y: y)

    def variance(self) -> float:
        mean = self.mean()
        return self._expect(lambda y: (y - mean) ** 2)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.logaddexp(0.0, self.m + self.s * rng.standard_normal(n))


class LogNormal(BaseModel):
    """Law of exp(X) for X ~ N(m, s^2)."""
    m: float
    s: float = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)

    def _frozen(self):
        return stats.lognorm(s=self.s, scale=math.exp(self.m))

    def logpdf(self, y: ArrayOrFloat) -> ArrayOrFloat:
        return _scalar_or_array(self._frozen().logpdf(_positive(y)), y)

    def pdf(self, y: ArrayOrFloat) -> ArrayOrFloat:
        return _scalar_or_array(self._frozen().pdf(_positive(y)), y)

    def mean(self) -> float:
        return math.exp(self.m + self.s ** 2 / 2.0)

    def variance(self) -> float:
        return math.expm1(self.s ** 2) * math.exp(2.0 * self.m + self.s ** 2)

    def mode(self) -> float:
        return math.exp(self.m - self.s ** 2)


class InverseGamma(BaseModel):
    """Shape k, scale theta: density proportional to x^(-k-1) exp(-theta/x)."""
    k: float = Field(..., gt=0)
    theta: float = Field(..., gt=0)

    model_config = ConfigDict(frozen=True)

    def _frozen(self):
        return stats.invgamma(a=self.k, scale=self.theta)

    def logpdf(self, x: ArrayOrFloat) -> ArrayOrFloat:
        return _scalar_or_array(self._frozen().logpdf(_positive(x)), x)

    def pdf(self, x: ArrayOrFloat) -> ArrayOrFloat:
        return _scalar_or_array(self._frozen().pdf(_positive(x)), x)

    def mean(self) -> float:
        if self.k <= 1:
            raise UndefinedMomentsError("Inverse-gamma mean needs k > 1",
                                        details={"k": self.k, "theta": self.theta})
        return self.theta / (self.k - 1.0)

    def variance(self) -> float:
        if self.k <= 2:
            raise UndefinedMomentsError("Inverse-gamma variance needs k > 2",
                                        details={"k": self.k, "theta": self.theta})
        return self.theta ** 2 / ((self.k - 1.0) ** 2 * (self.k - 2.0))

    def mode(self) -> float:
        return self.theta / (self.k + 1.0)

    def has_moments(self) -> bool:
        return self.k > 2


def pdf_softplus_gaussian(d: SoftplusGaussian, y: ArrayOrFloat) -> ArrayOrFloat:
    """Density of softplus(X), X ~ N(d.m, d.s^2), by change of variables."""
    return d.pdf(y)


def softplus_gaussian_moments(d: SoftplusGaussian) -> Tuple[float, float]:
    return d.mean(), d.variance()


def softplus_gaussian_mode(d: SoftplusGaussian) -> float:
    """Numerical mode, found on a log-spaced scan then refined."""
    upper = float(np.logaddexp(0.0, d.m + 8.0 * d.s))
    grid = np.geomspace(upper * 1e-12, upper, 4001)
    i = int(np.argmax(d.logpdf(grid)))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    result = optimize.minimize_scalar(lambda y: -d.logpdf(y), bounds=(lo, hi), method="bounded",
                                      options={"xatol": 1e-14})
    return float(result.x)


__all__ = [
    "Family", "InverseGamma", "LogNormal", "SoftplusGaussian", "pdf_softplus_gaussian",
    "softplus_gaussian_mode", "softplus_gaussian_moments", "softplus_inverse",
]
