"""
Fitting positive-support families to an inverse-gamma target.
"""
import logging
import math

import numpy as np
from scipy import optimize

from advdrop.core.exceptions import QuadratureError, UndefinedMomentsError
from advdrop.services.distributions.families import (
    Family,
    InverseGamma,
    LogNormal,
    SoftplusGaussian,
    softplus_inverse,
)

logger = logging.getLogger("advdrop.distributions")


def _log_normal_from_moments(mean: float, var: float) -> LogNormal:
    s2 = math.log1p(var / mean ** 2)
    return LogNormal(m=math.log(mean) - 0.5 * s2, s=math.sqrt(s2))


def moment_match(target: InverseGamma, family: Family):
    """
    Fit a family so its mean and variance equal the target's.

    Args:
        target: Inverse-gamma distribution with k > 2
        family: Family to fit

    Returns:
        SoftplusGaussian | LogNormal: fitted distribution

    Raises:
        UndefinedMomentsError: if the target's variance does not exist
        QuadratureError: if the root search does not converge
    """
    if not target.has_moments():
        raise UndefinedMomentsError(
            f"Inverse gamma with k={target.k} has no finite variance; moment matching needs k > 2",
            details={"k": target.k, "theta": target.theta},
        )
    mean, var = target.mean(), target.variance()
    log_normal = _log_normal_from_moments(mean, var)
    if Family(family) is Family.LOG_NORMAL:
        return log_normal

    def residual(params):
        candidate = SoftplusGaussian(m=params[0], s=math.exp(params[1]))
        return [candidate.mean() / mean - 1.0, candidate.variance() / var - 1.0]

    # Softplus is close to exp on the far left and to the identity on the right.
    if mean < 1.0:
        start = [log_normal.m, math.log(log_normal.s)]
    else:
        start = [float(softplus_inverse(mean)), 0.5 * math.log(var)]
    solution = optimize.root(residual, start, method="hybr", options={"xtol": 1e-12})
    worst = float(np.max(np.abs(residual(solution.x))))
    if not solution.success or worst > 1e-6:
        raise QuadratureError(
            f"Softplus-Gaussian moment matching did not converge: {solution.message}",
            details={"k": target.k, "theta": target.theta, "residual": worst},
        )
    fitted = SoftplusGaussian(m=float(solution.x[0]), s=math.exp(float(solution.x[1])))
    logger.debug(f"Moment-matched {fitted} to {target}")
    return fitted


def mode_match(target: InverseGamma, family: Family):
    """
    Fit a family so its mode and its density at the mode equal the target's.

    Used when the target's moments do not exist.
    """
    y0 = target.mode()
    height = float(target.pdf(y0))

    if Family(family) is Family.LOG_NORMAL:
        # pdf at the mode is exp(-s^2/2) / (y0 s sqrt(2 pi)), decreasing in s
        def gap(s):
            return -0.5 * s * s - math.log(s) - math.log(y0 * math.sqrt(2.0 * math.pi) * height)

        s = optimize.brentq(gap, 1e-8, 50.0, xtol=1e-14)
        return LogNormal(m=math.log(y0) + s * s, s=s)

    # Stationarity of the softplus-Gaussian density at y0 gives m = x0 + s^2 e^(-y0);
    # its height there is exp(-(s e^(-y0))^2 / 2) / (s sqrt(2 pi)) * e^y0 / (e^y0 - 1).
    x0 = float(softplus_inverse(y0))
    decay = math.exp(-y0)
    log_jacobian = -math.log(-math.expm1(-y0))

    def gap(s):
        return (-0.5 * (s * decay) ** 2 - math.log(s) - 0.5 * math.log(2.0 * math.pi)
                + log_jacobian - math.log(height))

    s = optimize.brentq(gap, 1e-8, 1e4, xtol=1e-14)
    return SoftplusGaussian(m=x0 + s * s * decay, s=s)


def fit(target: InverseGamma, family: Family):
    """Moment match when possible, otherwise fall back to mode matching."""
    try:
        return moment_match(target, family), "moment"
    except UndefinedMomentsError:
        logger.info(f"Moments undefined for k={target.k}, theta={target.theta}; matching the mode")
        return mode_match(target, family), "mode"
