"""
Advanced dropout layer.

Masks m = sigmoid(mu + sigma * eps) multiply a layer's linear output.
mu and sigma come from a small prior encoder that reads the layer's
features and is trained jointly with the network through the
reparameterized sample.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from advdrop.core.config import settings
from advdrop.core.exceptions import (
    ContractError,
    DimensionError,
    EmptyBatchError,
    TelemetryStateError,
)
from advdrop.schemas.model import DropoutPolicy, EvalStatistics, PriorInput, PriorMode
from advdrop.services.autodiff import (
    Parameter,
    Tensor,
    expand_rows,
    maximum,
    reduce_mean,
    sigmoid,
    softplus,
)
from advdrop.services.distributions.families import softplus_inverse
from advdrop.services.distributions.model_free import ModelFreeDist, mean_mask
from advdrop.services.dropout.base import DropoutSite, Mode

logger = logging.getLogger("advdrop.dropout")


def _rows(t: Tensor, n: int) -> Tensor:
    return t if t.ndim == 0 else expand_rows(t, n)


class AdvancedDropoutLayer(DropoutSite):
    """
    Dropout site with a learned, feature-conditioned mask distribution.

    Args:
        in_dim: Number of nodes masked (K)
        policy: Dropout policy; prior_mode selects encoder, free or fixed parameters
        rng: Generator for encoder initialization
        site: Site index used in parameter names and telemetry
        feature_dim: Encoder input width when the encoder reads the layer input
    """

    kind = "advanced"
    stochastic = True

    def __init__(
        self,
        in_dim: int,
        policy: Optional[DropoutPolicy] = None,
        rng: Optional[np.random.Generator] = None,
        site: int = 0,
        feature_dim: Optional[int] = None,
    ):
        super().__init__(in_dim, site)
        self.policy = policy or DropoutPolicy()
        rng = rng or np.random.default_rng(0)
        self.prior_mode = self.policy.prior_mode
        self.prior_input = self.policy.prior_input
        self.per_node = self.policy.per_node
        self.feature_dim = feature_dim if self.prior_input is PriorInput.LAYER_INPUT and feature_dim else in_dim
        self.hidden_dim = self.policy.hidden_dim or min(settings.ENCODER_MAX_HIDDEN, in_dim)

        width = in_dim if self.per_node else 1
        sigma_bias = float(softplus_inverse(self.policy.init_sigma))
        prefix = f"lambda.{site}"
        std = settings.ENCODER_INIT_STD

        self.W_h = self.b_h = self.W_mu = self.b_mu = self.W_sigma = self.b_sigma = None
        self.mu_free = self.rho_free = None
        if self.prior_mode is PriorMode.ENCODER:
            h, k = self.hidden_dim, in_dim
            self.W_h = Parameter(rng.normal(0.0, std, (h, self.feature_dim)), name=f"{prefix}.W_h")
            self.b_h = Parameter(np.zeros(h), name=f"{prefix}.b_h")
            self.W_mu = Parameter(rng.normal(0.0, std, (k, h)), name=f"{prefix}.W_mu")
            self.b_mu = Parameter(np.full(k, self.policy.init_mu), name=f"{prefix}.b_mu")
            self.W_sigma = Parameter(rng.normal(0.0, std, (k, h)), name=f"{prefix}.W_sigma")
            self.b_sigma = Parameter(np.full(k, sigma_bias), name=f"{prefix}.b_sigma")
        elif self.prior_mode is PriorMode.FREE:
            self.mu_free = Parameter(np.full(width, self.policy.init_mu), name=f"{prefix}.mu")
            self.rho_free = Parameter(np.full(width, sigma_bias), name=f"{prefix}.rho")
        else:
            self._fixed_mu = Tensor(np.full(width, self.policy.init_mu))
            self._fixed_sigma = Tensor(np.full(width, max(self.policy.init_sigma, settings.SIGMA_FLOOR)))

        self.last_mu: Optional[np.ndarray] = None
        self.last_sigma: Optional[np.ndarray] = None
        self.running_mu: Optional[np.ndarray] = None
        self.running_sigma: Optional[np.ndarray] = None
        self.record_statistics = True

    def parameters(self) -> List[Parameter]:
        candidates = [self.W_h, self.b_h, self.W_mu, self.b_mu, self.W_sigma, self.b_sigma,
                      self.mu_free, self.rho_free]
        return [p for p in candidates if p is not None]

    # Prior
    def prior_params(self, x: Tensor) -> Tuple[Tensor, Tensor]:
        """Seed mean and standard deviation for the current batch."""
        if x.ndim != 2 or x.shape[0] == 0:
            raise EmptyBatchError(f"Site {self.site} prior needs a non-empty batch, got shape {x.shape}")
        n = x.shape[0]

        if self.prior_mode is PriorMode.ENCODER:
            if x.shape[1] != self.feature_dim:
                raise DimensionError(
                    f"Site {self.site} encoder expects width {self.feature_dim}, got {x.shape[1]}"
                )
            h = x @ self.W_h.T + expand_rows(self.b_h, n)
            mu = reduce_mean(h @ self.W_mu.T + expand_rows(self.b_mu, n), axis=0)
            sigma = reduce_mean(softplus(h @ self.W_sigma.T + expand_rows(self.b_sigma, n)), axis=0)
            if not self.per_node:
                mu, sigma = reduce_mean(mu), reduce_mean(sigma)
        elif self.prior_mode is PriorMode.FREE:
            mu, sigma = self.mu_free, softplus(self.rho_free)
            if not self.per_node:
                mu, sigma = reduce_mean(mu), reduce_mean(sigma)
        else:
            mu, sigma = self._fixed_mu, self._fixed_sigma
            if not self.per_node:
                mu, sigma = Tensor(mu.data[0]), Tensor(sigma.data[0])

        sigma = maximum(sigma, settings.SIGMA_FLOOR)
        self._record(mu.data, sigma.data)
        return mu, sigma

    def _record(self, mu: np.ndarray, sigma: np.ndarray) -> None:
        if not self.record_statistics:
            return
        self.last_mu = np.broadcast_to(mu, (self.in_dim,)).astype(np.float64)
        self.last_sigma = np.broadcast_to(sigma, (self.in_dim,)).astype(np.float64)
        if self.mode is Mode.TRAIN and self.policy.eval_statistics is EvalStatistics.RUNNING:
            beta = settings.RUNNING_STATS_MOMENTUM
            if self.running_mu is None:
                self.running_mu, self.running_sigma = self.last_mu.copy(), self.last_sigma.copy()
            else:
                self.running_mu = beta * self.running_mu + (1.0 - beta) * self.last_mu
                self.running_sigma = beta * self.running_sigma + (1.0 - beta) * self.last_sigma

    # Forward
    def forward(self, pre: Tensor, rng: np.random.Generator, features: Optional[Tensor] = None,
                noise: Optional[np.ndarray] = None) -> Tensor:
        """
        Mask the pre-activation linear output.

        Train mode samples eps per (sample, node), or per node when
        share_noise is set; `noise` overrides the draw with a frozen eps.
        Eval mode scales by the expected mask and draws nothing.
        """
        if pre.ndim != 2 or pre.shape[1] != self.in_dim:
            raise DimensionError(f"Site {self.site} expects width {self.in_dim}, got shape {pre.shape}")
        n = pre.shape[0]

        if self.prior_input is PriorInput.LAYER_INPUT:
            if features is None:
                raise ContractError(f"Site {self.site} conditions on the layer input but none was given")
            source = features
        else:
            source = pre

        if self.mode is Mode.EVAL:
            if self.policy.eval_statistics is EvalStatistics.RUNNING and self.running_mu is not None:
                mu_values, sigma_values = self.running_mu, self.running_sigma
            else:
                mu, sigma = self.prior_params(source)
                mu_values = np.broadcast_to(mu.data, (self.in_dim,))
                sigma_values = np.broadcast_to(sigma.data, (self.in_dim,))
            scale = np.broadcast_to(mean_mask(mu_values, sigma_values), (n, self.in_dim))
            return pre * Tensor(scale, dtype=pre.dtype)

        mu, sigma = self.prior_params(source)
        if noise is None:
            if self.policy.share_noise:
                noise = np.broadcast_to(rng.standard_normal(self.in_dim), (n, self.in_dim))
            else:
                noise = rng.standard_normal((n, self.in_dim))
        eps = Tensor(noise, dtype=pre.dtype)
        if eps.shape != pre.shape:
            raise DimensionError(f"Frozen noise shape {eps.shape} does not match {pre.shape}")
        mask = sigmoid(_rows(mu, n) + _rows(sigma, n) * eps)
        return mask * pre

    # Telemetry
    def dropout_rate(self) -> Tuple[np.ndarray, float]:
        """Per-node rate 1 - E[m] and its mean over nodes."""
        if self.last_mu is None:
            raise TelemetryStateError(f"Site {self.site} has not evaluated its prior yet")
        per_node = 1.0 - np.asarray(mean_mask(self.last_mu, self.last_sigma))
        return per_node, float(per_node.mean())

    def mask_distribution(self) -> ModelFreeDist:
        """Layer-level mask distribution from the mean seed parameters."""
        if self.last_mu is None:
            raise TelemetryStateError(f"Site {self.site} has not evaluated its prior yet")
        return ModelFreeDist(mu=float(self.last_mu.mean()), sigma=float(self.last_sigma.mean()))

    def telemetry(self) -> dict:
        row = super().telemetry()
        row.update(mu_mean=float(self.last_mu.mean()), sigma_mean=float(self.last_sigma.mean()))
        return row


def dropout_rate(layer: AdvancedDropoutLayer) -> Tuple[np.ndarray, float]:
    return layer.dropout_rate()


def prior_params(layer: AdvancedDropoutLayer, x: Tensor) -> Tuple[Tensor, Tensor]:
    return layer.prior_params(x)
