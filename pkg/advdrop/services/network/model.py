"""
Fully connected networks with a dropout site after each hidden linear layer.

Per layer the order is linear -> dropout site -> relu, so the mask acts on
the pre-activation output. Biases are never masked and the output layer
has no site.
"""
import logging
import math
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional, Sequence

import numpy as np

from advdrop.core.exceptions import ArgumentError, DimensionError
from advdrop.schemas.model import FcSpec, PriorInput
from advdrop.services.autodiff import Parameter, Tensor, as_tensor, expand_rows, no_grad, relu
from advdrop.services.dropout import AdvancedDropoutLayer, DropoutSite, Mode, build_site, parse_mode

logger = logging.getLogger("advdrop.network")


class Linear:
    """Affine map x W^T + b with He-normal weights."""

    def __init__(self, fan_in: int, fan_out: int, rng: np.random.Generator, index: int):
        scale = math.sqrt(2.0 / fan_in)
        self.weight = Parameter(rng.normal(0.0, scale, (fan_out, fan_in)), name=f"theta.{index}.weight")
        self.bias = Parameter(np.zeros(fan_out), name=f"theta.{index}.bias")

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight.T + expand_rows(self.bias, x.shape[0])

    def parameters(self) -> List[Parameter]:
        return [self.weight, self.bias]


class Model:
    """Linear layers plus dropout sites; owns the weight and prior parameter registry."""

    def __init__(self, spec: FcSpec, linears: List[Linear], sites: List[DropoutSite]):
        self.spec = spec
        self.linears = linears
        self.sites = sites
        self.mode = Mode.TRAIN

    # Sites
    @property
    def input_site(self) -> Optional[DropoutSite]:
        return self.sites[0] if self.spec.mask_input else None

    @property
    def hidden_sites(self) -> List[DropoutSite]:
        return self.sites[1:] if self.spec.mask_input else list(self.sites)

    @property
    def advanced_sites(self) -> List[AdvancedDropoutLayer]:
        return [s for s in self.sites if isinstance(s, AdvancedDropoutLayer)]

    @property
    def is_stochastic(self) -> bool:
        return any(s.stochastic for s in self.sites)

    # Modes
    def set_mode(self, mode) -> None:
        self.mode = parse_mode(mode)
        for site in self.sites:
            site.set_mode(self.mode)

    def train(self) -> None:
        self.set_mode(Mode.TRAIN)

    def eval(self) -> None:
        self.set_mode(Mode.EVAL)

    @contextmanager
    def frozen_statistics(self) -> Iterator[None]:
        """Forward passes inside the block leave site prior statistics untouched."""
        sites = self.advanced_sites
        previous = [s.record_statistics for s in sites]
        for site in sites:
            site.record_statistics = False
        try:
            yield
        finally:
            for site, flag in zip(sites, previous):
                site.record_statistics = flag

    # Parameters
    def theta_parameters(self) -> List[Parameter]:
        return [p for linear in self.linears for p in linear.parameters()]

    def lambda_parameters(self) -> List[Parameter]:
        return [p for site in self.sites for p in site.parameters()]

    def parameters(self) -> List[Parameter]:
        return self.theta_parameters() + self.lambda_parameters()

    def named_parameters(self) -> Dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}

    def parameter_count(self, group: str = "all") -> int:
        params = {"theta": self.theta_parameters, "lambda": self.lambda_parameters,
                  "all": self.parameters}[group]()
        return int(sum(p.size for p in params))

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.numpy() for name, p in self.named_parameters().items()}

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        missing = sorted(set(params) - set(state))
        if missing:
            raise DimensionError("State is missing parameters", details={"missing": missing})
        for name, p in params.items():
            p.assign(state[name])

    # Forward
    def forward(
        self,
        x,
        mode=None,
        rng: Optional[np.random.Generator] = None,
        noise: Optional[Sequence[Optional[np.ndarray]]] = None,
    ) -> Tensor:
        """
        Run the network.

        Args:
            x: N×D inputs
            mode: train or eval; the current mode when omitted
            rng: Generator for mask sampling in train mode
            noise: Optional frozen noise per site, in site order

        Returns:
            Tensor: N×C logits or N×1 regression outputs
        """
        if mode is not None:
            self.set_mode(mode)
        x = as_tensor(x)
        if x.ndim != 2 or x.shape[1] != self.spec.layer_dims[0]:
            raise DimensionError(
                f"Model expects inputs of width {self.spec.layer_dims[0]}, got shape {x.shape}"
            )
        if self.mode is Mode.TRAIN and rng is None and noise is None and self.is_stochastic:
            raise ArgumentError("Train-mode forward needs a generator or frozen noise")

        frozen: Iterator[Optional[np.ndarray]] = iter(noise if noise is not None else [None] * len(self.sites))
        if self.input_site is not None:
            x = self.input_site.forward(x, rng, features=x, noise=next(frozen))

        hidden = self.hidden_sites
        last = len(self.linears) - 1
        for index, linear in enumerate(self.linears):
            pre = linear(x)
            if index == last:
                return pre
            x = relu(hidden[index].forward(pre, rng, features=x, noise=next(frozen)))

    __call__ = forward

    # Telemetry
    def site_telemetry(self) -> List[dict]:
        """Rate rows for every site that has telemetry."""
        rows = []
        for site in self.sites:
            if isinstance(site, AdvancedDropoutLayer) and site.last_mu is None:
                continue
            rows.append(site.telemetry())
        return rows

    def refresh_telemetry(self, x) -> None:
        """Evaluate every prior on x without touching the mode or the graph."""
        previous = self.mode
        with no_grad():
            self.forward(x, mode=Mode.EVAL)
        self.set_mode(previous)


def build(spec: FcSpec, rng: np.random.Generator) -> Model:
    """Initialize a network from its spec; deterministic given the generator state."""
    dims = spec.layer_dims
    linears = [Linear(dims[i], dims[i + 1], rng, i) for i in range(len(dims) - 1)]

    sites: List[DropoutSite] = []
    policies = spec.site_policies()
    widths = spec.site_widths
    # Encoder input width when a site conditions on its layer input.
    feature_dims = ([dims[0]] if spec.mask_input else []) + dims[:-2]
    for index, (policy, width, feature_dim) in enumerate(zip(policies, widths, feature_dims)):
        sites.append(build_site(
            policy, width, rng, site=index,
            feature_dim=feature_dim if policy.prior_input is PriorInput.LAYER_INPUT else None,
        ))

    model = Model(spec, linears, sites)
    logger.debug(
        f"Built {'-'.join(map(str, dims))} network: {model.parameter_count('theta')} theta, "
        f"{model.parameter_count('lambda')} lambda parameters"
    )
    return model


def forward(model: Model, x, mode, rng: Optional[np.random.Generator] = None) -> Tensor:
    return model.forward(x, mode=mode, rng=rng)
