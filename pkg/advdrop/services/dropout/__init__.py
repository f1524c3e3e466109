from typing import Optional

import numpy as np

from advdrop.schemas.model import DropoutKind, DropoutPolicy
from advdrop.services.dropout.advanced import AdvancedDropoutLayer, dropout_rate, prior_params
from advdrop.services.dropout.base import DropoutSite, Mode, parse_mode
from advdrop.services.dropout.baseline import BaselineDropout, baseline_forward


def build_site(
    policy: DropoutPolicy,
    width: int,
    rng: np.random.Generator,
    site: int,
    feature_dim: Optional[int] = None,
) -> DropoutSite:
    """Construct the dropout site a policy asks for."""
    if policy.kind is DropoutKind.ADVANCED:
        return AdvancedDropoutLayer(width, policy, rng=rng, site=site, feature_dim=feature_dim)
    return BaselineDropout(width, policy, site=site)


__all__ = [
    "AdvancedDropoutLayer", "BaselineDropout", "DropoutSite", "Mode", "baseline_forward",
    "build_site", "dropout_rate", "parse_mode", "prior_params",
]
