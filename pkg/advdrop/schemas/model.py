"""
Pydantic schemas describing network architecture and dropout policies.
"""
from enum import Enum
from typing import List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator


class DropoutKind(str, Enum):
    """Dropout technique applied at a maskable site."""
    ADVANCED = "advanced"
    BERNOULLI = "bernoulli"
    GAUSSIAN = "gaussian"
    NONE = "none"


class PriorMode(str, Enum):
    """How the advanced-dropout seed parameters are produced."""
    ENCODER = "encoder"  # conditioned on features through the prior encoders
    FREE = "free"        # per-node parameters learned directly, no conditioning
    FIXED = "fixed"      # held at their initial values


class PriorInput(str, Enum):
    """Which tensor the prior encoder reads."""
    LINEAR_OUTPUT = "linear_output"
    LAYER_INPUT = "layer_input"


class EvalStatistics(str, Enum):
    """Source of mu and sigma in eval mode."""
    BATCH = "batch"
    RUNNING = "running"


class Task(str, Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"


class DropoutPolicy(BaseModel):
    """Dropout settings for one maskable site."""
    kind: DropoutKind = Field(DropoutKind.ADVANCED, description="Dropout technique")
    p: float = Field(0.5, description="Bernoulli keep probability")
    variance: float = Field(1.0, description="Variance of the Gaussian multiplicative noise")
    init_mu: float = Field(0.0, description="Initial seed mean (advanced)")
    init_sigma: float = Field(3.0, description="Initial seed standard deviation (advanced)")
    prior_mode: PriorMode = Field(PriorMode.ENCODER, description="Prior ablation mode")
    prior_input: PriorInput = Field(PriorInput.LINEAR_OUTPUT, description="Encoder input")
    eval_statistics: EvalStatistics = Field(EvalStatistics.BATCH, description="Eval-mode mu/sigma source")
    per_node: bool = Field(True, description="Per-node mu/sigma vectors instead of layer scalars")
    share_noise: bool = Field(False, description="Share eps across the batch for each node")
    hidden_dim: Optional[int] = Field(None, description="Encoder width; defaults to min(64, K)")

    @field_validator("p")
    def validate_p(cls, v):
        if not 0 < v < 1:
            raise ValueError("Bernoulli keep probability must lie in (0, 1)")
        return v

    @field_validator("variance", "init_sigma")
    def validate_positive(cls, v):
        if v <= 0:
            raise ValueError("must be positive")
        return v

    @field_validator("hidden_dim")
    def validate_hidden_dim(cls, v):
        if v is not None and v < 1:
            raise ValueError("Encoder width must be at least 1")
        return v


class FcSpec(BaseModel):
    """Fully connected architecture with a dropout policy per maskable site."""
    layer_dims: List[int] = Field(..., description="Input, hidden and output widths")
    activation: str = Field("relu", description="Hidden activation")
    dropout: Union[DropoutPolicy, List[DropoutPolicy]] = Field(
        default_factory=DropoutPolicy, description="One policy for all sites or one per site"
    )
    mask_input: bool = Field(False, description="Also mask the input features")
    task: Task = Field(Task.CLASSIFICATION, description="Classification logits or regression output")

    @field_validator("layer_dims")
    def validate_dims(cls, v):
        if len(v) < 3:
            raise ValueError("Need input, at least one hidden layer and output widths")
        if any(d < 1 for d in v):
            raise ValueError("Layer widths must be positive")
        return v

    @field_validator("activation")
    def validate_activation(cls, v):
        if v != "relu":
            raise ValueError("Only relu is supported")
        return v

    @model_validator(mode="after")
    def validate_policies(self):
        if isinstance(self.dropout, list) and len(self.dropout) != self.site_count:
            raise ValueError(f"Expected {self.site_count} dropout policies, got {len(self.dropout)}")
        return self

    @property
    def site_count(self) -> int:
        """Masked sites: optional input site plus one per hidden layer. Logits are never masked."""
        return len(self.layer_dims) - 2 + int(self.mask_input)

    @property
    def site_widths(self) -> List[int]:
        hidden = self.layer_dims[1:-1]
        return ([self.layer_dims[0]] if self.mask_input else []) + hidden

    def site_policies(self) -> List[DropoutPolicy]:
        if isinstance(self.dropout, list):
            return list(self.dropout)
        return [self.dropout] * self.site_count
