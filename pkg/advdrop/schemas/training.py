"""
Pydantic schemas for training runs.
"""
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, Field, field_validator


class LRSchedule(str, Enum):
    CONSTANT = "constant"
    STEP = "step"


class LossKind(str, Enum):
    CROSS_ENTROPY = "cross_entropy"
    MSE = "mse"


class TrainConfig(BaseModel):
    """Optimizer and loop settings."""
    epochs: int = Field(200, description="Training epochs")
    batch_size: int = Field(100, description="Mini-batch size")
    lr: float = Field(0.01, description="Initial learning rate")
    lr_schedule: LRSchedule = Field(LRSchedule.CONSTANT, description="Learning-rate schedule")
    milestones: List[int] = Field(default_factory=lambda: [150, 225], description="Step-schedule epochs")
    lr_factor: float = Field(0.1, description="Step-schedule decay factor")
    momentum: float = Field(0.9, description="Classical momentum")
    weight_decay: float = Field(5e-4, description="Coupled L2 weight decay on all parameters")
    grad_clip: Optional[float] = Field(None, description="Global gradient-norm clip")
    seed: int = Field(0, description="Run seed")
    loss: LossKind = Field(LossKind.CROSS_ENTROPY, description="Objective")
    eval_batch_size: int = Field(1000, description="Batch size for evaluation passes")

    @field_validator("lr")
    def validate_lr(cls, v):
        if v <= 0:
            raise ValueError("Learning rate must be positive")
        return v

    @field_validator("momentum")
    def validate_momentum(cls, v):
        if not 0 <= v < 1:
            raise ValueError("Momentum must lie in [0, 1)")
        return v

    @field_validator("weight_decay")
    def validate_weight_decay(cls, v):
        if v < 0:
            raise ValueError("Weight decay must be non-negative")
        return v

    @field_validator("epochs", "batch_size", "eval_batch_size")
    def validate_counts(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @field_validator("grad_clip")
    def validate_clip(cls, v):
        if v is not None and v <= 0:
            raise ValueError("Gradient clip must be positive")
        return v

    @field_validator("milestones")
    def validate_milestones(cls, v):
        if sorted(v) != list(v):
            raise ValueError("Milestones must be increasing")
        return v


class SiteTelemetry(BaseModel):
    """Dropout telemetry for one site after an epoch."""
    site: int
    kind: str
    rate: float = Field(..., description="Mean dropout rate over nodes")
    mu_mean: Optional[float] = None
    sigma_mean: Optional[float] = None


class EpochRow(BaseModel):
    """One completed epoch."""
    epoch: int
    lr: float
    train_loss: float
    train_metric: float = Field(..., description="Accuracy or RMSE on the training passes")
    test_loss: float
    test_metric: float = Field(..., description="Accuracy or RMSE in eval mode")
    gap: float = Field(..., description="Generalization gap, positive when train beats test")
    sites: List[SiteTelemetry] = Field(default_factory=list)
    seconds: Optional[float] = Field(None, description="Wall clock; excluded from artifacts")


class RunRecord(BaseModel):
    """Everything one training run produced."""
    config_hash: str
    seed: int
    metric: str = Field(..., description="accuracy or rmse")
    rows: List[EpochRow] = Field(default_factory=list)
    final: Dict[str, float] = Field(default_factory=dict)
    distribution_drift: Dict[str, List[float]] = Field(
        default_factory=dict, description="Per site: KL from each epoch's mask distribution to the last"
    )

    def artifact_rows(self) -> List[dict]:
        """Rows as written to metrics.jsonl."""
        return [
            {"config_hash": self.config_hash, "seed": self.seed, **row.model_dump(exclude={"seconds"})}
            for row in self.rows
        ]
