"""
Pydantic schemas for experiment configuration files.
"""
from enum import Enum
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator

from advdrop.core.config import settings
from advdrop.schemas.model import DropoutPolicy, FcSpec, Task
from advdrop.schemas.training import LossKind, TrainConfig
from advdrop.utils.ids import config_hash


class Granularity(str, Enum):
    NODE = "node"
    PARAMETER = "parameter"


class PruneMethod(str, Enum):
    RATE = "rate"
    RANDOM = "random"


class DatasetConfig(BaseModel):
    """Which data to load and how much of it."""
    name: str = Field("mnist", description="Registered dataset name")
    path: Optional[str] = Field(None, description="Directory or file overriding the data dir")
    train_size: Optional[int] = Field(None, description="Random training subset size")
    test_size: Optional[int] = Field(None, description="Random test subset size")
    split_fraction: float = Field(0.8, description="Train fraction for datasets without an official split")


class ModelConfig(BaseModel):
    """Network settings; unset fields fall back to the dataset's defaults."""
    layer_dims: Optional[List[int]] = Field(None, description="Full widths including input and output")
    hidden: Optional[List[int]] = Field(None, description="Hidden widths only")
    dropout: Union[DropoutPolicy, List[DropoutPolicy]] = Field(default_factory=DropoutPolicy)
    mask_input: Optional[bool] = Field(None, description="Mask input features")

    def to_spec(self, input_dim: int, output_dim: int, task: Task,
                default_hidden: List[int], default_mask_input: bool) -> FcSpec:
        dims = self.layer_dims or [input_dim, *(self.hidden or default_hidden), output_dim]
        return FcSpec(
            layer_dims=dims,
            dropout=self.dropout,
            mask_input=default_mask_input if self.mask_input is None else self.mask_input,
            task=task,
        )


class UncertaintyConfig(BaseModel):
    passes: int = Field(default_factory=lambda: settings.MC_PASSES_DEFAULT, description="Monte Carlo forward passes (T)")
    save_samples: bool = Field(False, description="Write per-sample means and variances")

    @field_validator("passes")
    def validate_passes(cls, v):
        if v < 1:
            raise ValueError("Need at least one pass")
        return v


class PruningConfig(BaseModel):
    q: float = Field(10.0, description="Percent of kept entries pruned per round")
    rounds: int = Field(6, description="Prune-reset-retrain rounds")
    granularity: Granularity = Field(Granularity.NODE)
    methods: List[PruneMethod] = Field(default_factory=lambda: [PruneMethod.RATE],
                                      description="Selection methods; add random for the baseline curve")

    @field_validator("q")
    def validate_q(cls, v):
        if not 0 < v < 100:
            raise ValueError("q must lie in (0, 100)")
        return v


class OutputConfig(BaseModel):
    outdir: str = Field(default_factory=lambda: settings.OUTPUT_DIR, description="Root output directory")
    workers: int = Field(1, description="Parallel seed workers")


class ExperimentConfig(BaseModel):
    """Complete, serializable description of an experiment."""
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    training: TrainConfig = Field(default_factory=TrainConfig)
    uncertainty: UncertaintyConfig = Field(default_factory=UncertaintyConfig)
    pruning: PruningConfig = Field(default_factory=PruningConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    seeds: List[int] = Field(default_factory=lambda: [0])

    @field_validator("seeds")
    def validate_seeds(cls, v):
        if not v:
            raise ValueError("At least one seed is required")
        return v

    def hash_payload(self) -> Dict[str, Any]:
        """Fields that determine a trained model. Evaluation settings, seeds and file locations are excluded."""
        payload = self.model_dump(mode="json", include={"dataset", "model", "training"})
        payload["training"].pop("seed", None)
        payload["dataset"].pop("path", None)
        return payload

    @property
    def config_hash(self) -> str:
        return config_hash(self.hash_payload())

    def train_config(self, seed: int) -> TrainConfig:
        return self.training.model_copy(update={"seed": seed})

    def with_loss_for(self, task: Task) -> "ExperimentConfig":
        loss = LossKind.MSE if task is Task.REGRESSION else LossKind.CROSS_ENTROPY
        return self.model_copy(update={"training": self.training.model_copy(update={"loss": loss})})
