"""
Library settings and configuration management.
"""
from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library settings."""
    # Base
    PROJECT_NAME: str = "advdrop"
    PROJECT_DESCRIPTION: str = "Advanced dropout: model-free mask distributions with a parametric prior"
    VERSION: str = "0.1.0"

    # Paths
    ADVDROP_DATA_DIR: Optional[str] = None
    OUTPUT_DIR: str = "runs"

    # Numerics
    DEFAULT_DTYPE: str = "float64"
    SIGMA_FLOOR: float = 1e-4
    LOGIT_CLAMP: float = 1e-12

    @field_validator("DEFAULT_DTYPE", mode="before")
    def normalize_dtype(cls, v: str) -> str:
        """Accept numpy-style aliases for the two supported float widths."""
        aliases = {"float64": "float64", "f8": "float64", "double": "float64",
                   "float32": "float32", "f4": "float32", "single": "float32"}
        key = str(v).strip().lower()
        if key not in aliases:
            raise ValueError(f"Unsupported dtype: {v}")
        return aliases[key]

    # Dropout prior
    ENCODER_MAX_HIDDEN: int = 64
    ENCODER_INIT_STD: float = 0.01
    RUNNING_STATS_MOMENTUM: float = 0.9

    # Quadrature
    KL_GRID_POINTS: int = 4096
    KL_TRUNCATION: float = 1e-12

    # Uncertainty
    MC_PASSES_DEFAULT: int = 50

    # Artifacts
    CHECKPOINT_FORMAT_VERSION: int = 1
    CONFIG_HASH_LENGTH: int = 12

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    @field_validator("LOG_LEVEL", mode="before")
    def normalize_log_level(cls, v: str) -> str:
        """Upper-case the level name so `.env` files may use any case."""
        return str(v).upper()

    model_config = SettingsConfigDict(case_sensitive=True, env_file=".env", extra="ignore")


# Create singleton settings instance
settings = Settings()
