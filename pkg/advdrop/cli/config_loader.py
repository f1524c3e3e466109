"""
Experiment configuration loading.

Precedence: model defaults < YAML config file < command-line flags.
"""
import copy
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml
from pydantic import ValidationError

from advdrop.core.exceptions import ConfigError
from advdrop.schemas.experiment import ExperimentConfig
from advdrop.services.data.registry import get_dataset_info

logger = logging.getLogger("advdrop.config")

# Flag name -> location in the config tree
FLAG_PATHS: Dict[str, Tuple[str, ...]] = {
    "dataset": ("dataset", "name"),
    "data_path": ("dataset", "path"),
    "train_size": ("dataset", "train_size"),
    "test_size": ("dataset", "test_size"),
    "hidden": ("model", "hidden"),
    "mask_input": ("model", "mask_input"),
    "epochs": ("training", "epochs"),
    "lr": ("training", "lr"),
    "lr_schedule": ("training", "lr_schedule"),
    "batch_size": ("training", "batch_size"),
    "grad_clip": ("training", "grad_clip"),
    "seeds": ("seeds",),
    "outdir": ("output", "outdir"),
    "workers": ("output", "workers"),
    "passes": ("uncertainty", "passes"),
    "save_samples": ("uncertainty", "save_samples"),
    "granularity": ("pruning", "granularity"),
    "q": ("pruning", "q"),
    "rounds": ("pruning", "rounds"),
    "methods": ("pruning", "methods"),
}

# Flags applied to every dropout policy
POLICY_FLAGS: Dict[str, str] = {
    "dropout": "kind",
    "init_mu": "init_mu",
    "init_sigma": "init_sigma",
    "prior_mode": "prior_mode",
}


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}", details={"path": str(path)})
    try:
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {path} is not valid YAML: {e}", details={"path": str(path)})
    if not isinstance(raw, dict):
        raise ConfigError(f"Config file {path} must hold a mapping of sections", details={"path": str(path)})
    return raw


def _set(tree: Dict[str, Any], path: Tuple[str, ...], value: Any) -> None:
    node = tree
    for key in path[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            child = node[key] = {}
        node = child
    node[path[-1]] = value


def apply_overrides(raw: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Return a copy of raw with every non-None flag written into place."""
    tree = copy.deepcopy(raw)
    for name, value in overrides.items():
        if value is None or value == ():
            continue
        if name in POLICY_FLAGS:
            model = tree.setdefault("model", {})
            dropout = model.get("dropout")
            policies = dropout if isinstance(dropout, list) else [dropout if isinstance(dropout, dict) else {}]
            for policy in policies:
                policy[POLICY_FLAGS[name]] = value
            model["dropout"] = policies if isinstance(dropout, list) else policies[0]
        elif name in FLAG_PATHS:
            _set(tree, FLAG_PATHS[name], list(value) if isinstance(value, tuple) else value)
        else:
            raise ConfigError(f"Unknown override: {name}")
    return tree


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Dict[str, Any]] = None,
) -> ExperimentConfig:
    """
    Build an ExperimentConfig from an optional YAML file and flag overrides.

    The training loss follows the dataset's task.

    Raises:
        ConfigError: on a missing or malformed file, an invalid value or an unknown dataset
    """
    raw = read_config_file(path) if path else {}
    tree = apply_overrides(raw, overrides or {})
    try:
        cfg = ExperimentConfig.model_validate(tree)
    except ValidationError as e:
        raise ConfigError("Invalid configuration", details={"errors": e.errors(include_url=False, include_input=False)})
    cfg = cfg.with_loss_for(get_dataset_info(cfg.dataset.name).task)
    logger.debug(f"Resolved config {cfg.config_hash}")
    return cfg
