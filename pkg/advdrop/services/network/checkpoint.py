"""
Model checkpoints.

Layout: a zip archive readable by numpy.load. Each parameter is stored as
`<name>.npy`, frozen-entry masks as `mask::<name>.npy`, advanced-site
statistics as `site::<index>::<field>.npy`, and a JSON metadata document
as `__meta__.npy` (a 0-d unicode array) holding the format version, the
FcSpec, config hash, seed and rate telemetry. Entry timestamps are fixed,
so saving the same model twice yields identical bytes.
"""
import json
import logging
import zipfile
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from advdrop.core.config import settings
from advdrop.core.exceptions import CheckpointMismatchError, MissingDataError
from advdrop.schemas.model import FcSpec
from advdrop.services.dropout import AdvancedDropoutLayer
from advdrop.services.network.model import Model, build

logger = logging.getLogger("advdrop.network")

_FIXED_TIME = (1980, 1, 1, 0, 0, 0)
_SITE_FIELDS = ("last_mu", "last_sigma", "running_mu", "running_sigma")


def _write_entries(path: Path, entries: Dict[str, np.ndarray]) -> None:
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_STORED) as archive:
        for name in sorted(entries):
            info = zipfile.ZipInfo(f"{name}.npy", date_time=_FIXED_TIME)
            with archive.open(info, "w") as handle:
                np.lib.format.write_array(handle, np.asarray(entries[name], order="C"), allow_pickle=False)


def save_checkpoint(
    path: Union[str, Path],
    model: Model,
    config_hash: str,
    seed: int,
    extra: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write a model to disk.

    Args:
        path: Destination file
        model: Model to store
        config_hash: Hash of the experiment config that produced it
        seed: Run seed
        extra: Additional JSON-serializable metadata

    Returns:
        Path: The written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    entries: Dict[str, np.ndarray] = {}
    for name, param in model.named_parameters().items():
        entries[name] = param.numpy()
        if param.keep_mask is not None:
            entries[f"mask::{name}"] = param.keep_mask
    for site in model.advanced_sites:
        for field in _SITE_FIELDS:
            value = getattr(site, field)
            if value is not None:
                entries[f"site::{site.site}::{field}"] = value

    meta = {
        "format_version": settings.CHECKPOINT_FORMAT_VERSION,
        "spec": model.spec.model_dump(mode="json"),
        "config_hash": config_hash,
        "seed": seed,
        "telemetry": model.site_telemetry(),
        **(extra or {}),
    }
    entries["__meta__"] = np.array(json.dumps(meta, sort_keys=True))
    _write_entries(path, entries)
    logger.info(f"Saved checkpoint {path} ({len(entries) - 1} arrays)")
    return path


def load_checkpoint(
    path: Union[str, Path],
    expected_hash: Optional[str] = None,
) -> Tuple[Model, Dict[str, Any]]:
    """
    Restore a model.

    Raises:
        MissingDataError: if the file does not exist
        CheckpointMismatchError: on a format version or config hash mismatch
    """
    path = Path(path)
    if not path.is_file():
        raise MissingDataError(f"Checkpoint not found: {path}", details={"path": str(path)})

    with np.load(path, allow_pickle=False) as archive:
        arrays = {name: archive[name] for name in archive.files}
    meta = json.loads(str(arrays.pop("__meta__")))

    if meta.get("format_version") != settings.CHECKPOINT_FORMAT_VERSION:
        raise CheckpointMismatchError(
            f"Checkpoint format {meta.get('format_version')} is not supported",
            details={"path": str(path)},
        )
    if expected_hash is not None and meta.get("config_hash") != expected_hash:
        raise CheckpointMismatchError(
            f"Checkpoint {path} was written for config {meta.get('config_hash')}, not {expected_hash}",
            details={"checkpoint_hash": meta.get("config_hash"), "config_hash": expected_hash},
        )

    model = build(FcSpec.model_validate(meta["spec"]), np.random.default_rng(0))
    model.load_state_dict(arrays)
    for name, param in model.named_parameters().items():
        mask = arrays.get(f"mask::{name}")
        if mask is not None:
            param.set_keep_mask(mask)
    sites = {site.site: site for site in model.advanced_sites}
    for key, value in arrays.items():
        if key.startswith("site::"):
            _, index, field = key.split("::")
            setattr(sites[int(index)], field, np.array(value))
    return model, meta
