# advdrop/utils/ids.py
"""
Deterministic identifiers: config hashes and random-stream seeds.
"""
import hashlib
import json
from enum import IntEnum
from typing import Any, Mapping

import numpy as np

from advdrop.core.config import settings


class Stream(IntEnum):
    """Independent random streams derived from one run seed."""
    INIT = 0
    TRAIN = 1
    PRUNE = 3
    SPLIT = 4
    MC = 5


def canonical_json(payload: Mapping[str, Any]) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(payload: Mapping[str, Any]) -> str:
    """
    Hash a config mapping.

    Args:
        payload: JSON-serializable mapping

    Returns:
        str: Hex digest truncated to settings.CONFIG_HASH_LENGTH
    """
    digest = hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()
    return digest[: settings.CONFIG_HASH_LENGTH]


def make_rng(seed: int, stream: Stream) -> np.random.Generator:
    """Generator for one named stream of a run seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(int(stream),)))


def file_digest(path) -> str:
    """SHA-256 of a file's bytes."""
    hasher = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            hasher.update(chunk)
    return hasher.hexdigest()
