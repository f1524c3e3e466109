"""
Reader for the big-endian IDX format used by MNIST.
"""
import gzip
import logging
from pathlib import Path
from typing import Union

import numpy as np

from advdrop.core.exceptions import DataConsistencyError, DataFormatError, MissingDataError
from advdrop.schemas.model import Task
from advdrop.services.data.dataset import Dataset, Normalization, NormalizationKind
from advdrop.utils.ids import file_digest

logger = logging.getLogger("advdrop.data")

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
PIXEL_SCALE = 255.0


def _read_bytes(path: Union[str, Path]) -> bytes:
    path = Path(path)
    if not path.is_file():
        raise MissingDataError(f"Data file not found: {path}", details={"path": str(path)})
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rb") as f:
        return f.read()


def _header(buf: bytes, words: int, expected_magic: int, path) -> np.ndarray:
    if len(buf) < 4 * words:
        raise DataFormatError(f"{path}: file too short for an IDX header", details={"path": str(path)})
    header = np.frombuffer(buf, dtype=">u4", count=words)
    if int(header[0]) != expected_magic:
        raise DataFormatError(
            f"{path}: bad magic number 0x{int(header[0]):08x}, expected 0x{expected_magic:08x}",
            details={"path": str(path), "magic": int(header[0])},
        )
    return header


def parse_images(buf: bytes, path="<bytes>") -> np.ndarray:
    _, count, rows, cols = (int(v) for v in _header(buf, 4, IMAGE_MAGIC, path))
    pixels = np.frombuffer(buf, dtype=np.uint8, offset=16)
    if pixels.size != count * rows * cols:
        raise DataFormatError(
            f"{path}: expected {count * rows * cols} pixel bytes, found {pixels.size}",
            details={"path": str(path)},
        )
    return pixels.reshape(count, rows * cols)


def parse_labels(buf: bytes, path="<bytes>") -> np.ndarray:
    _, count = (int(v) for v in _header(buf, 2, LABEL_MAGIC, path))
    labels = np.frombuffer(buf, dtype=np.uint8, offset=8)
    if labels.size != count:
        raise DataFormatError(f"{path}: expected {count} labels, found {labels.size}",
                              details={"path": str(path)})
    return labels


def load_idx(images_path: Union[str, Path], labels_path: Union[str, Path], split: str = "all") -> Dataset:
    """
    Load an IDX image/label pair.

    Pixels are scaled to [0, 1] and images flattened to rows. Gzipped
    files are read transparently.

    Raises:
        MissingDataError: if either file is absent
        DataFormatError: on a bad magic number or truncated payload
        DataConsistencyError: if the two files hold different counts
    """
    pixels = parse_images(_read_bytes(images_path), images_path)
    labels = parse_labels(_read_bytes(labels_path), labels_path)
    if len(pixels) != len(labels):
        raise DataConsistencyError(
            f"{images_path} has {len(pixels)} images but {labels_path} has {len(labels)} labels",
            details={"images": len(pixels), "labels": len(labels)},
        )
    normalization = Normalization(NormalizationKind.SCALE, scale=PIXEL_SCALE)
    logger.info(f"Loaded {len(labels)} IDX samples of {pixels.shape[1]} features from {images_path}")
    return Dataset(
        features=normalization.apply(pixels.astype(np.float64)),
        targets=labels.astype(np.int64),
        task=Task.CLASSIFICATION,
        split=split,
        normalization=normalization,
        digests={str(images_path): file_digest(images_path), str(labels_path): file_digest(labels_path)},
    )
