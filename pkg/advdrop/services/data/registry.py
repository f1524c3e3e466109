"""
Registered datasets and where their files live.

Files are looked up in ADVDROP_DATA_DIR (or ./data). Source URLs are
pinned here; scripts/download_data.py fetches them and the loaders record
the SHA-256 of every file they read.
"""
import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, Field

from advdrop.core.config import settings
from advdrop.core.exceptions import ConfigError, MissingDataError
from advdrop.schemas.experiment import DatasetConfig
from advdrop.schemas.model import Task
from advdrop.services.data.csv_loader import WHITESPACE, CsvSchema, load_csv
from advdrop.services.data.dataset import Dataset
from advdrop.services.data.idx import load_idx
from advdrop.services.data.splits import split, subset
from advdrop.services.data.synthetic import SyntheticKind, synthetic

logger = logging.getLogger("advdrop.data")

_MNIST_BASE = "https://storage.googleapis.com/cvdf-datasets/mnist"
_UCI_BASE = "https://raw.githubusercontent.com/yaringal/DropoutUncertaintyExps/master/UCI_Datasets"


class SourceKind(str, Enum):
    IDX = "idx"
    TABLE = "table"
    SYNTHETIC = "synthetic"


class DatasetInfo(BaseModel):
    """Registry entry."""
    name: str
    kind: SourceKind
    task: Task
    files: Dict[str, str] = Field(default_factory=dict, description="Role to file name")
    urls: Dict[str, str] = Field(default_factory=dict, description="File name to source URL")
    output_dim: int = 1
    default_hidden: List[int] = Field(default_factory=lambda: [50, 50])
    mask_input: bool = False
    csv_schema: Optional[CsvSchema] = None
    synthetic_size: int = 1000


def _uci(name: str, folder: str) -> DatasetInfo:
    file_name = f"{name}.txt"
    return DatasetInfo(
        name=name,
        kind=SourceKind.TABLE,
        task=Task.REGRESSION,
        files={"table": file_name},
        urls={file_name: f"{_UCI_BASE}/{folder}/data/data.txt"},
        csv_schema=CsvSchema(has_header=False, delimiter=WHITESPACE, task=Task.REGRESSION),
    )


DATASETS: Dict[str, DatasetInfo] = {
    "mnist": DatasetInfo(
        name="mnist",
        kind=SourceKind.IDX,
        task=Task.CLASSIFICATION,
        files={
            "train_images": "train-images-idx3-ubyte",
            "train_labels": "train-labels-idx1-ubyte",
            "test_images": "t10k-images-idx3-ubyte",
            "test_labels": "t10k-labels-idx1-ubyte",
        },
        urls={
            f"{stem}.gz": f"{_MNIST_BASE}/{stem}.gz"
            for stem in ("train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                         "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")
        },
        output_dim=10,
        default_hidden=[800, 800],
        mask_input=True,
    ),
    "boston": _uci("boston", "bostonHousing"),
    "concrete": _uci("concrete", "concrete"),
    "wine-red": _uci("wine-red", "wine-quality-red"),
    "yacht": _uci("yacht", "yacht"),
    "two_gaussians": DatasetInfo(name="two_gaussians", kind=SourceKind.SYNTHETIC,
                                 task=Task.CLASSIFICATION, output_dim=2, default_hidden=[16]),
    "xor": DatasetInfo(name="xor", kind=SourceKind.SYNTHETIC, task=Task.CLASSIFICATION,
                       output_dim=2, default_hidden=[16]),
    "linear_regression": DatasetInfo(name="linear_regression", kind=SourceKind.SYNTHETIC,
                                     task=Task.REGRESSION, default_hidden=[16]),
}


def get_dataset_info(name: str) -> DatasetInfo:
    try:
        return DATASETS[name]
    except KeyError:
        raise ConfigError(f"Unknown dataset: {name}", details={"known": sorted(DATASETS)})


def data_dir(override: Optional[str] = None) -> Path:
    return Path(override or settings.ADVDROP_DATA_DIR or "data")


def _locate(directory: Path, file_name: str) -> Path:
    for candidate in (directory / file_name, directory / f"{file_name}.gz"):
        if candidate.is_file():
            return candidate
    raise MissingDataError(f"Data file not found: {directory / file_name}",
                           details={"path": str(directory / file_name)})


def load_dataset(cfg: DatasetConfig, seed: int = 0) -> Tuple[Dataset, Dataset]:
    """
    Load the train and test sides of a registered dataset.

    MNIST uses its official split; tables and synthetic sets are split
    with cfg.split_fraction using the run seed. Optional subsets are
    drawn after splitting.
    """
    info = get_dataset_info(cfg.name)

    if info.kind is SourceKind.IDX:
        directory = data_dir(cfg.path)
        train = load_idx(_locate(directory, info.files["train_images"]),
                         _locate(directory, info.files["train_labels"]), split="train")
        test = load_idx(_locate(directory, info.files["test_images"]),
                        _locate(directory, info.files["test_labels"]), split="test")
    elif info.kind is SourceKind.TABLE:
        path = Path(cfg.path) if cfg.path and Path(cfg.path).suffix else data_dir(cfg.path) / info.files["table"]
        train, test = split(load_csv(path, -1, info.csv_schema), cfg.split_fraction, seed)
    else:
        full = synthetic(SyntheticKind(info.name), cfg.train_size or info.synthetic_size, seed)
        train, test = split(full, cfg.split_fraction, seed)

    if cfg.train_size and info.kind is not SourceKind.SYNTHETIC:
        train = subset(train, cfg.train_size, seed)
    if cfg.test_size:
        test = subset(test, cfg.test_size, seed)
    logger.info(f"Dataset {cfg.name}: {len(train)} train / {len(test)} test samples")
    return train, test
