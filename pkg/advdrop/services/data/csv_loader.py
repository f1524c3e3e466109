"""
Numeric table loader for UCI-style regression and classification files.

Handles comma, semicolon, tab and pipe separated files as well as
whitespace-aligned `.data` files, with an optional header row.
"""
import csv
import logging
from enum import Enum
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, Field

from advdrop.core.exceptions import DataConsistencyError, DataParseError, MissingDataError
from advdrop.schemas.model import Task
from advdrop.services.data.dataset import Dataset, Normalization
from advdrop.utils.ids import file_digest

logger = logging.getLogger("advdrop.data")

WHITESPACE = "whitespace"


class CsvParserConfig:
    """Parser limits and detection settings."""

    ALLOWED_DELIMITERS = [",", ";", "\t", "|"]
    MISSING_TOKENS = {"", "?", "na", "nan", "null"}
    SNIFF_BYTES = 8192


class MissingPolicy(str, Enum):
    ERROR = "error"
    DROP = "drop"


class CsvSchema(BaseModel):
    """How to read one table."""
    has_header: Optional[bool] = Field(None, description="None detects a non-numeric first row")
    delimiter: Optional[str] = Field(None, description="Separator, 'whitespace', or None to detect")
    missing: MissingPolicy = Field(MissingPolicy.ERROR, description="What to do with empty or '?' cells")
    task: Task = Field(Task.REGRESSION, description="Targets kept raw for regression, indexed for classification")


def _detect_delimiter(sample: str) -> str:
    try:
        return csv.Sniffer().sniff(sample, delimiters="".join(CsvParserConfig.ALLOWED_DELIMITERS)).delimiter
    except csv.Error:
        return WHITESPACE


def _read_rows(path: Path, delimiter: str) -> List[List[str]]:
    with open(path, newline="", encoding="utf-8") as f:
        if delimiter == WHITESPACE:
            return [line.split() for line in f if line.strip()]
        return [row for row in csv.reader(f, delimiter=delimiter) if any(cell.strip() for cell in row)]


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def load_csv(
    path: Union[str, Path],
    target_column: Union[int, str] = -1,
    schema: Optional[CsvSchema] = None,
) -> Dataset:
    """
    Load a rectangular numeric table.

    Features are z-scored with population statistics of the whole file;
    split() recomputes them on the training side. Regression targets are
    left in raw units.

    Args:
        path: Table file
        target_column: Column index (negative counts from the end) or header name
        schema: Parsing options

    Returns:
        Dataset: Normalized features and targets

    Raises:
        MissingDataError: if the file is absent
        DataParseError: on a non-numeric cell or ragged row, with 1-based row and column
    """
    schema = schema or CsvSchema()
    path = Path(path)
    if not path.is_file():
        raise MissingDataError(f"Data file not found: {path}", details={"path": str(path)})

    with open(path, encoding="utf-8") as f:
        sample = f.read(CsvParserConfig.SNIFF_BYTES)
    delimiter = schema.delimiter or _detect_delimiter(sample)
    rows = _read_rows(path, delimiter)
    if not rows:
        raise DataConsistencyError(f"{path} holds no rows", details={"path": str(path)})

    has_header = schema.has_header
    if has_header is None:
        has_header = not all(_is_number(cell.strip()) for cell in rows[0])
    header = [cell.strip() for cell in rows[0]] if has_header else None
    body = rows[1:] if has_header else rows
    width = len(rows[0])

    if isinstance(target_column, str):
        if header is None or target_column not in header:
            raise DataConsistencyError(f"Target column {target_column!r} not found in {path}",
                                       details={"header": header})
        target_index = header.index(target_column)
    else:
        target_index = target_column % width

    values = []
    dropped = 0
    first_line = 2 if has_header else 1
    for offset, row in enumerate(body):
        line = first_line + offset
        if len(row) != width:
            raise DataParseError(f"{path}: row {line} has {len(row)} columns, expected {width}",
                                 row=line, column=len(row))
        parsed = []
        missing = False
        for col, cell in enumerate(row, start=1):
            token = cell.strip()
            if token.lower() in CsvParserConfig.MISSING_TOKENS:
                if schema.missing is MissingPolicy.ERROR:
                    raise DataParseError(f"{path}: missing value at row {line}, column {col}",
                                         row=line, column=col, value=token)
                missing = True
                break
            try:
                parsed.append(float(token))
            except ValueError:
                raise DataParseError(f"{path}: non-numeric value {token!r} at row {line}, column {col}",
                                     row=line, column=col, value=token)
        if missing:
            dropped += 1
            continue
        values.append(parsed)

    if dropped:
        logger.warning(f"Dropped {dropped} rows with missing values from {path}")
    if not values:
        raise DataConsistencyError(f"{path} has no complete rows", details={"path": str(path)})

    table = np.array(values, dtype=np.float64)
    raw_features = np.delete(table, target_index, axis=1)
    targets = table[:, target_index]
    if schema.task is Task.CLASSIFICATION:
        _, targets = np.unique(targets, return_inverse=True)
        targets = targets.astype(np.int64)

    normalization = Normalization.zscore(raw_features)
    logger.info(f"Loaded {len(table)} rows x {raw_features.shape[1]} features from {path}")
    return Dataset(
        features=normalization.apply(raw_features),
        targets=targets,
        task=schema.task,
        normalization=normalization,
        name=path.stem,
        digests={str(path): file_digest(path)},
    )
