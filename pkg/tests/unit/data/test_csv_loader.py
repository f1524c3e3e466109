import numpy as np
import pytest

from advdrop.core.exceptions import DataParseError, MissingDataError
from advdrop.schemas.model import Task
from advdrop.services.data import CsvSchema, MissingPolicy, load_csv


def _write(tmp_path, text, name="table.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_zscore_features_and_raw_targets(tmp_path):
    path = _write(tmp_path, "a,b,y\n1,10,5\n2,10,6\n3,10,7\n")
    ds = load_csv(path)
    np.testing.assert_allclose(ds.features[:, 0], [-1.2247449, 0.0, 1.2247449], rtol=1e-6)
    np.testing.assert_allclose(ds.features[:, 1], [0.0, 0.0, 0.0])
    np.testing.assert_allclose(ds.targets, [5.0, 6.0, 7.0])
    np.testing.assert_allclose(ds.raw_features(), [[1, 10], [2, 10], [3, 10]])


def test_whitespace_tables_without_header(tmp_path):
    path = _write(tmp_path, "1.0  2.0 3.0\n4.0 5.0  6.0\n", name="data.txt")
    ds = load_csv(path, schema=CsvSchema(has_header=False, delimiter="whitespace"))
    assert ds.features.shape == (2, 2)
    assert ds.targets.tolist() == [3.0, 6.0]


def test_named_target_column(tmp_path):
    path = _write(tmp_path, "y;a\n1;4\n2;5\n")
    ds = load_csv(path, target_column="y", schema=CsvSchema(delimiter=";"))
    assert ds.targets.tolist() == [1.0, 2.0]


def test_classification_targets_are_indexed(tmp_path):
    path = _write(tmp_path, "a,label\n0.5,10\n0.1,30\n0.7,10\n")
    ds = load_csv(path, schema=CsvSchema(task=Task.CLASSIFICATION))
    assert ds.targets.tolist() == [0, 1, 0]
    assert ds.n_classes == 2


def test_non_numeric_cell_reports_position(tmp_path):
    path = _write(tmp_path, "a,y\n1,2\nx,3\n")
    with pytest.raises(DataParseError) as exc_info:
        load_csv(path)
    assert exc_info.value.details["row"] == 3
    assert exc_info.value.details["column"] == 1


def test_missing_values(tmp_path):
    path = _write(tmp_path, "a,y\n1,2\n?,3\n4,5\n")
    with pytest.raises(DataParseError):
        load_csv(path)
    ds = load_csv(path, schema=CsvSchema(missing=MissingPolicy.DROP))
    assert len(ds) == 2


def test_missing_file(tmp_path):
    with pytest.raises(MissingDataError):
        load_csv(tmp_path / "nope.csv")
