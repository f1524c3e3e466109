from advdrop.services.data.csv_loader import CsvSchema, MissingPolicy, load_csv
from advdrop.services.data.dataset import Dataset, Normalization, NormalizationKind
from advdrop.services.data.idx import load_idx
from advdrop.services.data.registry import DATASETS, DatasetInfo, get_dataset_info, load_dataset
from advdrop.services.data.splits import split, subset
from advdrop.services.data.synthetic import SyntheticKind, synthetic
