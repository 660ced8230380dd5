"""CSV loading for the two benchmark datasets.

Both tables are four numeric measurements plus a species column mapped onto
labels 0, 1, 2. Rows with missing entries are dropped with a warning, so the
complete-case penguins table ends up at 333 rows out of the shipped 344.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from .experiment import LabeledDataset

_MISSING = {"", "na", "nan", "null", "none"}


@dataclass(frozen=True)
class DatasetSchema:
    """Column layout of one CSV benchmark table."""

    name: str
    feature_columns: tuple[str, ...]
    label_column: str
    label_map: dict[str, int]
    expected_count: int


IRIS_SCHEMA = DatasetSchema(
    name="iris",
    feature_columns=("sepal_length", "sepal_width", "petal_length", "petal_width"),
    label_column="species",
    label_map={"setosa": 0, "versicolor": 1, "virginica": 2},
    expected_count=150,
)

PENGUINS_SCHEMA = DatasetSchema(
    name="penguins",
    feature_columns=("bill_length_mm", "bill_depth_mm", "flipper_length_mm", "body_mass_g"),
    label_column="species",
    label_map={"adelie": 0, "chinstrap": 1, "gentoo": 2},
    expected_count=333,
)

SCHEMAS = {"iris": IRIS_SCHEMA, "penguins": PENGUINS_SCHEMA}


def load_dataset(path, schema):
    """Read a CSV into a LabeledDataset, dropping incomplete rows.

    Column names are matched case-insensitively and label strings likewise,
    so the common shipped variants of either table load unchanged. A row
    count differing from the schema's expectation warns but still loads.
    """
    points, labels, dropped = [], [], 0
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise ValueError(f"{path} has no header row")
        columns = {name.strip().lower(): name for name in reader.fieldnames}
        try:
            feature_keys = [columns[c] for c in schema.feature_columns]
            label_key = columns[schema.label_column]
        except KeyError as exc:
            raise ValueError(f"{path} is missing required column {exc}") from None
        for row in reader:
            raw = [row[k] for k in feature_keys] + [row[label_key]]
            if any(v is None or v.strip().lower() in _MISSING for v in raw):
                dropped += 1
                continue
            label_text = row[label_key].strip().lower()
            if label_text not in schema.label_map:
                raise ValueError(f"unknown {schema.label_column} value {row[label_key]!r} in {path}")
            points.append([float(row[k]) for k in feature_keys])
            labels.append(schema.label_map[label_text])
    if dropped:
        warnings.warn(f"{path}: dropped {dropped} rows with missing values", stacklevel=2)
    if len(points) != schema.expected_count:
        warnings.warn(f"{path}: expected {schema.expected_count} complete rows, got {len(points)}",
                      stacklevel=2)
    return LabeledDataset(schema.name, np.array(points, dtype=float), np.array(labels, dtype=int))
