"""Prepare the benchmark CSVs.

Run as ``python3 -m quditml.prepare_data [out_dir]``. Iris is generated from
scikit-learn's bundled copy. The penguins table is not bundled with any
pre-installed package here, so this script converts a raw download if one is
present (tries the palmerpenguins package, then a raw penguins.csv already
in out_dir) and otherwise prints fetch instructions. SHA-256 digests of the
written files are printed for pinning in DATA.md.
"""

from __future__ import annotations

import csv
import hashlib
import sys
from pathlib import Path

from .datasets import IRIS_SCHEMA, PENGUINS_SCHEMA

_IRIS_LABELS = {0: "setosa", 1: "versicolor", 2: "virginica"}


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_iris(out_dir):
    try:
        from sklearn.datasets import load_iris
    except ImportError:
        print("scikit-learn is unavailable; cannot generate iris.csv", file=sys.stderr)
        return None
    bundle = load_iris()
    path = Path(out_dir) / "iris.csv"
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(IRIS_SCHEMA.feature_columns) + [IRIS_SCHEMA.label_column])
        for row, label in zip(bundle.data, bundle.target):
            writer.writerow([f"{v:.1f}" for v in row] + [_IRIS_LABELS[int(label)]])
    return path


def write_penguins(out_dir):
    """Normalize a raw penguins table into the four-feature schema."""
    raw_rows = None
    try:
        from palmerpenguins import load_penguins
        frame = load_penguins()
        raw_rows = frame.to_dict("records")
    except ImportError:
        raw = Path(out_dir) / "penguins-raw.csv"
        if raw.exists():
            with open(raw, newline="") as handle:
                raw_rows = list(csv.DictReader(handle))
    if raw_rows is None:
        print(
            "penguins source not found. Either `pip install palmerpenguins` and rerun,\n"
            "or download the raw table, e.g.\n"
            "  curl -L -o penguins-raw.csv https://raw.githubusercontent.com/"
            "allisonhorst/palmerpenguins/main/inst/extdata/penguins.csv\n"
            "into the output directory and rerun.",
            file=sys.stderr,
        )
        return None
    path = Path(out_dir) / "penguins.csv"
    features = PENGUINS_SCHEMA.feature_columns
    kept = 0
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(list(features) + [PENGUINS_SCHEMA.label_column])
        for row in raw_rows:
            values = [row.get(c) for c in features] + [row.get(PENGUINS_SCHEMA.label_column)]
            cleaned = []
            for v in values:
                text = "" if v is None else str(v).strip()
                if text.lower() in ("", "na", "nan", "null", "none"):
                    cleaned = None
                    break
                cleaned.append(text)
            if cleaned is None:
                continue
            writer.writerow(cleaned)
            kept += 1
    print(f"penguins.csv: kept {kept} complete rows (expected {PENGUINS_SCHEMA.expected_count})")
    return path


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    out_dir = Path(argv[0]) if argv else Path("data")
    out_dir.mkdir(parents=True, exist_ok=True)
    status = 0
    for writer in (write_iris, write_penguins):
        path = writer(out_dir)
        if path is None:
            status = 1
            continue
        print(f"{path}  sha256={_digest(path)}")
    return status


if __name__ == "__main__":
    sys.exit(main())
