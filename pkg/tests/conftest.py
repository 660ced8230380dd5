import os

import numpy as np
import pytest
from sklearn.datasets import load_iris

from quditml.datasets import PENGUINS_SCHEMA, load_dataset
from quditml.experiment import LabeledDataset

# The penguins CSV is not bundled; point QML_PENGUINS_CSV at a local copy
# (see DATA.md) to enable the tests that need it.
PENGUINS_PATHS = [
    os.environ.get("QML_PENGUINS_CSV", ""),
    os.path.join(os.path.dirname(__file__), "..", "data", "penguins.csv"),
]


def penguins_csv_path():
    for p in PENGUINS_PATHS:
        if p and os.path.exists(p):
            return p
    return None


needs_penguins = pytest.mark.skipif(
    penguins_csv_path() is None,
    reason="penguins.csv not found; set QML_PENGUINS_CSV or add data/penguins.csv",
)


@pytest.fixture(scope="session")
def iris_dataset():
    raw = load_iris()
    return LabeledDataset("iris", raw.data, raw.target)


@pytest.fixture(scope="session")
def iris_csv(tmp_path_factory):
    from quditml.prepare_data import write_iris

    out_dir = tmp_path_factory.mktemp("data")
    path = write_iris(str(out_dir))
    return str(path)


@pytest.fixture(scope="session")
def penguins_dataset():
    path = penguins_csv_path()
    if path is None:
        pytest.skip("penguins.csv not available")
    return load_dataset(path, PENGUINS_SCHEMA)


def random_state_batch(rng, dim, count):
    """Haar-uniform pure states as rows of a (count, dim) complex array."""
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def haar_unitary(rng, dim):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
