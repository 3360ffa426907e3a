import numpy as np
import pytest

from imbench.data import Dataset


@pytest.fixture
def make_dataset():
    def _make(features, labels, names=None):
        features = np.asarray(features, dtype=np.float64)
        if names is None:
            names = [f"f{i}" for i in range(features.shape[1])]
        return Dataset(features, np.asarray(labels), tuple(names))

    return _make


def random_imbalanced(rng, n_min=None, n_maj=None, n_features=None):
    """Small random dataset with distinct-ish rows, minority labeled 1."""
    n_min = n_min or int(rng.integers(2, 8))
    n_maj = n_maj or int(rng.integers(n_min, n_min + 12))
    n_features = n_features or int(rng.integers(1, 5))
    feats = rng.random((n_min + n_maj, n_features))
    labels = np.concatenate([np.ones(n_min, dtype=np.int64), np.zeros(n_maj, dtype=np.int64)])
    order = rng.permutation(n_min + n_maj)
    return Dataset(feats[order], labels[order], tuple(f"f{i}" for i in range(n_features)))
