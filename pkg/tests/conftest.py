import numpy as np
import pytest

from mogafs.baselines import SyntheticSpec, generate_synthetic
from mogafs.data import Dataset


@pytest.fixture
def planted8():
    """8-feature dataset with 3 informative features."""
    dataset, informative = generate_synthetic(
        SyntheticSpec(n_samples=120, n_features=8, n_informative=3, noise_level=0.25, seed=11)
    )
    return dataset, informative


@pytest.fixture
def noise_dataset():
    """Two balanced classes, features independent of the labels."""
    rng = np.random.default_rng(123)
    n = 400
    X = rng.standard_normal((n, 5))
    y = (np.arange(n) % 2).astype(np.int64)
    return Dataset(X=X, y=y, label_names=("a", "b"))


def write_csv(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)
