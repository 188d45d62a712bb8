"""Seeded synthetic datasets and a CSV loader.

Desk-scale stand-ins for the image/graph corpora: two interleaved moons,
concentric rings, and Gaussian blobs, plus a loader for CSV files whose
rows are samples with the integer class label in the last column.
"""

import numpy as np

from .errors import InvalidArgument

DATASETS = ("two_moons", "rings", "blobs")


def two_moons(n: int, noise: float = 0.25, seed: int = 0):
    rng = np.random.default_rng(seed)
    n1 = n // 2
    n2 = n - n1
    t1 = rng.uniform(0.0, np.pi, n1)
    t2 = rng.uniform(0.0, np.pi, n2)
    upper = np.stack([np.cos(t1), np.sin(t1)], axis=1)
    lower = np.stack([1.0 - np.cos(t2), 0.5 - np.sin(t2)], axis=1)
    x = np.concatenate([upper, lower], axis=0)
    x += rng.normal(0.0, noise, x.shape)
    y = np.concatenate([np.zeros(n1, dtype=np.int64), np.ones(n2, dtype=np.int64)])
    return x, y


def rings(n: int, noise: float = 0.1, seed: int = 0):
    rng = np.random.default_rng(seed)
    n1 = n // 2
    n2 = n - n1
    t1 = rng.uniform(0.0, 2.0 * np.pi, n1)
    t2 = rng.uniform(0.0, 2.0 * np.pi, n2)
    inner = 0.5 * np.stack([np.cos(t1), np.sin(t1)], axis=1)
    outer = 1.0 * np.stack([np.cos(t2), np.sin(t2)], axis=1)
    x = np.concatenate([inner, outer], axis=0)
    x += rng.normal(0.0, noise, x.shape)
    y = np.concatenate([np.zeros(n1, dtype=np.int64), np.ones(n2, dtype=np.int64)])
    return x, y


def blobs(n: int, n_classes: int = 3, spread: float = 0.35, seed: int = 0):
    if n_classes < 2:
        raise InvalidArgument("blobs need at least two classes")
    rng = np.random.default_rng(seed)
    angles = 2.0 * np.pi * np.arange(n_classes) / n_classes
    centers = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    y = rng.integers(0, n_classes, n)
    x = centers[y] + rng.normal(0.0, spread, (n, 2))
    return x, y.astype(np.int64)


def make_dataset(name: str, n: int, noise: float = 0.25, n_classes: int = 3, seed: int = 0):
    if name == "two_moons":
        return two_moons(n, noise=noise, seed=seed)
    if name == "rings":
        return rings(n, noise=noise, seed=seed)
    if name == "blobs":
        return blobs(n, n_classes=n_classes, spread=noise, seed=seed)
    raise InvalidArgument(f"unknown dataset {name!r}, expected one of {DATASETS}")


def load_csv_dataset(path):
    """Rows are samples; the last column is the integer class label."""
    arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    if arr.shape[1] < 2:
        raise InvalidArgument("dataset CSV needs at least one feature column plus the label column")
    x = arr[:, :-1]
    y = arr[:, -1].astype(np.int64)
    if not np.allclose(arr[:, -1], y):
        raise InvalidArgument("last CSV column must hold integer class labels")
    return x, y


def train_val_test_split(x, y, seed: int, fracs=(0.70, 0.15, 0.15)):
    """Seeded shuffle into train/validation/test partitions."""
    if abs(sum(fracs) - 1.0) > 1e-9:
        raise InvalidArgument("split fractions must sum to 1")
    n = x.shape[0]
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(round(fracs[0] * n))
    n_val = int(round(fracs[1] * n))
    tr, va, te = order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :]
    return (x[tr], y[tr]), (x[va], y[va]), (x[te], y[te])
