"""Functional connectomes from activation profiles.

A probe set is a fixed, stratified subset of the training samples. Running
the probe through the network gives one activation profile per signal
(column); the connectome is the symmetric matrix of absolute Pearson
correlations between those profiles, with a zero diagonal.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidData

REDUCERS = ("mean", "max", "global-norm")


@dataclass(frozen=True)
class ActivationMatrix:
    """N probe samples x P activation signals."""

    values: np.ndarray
    sample_ids: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_ids", tuple(int(i) for i in self.sample_ids))
        if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
            raise InvalidArgument(f"activation matrix must be at least 2x2, got shape {values.shape}")
        if len(self.sample_ids) != values.shape[0]:
            raise InvalidArgument("sample_ids length must match the number of rows")
        if not np.all(np.isfinite(values)):
            raise InvalidData("activation matrix contains non-finite entries")

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_signals(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class Connectome:
    """Symmetric P x P matrix of absolute correlations, zero diagonal."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 2:
            raise InvalidArgument(f"connectome must be a square matrix with P >= 2, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InvalidData("connectome contains non-finite entries")
        if np.any(np.diagonal(w) != 0.0):
            raise InvalidArgument("connectome diagonal must be exactly zero")
        if not np.array_equal(w, w.T):
            raise InvalidArgument("connectome must be exactly symmetric")
        if w.min() < 0.0 or w.max() > 1.0:
            raise InvalidArgument("connectome weights must lie in [0, 1]")

    @property
    def n_signals(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class ProbeSet:
    """Fixed subset of sample indices, stratified by class."""

    indices: tuple
    per_class_counts: dict

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        if len(set(self.indices)) != len(self.indices):
            raise InvalidArgument("probe indices must be unique")

    @property
    def size(self) -> int:
        return len(self.indices)


def build_probe_set(labels, size: int, seed: int) -> ProbeSet:
    """Select a stratified, seeded subset of sample indices.

    Per-class quotas follow the largest-remainder rule on size * class
    frequency; within each class a seeded shuffle picks the members. If
    ``size`` covers the whole dataset, every index is returned.
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.size == 0:
        raise InvalidArgument("labels must be a nonempty 1-d sequence")
    if size < 1:
        raise InvalidArgument("probe size must be >= 1")
    n = labels.size
    classes, counts = np.unique(labels, return_counts=True)
    if size >= n:
        per_class = {c.item(): int(k) for c, k in zip(classes, counts)}
        return ProbeSet(tuple(range(n)), per_class)

    raw = size * counts / n
    quotas = np.floor(raw).astype(int)
    residual = size - int(quotas.sum())
    # Largest fractional remainders claim the leftover slots; stable sort
    # keeps ties in class order so the result is reproducible.
    order = np.argsort(-(raw - quotas), kind="stable")
    quotas[order[:residual]] += 1

    rng = np.random.default_rng(seed)
    chosen = []
    per_class = {}
    for cls, quota in zip(classes, quotas):
        members = np.flatnonzero(labels == cls)
        perm = rng.permutation(members.size)
        chosen.extend(int(i) for i in members[perm[:quota]])
        per_class[cls.item()] = int(quota)
    return ProbeSet(tuple(sorted(chosen)), per_class)


def correlation_connectome(a: ActivationMatrix) -> Connectome:
    """Absolute Pearson correlations between activation profiles.

    Any pair involving a constant (zero-variance) column gets weight 0,
    which keeps downstream filtrations free of NaNs. The matrix is built
    from the upper triangle only, so it is bitwise symmetric.
    """
    x = a.values
    dev = x - x.mean(axis=0)
    ssq = np.einsum("ij,ij->j", dev, dev)
    constant = ssq == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = (dev.T @ dev) / np.sqrt(np.outer(ssq, ssq))
    corr[constant, :] = 0.0
    corr[:, constant] = 0.0
    weights = np.clip(np.abs(corr), 0.0, 1.0)
    upper = np.triu(weights, k=1)
    return Connectome(upper + upper.T)


def drop_constant_signals(a: ActivationMatrix) -> ActivationMatrix | None:
    """Remove zero-variance columns; None when fewer than two survive.

    Constant signals carry no co-fluctuation information and would leave
    isolated vertices in the spanning-tree decomposition.
    """
    x = a.values
    keep = np.flatnonzero(np.ptp(x, axis=0) != 0.0)
    if keep.size == x.shape[1]:
        return a
    if keep.size < 2:
        return None
    return ActivationMatrix(x[:, keep], a.sample_ids)


def reduce_feature_maps(maps, reducer: str = "mean") -> ActivationMatrix:
    """Collapse per-sample per-channel spatial maps to one scalar each.

    ``maps`` is array-like with shape (samples, channels, *spatial).
    Reducers: "mean" averages all spatial entries, "max" takes the largest,
    "global-norm" takes the Euclidean norm of the flattened map.
    """
    arr = np.asarray(maps, dtype=np.float64)
    if arr.ndim < 3 or arr.size == 0 or np.prod(arr.shape[2:]) == 0:
        raise InvalidArgument("maps must have shape (samples, channels, *spatial) with nonempty spatial part")
    flat = arr.reshape(arr.shape[0], arr.shape[1], -1)
    if reducer == "mean":
        values = flat.mean(axis=2)
    elif reducer == "max":
        values = flat.max(axis=2)
    elif reducer == "global-norm":
        values = np.sqrt(np.einsum("ijk,ijk->ij", flat, flat))
    else:
        raise InvalidArgument(f"unknown reducer {reducer!r}, expected one of {REDUCERS}")
    return ActivationMatrix(values, tuple(range(arr.shape[0])))


def save_connectome_csv(m: Connectome, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in m.weights:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_connectome_csv(path) -> Connectome:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    return Connectome(np.asarray(rows, dtype=np.float64))
