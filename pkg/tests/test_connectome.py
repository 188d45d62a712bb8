import numpy as np
import pytest

from cgalr.connectome import (
    ActivationMatrix,
    Connectome,
    build_probe_set,
    correlation_connectome,
    drop_constant_signals,
    load_connectome_csv,
    reduce_feature_maps,
    save_connectome_csv,
)
from cgalr.errors import InvalidArgument, InvalidData


def make_activations(values):
    values = np.asarray(values, dtype=np.float64)
    return ActivationMatrix(values, tuple(range(values.shape[0])))


class TestProbeSet:
    def test_exact_stratification(self):
        probe = build_probe_set([0, 0, 1, 1], size=2, seed=7)
        assert probe.per_class_counts == {0: 1, 1: 1}
        assert probe.size == 2

    def test_clamps_to_dataset(self):
        probe = build_probe_set([0, 1], size=10, seed=0)
        assert probe.indices == (0, 1)

    def test_proportional_rounding(self):
        labels = [0] * 30 + [1] * 10
        probe = build_probe_set(labels, size=8, seed=3)
        assert probe.per_class_counts == {0: 6, 1: 2}

    def test_reproducible(self):
        labels = np.repeat([0, 1, 2], 50)
        a = build_probe_set(labels, size=20, seed=11)
        b = build_probe_set(labels, size=20, seed=11)
        assert a.indices == b.indices
        assert build_probe_set(labels, size=20, seed=12).indices != a.indices

    def test_indices_unique_and_in_range(self):
        rng = np.random.default_rng(0)
        labels = rng.integers(0, 4, 200)
        probe = build_probe_set(labels, size=50, seed=5)
        assert len(set(probe.indices)) == 50
        assert all(0 <= i < 200 for i in probe.indices)

    def test_quota_matches_largest_remainder(self):
        labels = [0] * 5 + [1] * 3 + [2] * 2
        probe = build_probe_set(labels, size=7, seed=1)
        assert sum(probe.per_class_counts.values()) == 7
        # raw quotas 3.5 / 2.1 / 1.4 -> floor 3/2/1, leftover to class 0
        assert probe.per_class_counts == {0: 4, 1: 2, 2: 1}

    def test_errors(self):
        with pytest.raises(InvalidArgument):
            build_probe_set([], size=3, seed=0)
        with pytest.raises(InvalidArgument):
            build_probe_set([0, 1], size=0, seed=0)


class TestCorrelationConnectome:
    def test_perfect_positive_correlation(self):
        m = correlation_connectome(make_activations([[1, 2], [2, 4]]))
        assert m.weights[0, 1] == pytest.approx(1.0)

    def test_perfect_negative_correlation(self):
        m = correlation_connectome(make_activations([[1, 5], [2, 3]]))
        assert m.weights[0, 1] == pytest.approx(1.0)

    def test_constant_column_gives_zero(self):
        m = correlation_connectome(make_activations([[1, 3], [2, 3]]))
        assert m.weights[0, 1] == 0.0

    def test_bitwise_symmetry_and_range(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            x = rng.normal(size=(15, 8))
            w = correlation_connectome(make_activations(x)).weights
            assert np.array_equal(w, w.T)
            assert np.all(np.diagonal(w) == 0.0)
            assert w.min() >= 0.0 and w.max() <= 1.0

    def test_scale_shift_invariance(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(20, 6))
        base = correlation_connectome(make_activations(x)).weights
        y = x.copy()
        y[:, 2] = -3.5 * y[:, 2] + 11.0
        y[:, 4] = 0.01 * y[:, 4] - 2.0
        shifted = correlation_connectome(make_activations(y)).weights
        assert np.max(np.abs(base - shifted)) < 1e-10

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidData):
            make_activations([[1.0, np.nan], [2.0, 3.0]])


class TestReduceFeatureMaps:
    maps = np.array([[[[1.0, 2.0], [3.0, 4.0]], [[0.0, 0.0], [0.0, 1.0]]]] * 2)

    def test_mean(self):
        out = reduce_feature_maps(self.maps, "mean")
        assert out.values[0, 0] == pytest.approx(2.5)

    def test_max(self):
        out = reduce_feature_maps(self.maps, "max")
        assert out.values[0, 0] == pytest.approx(4.0)

    def test_global_norm(self):
        out = reduce_feature_maps(self.maps, "global-norm")
        assert out.values[0, 0] == pytest.approx(np.sqrt(30.0))

    def test_empty_rejected(self):
        with pytest.raises(InvalidArgument):
            reduce_feature_maps(np.empty((2, 2, 0)), "mean")
        with pytest.raises(InvalidArgument):
            reduce_feature_maps(self.maps, "median")


def test_drop_constant_signals():
    x = np.array([[1.0, 5.0, 0.2], [2.0, 5.0, 0.9], [3.0, 5.0, 0.4]])
    kept = drop_constant_signals(make_activations(x))
    assert kept.values.shape == (3, 2)
    assert np.array_equal(kept.values, x[:, [0, 2]])
    # all-but-one constant: no usable connectome
    flat = np.array([[1.0, 5.0], [2.0, 5.0]])
    assert drop_constant_signals(make_activations(flat)) is None
    # untouched input comes back as-is
    full = make_activations(np.array([[1.0, 2.0], [3.0, 1.0]]))
    assert drop_constant_signals(full) is full


def test_connectome_validation():
    with pytest.raises(InvalidArgument):
        Connectome(np.array([[0.0, 0.5], [0.4, 0.0]]))  # asymmetric
    with pytest.raises(InvalidArgument):
        Connectome(np.array([[0.1, 0.5], [0.5, 0.0]]))  # nonzero diagonal
    with pytest.raises(InvalidArgument):
        Connectome(np.array([[0.0, 1.5], [1.5, 0.0]]))  # out of range


def test_connectome_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    m = correlation_connectome(make_activations(rng.normal(size=(10, 5))))
    path = tmp_path / "m.csv"
    save_connectome_csv(m, path)
    again = load_connectome_csv(path)
    assert np.array_equal(m.weights, again.weights)
