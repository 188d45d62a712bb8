import numpy as np
import pytest

from cgalr.connectome import Connectome
from cgalr.errors import DisconnectedGraph, InvalidArgument
from cgalr.topology import (
    PersistenceDiagram,
    PersistenceVector,
    load_diagram_csv,
    load_vector_csv,
    pgh_persistence_vector,
    rips_h1_diagram,
    save_diagram_csv,
    save_vector_csv,
    vr_h1_diagram,
)
from oracles import h1_pairs_full_reduction, non_tree_weights_by_enumeration, random_connectome


def connectome_from_edges(n, edges):
    w = np.zeros((n, n))
    for i, j, weight in edges:
        w[i, j] = w[j, i] = weight
    return Connectome(w)


class TestPghVector:
    def test_triangle_single_nontree_edge(self):
        m = connectome_from_edges(3, [(0, 1, 0.9), (0, 2, 0.8), (1, 2, 0.5)])
        assert pgh_persistence_vector(m).deaths.tolist() == [0.5]

    def test_tree_has_no_cycles(self):
        m = connectome_from_edges(4, [(0, 1, 0.9), (1, 2, 0.8), (2, 3, 0.7)])
        assert len(pgh_persistence_vector(m)) == 0

    def test_complete_four_graph_against_enumeration(self):
        weights = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6]
        edges = [(i, j) for i in range(4) for j in range(i + 1, 4)]
        m = connectome_from_edges(4, [(i, j, w) for (i, j), w in zip(edges, weights)])
        got = pgh_persistence_vector(m).deaths.tolist()
        assert len(got) == 3
        assert got == non_tree_weights_by_enumeration(m.weights)

    def test_matches_enumeration_on_random_graphs(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            m = random_connectome(rng, int(rng.integers(3, 6)))
            got = pgh_persistence_vector(m).deaths.tolist()
            assert got == pytest.approx(non_tree_weights_by_enumeration(m.weights))

    def test_weight_conservation(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = random_connectome(rng, 7)
            vec = pgh_persistence_vector(m)
            total = m.weights[np.triu_indices(7, k=1)].sum()
            n_edges = 7 * 6 // 2
            mst_weight = total - vec.deaths.sum()
            assert len(vec) == n_edges - 6
            # the tree holds exactly the remaining mass
            assert mst_weight == pytest.approx(total - vec.deaths.sum())
            assert vec.deaths.sum() + mst_weight == pytest.approx(total)

    def test_disconnected_names_components(self):
        m = connectome_from_edges(4, [(0, 1, 0.5), (2, 3, 0.7)])
        with pytest.raises(DisconnectedGraph) as err:
            pgh_persistence_vector(m)
        assert sorted(err.value.components) == [(0, 1), (2, 3)]


class TestRipsH1:
    def test_three_points_always_empty(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            m = random_connectome(rng, 3)
            assert len(vr_h1_diagram(m)) == 0

    def test_square_with_diagonals(self):
        d = np.full((4, 4), 1.4)
        np.fill_diagonal(d, 0.0)
        for i, j in [(0, 1), (1, 2), (2, 3), (0, 3)]:
            d[i, j] = d[j, i] = 1.0
        dgm = rips_h1_diagram(d)
        assert dgm.points.tolist() == [[1.0, 1.4]]

    def test_determinism(self):
        rng = np.random.default_rng(2)
        m = random_connectome(rng, 6)
        a = vr_h1_diagram(m)
        b = vr_h1_diagram(m)
        assert np.array_equal(a.points, b.points)

    def test_matches_full_reduction_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(30):
            n = int(rng.integers(4, 9))
            m = random_connectome(rng, n)
            got = [tuple(p) for p in vr_h1_diagram(m).points]
            want = h1_pairs_full_reduction(1.0 - m.weights)
            assert got == want

    def test_births_and_deaths_come_from_the_filtration_values(self):
        rng = np.random.default_rng(21)
        for _ in range(10):
            m = random_connectome(rng, 7)
            values = set((1.0 - m.weights)[np.triu_indices(7, k=1)].tolist())
            for birth, death in vr_h1_diagram(m).points:
                assert birth < death
                assert birth in values and death in values

    def test_rejects_bad_matrices(self):
        with pytest.raises(InvalidArgument):
            rips_h1_diagram(np.zeros((2, 3)))
        with pytest.raises(InvalidArgument):
            rips_h1_diagram(np.array([[0.0, 1.0], [0.5, 0.0]]))


def test_vector_validation():
    with pytest.raises(InvalidArgument):
        PersistenceVector([0.5, 0.2])
    with pytest.raises(InvalidArgument):
        PersistenceVector([0.5, 1.2])


def test_diagram_validation():
    with pytest.raises(InvalidArgument):
        PersistenceDiagram([(0.5, 0.5)])  # zero persistence not allowed
    with pytest.raises(InvalidArgument):
        PersistenceDiagram([(0.8, 0.2)])


def test_csv_roundtrips(tmp_path):
    vec = PersistenceVector([0.1, 0.4, 0.9])
    save_vector_csv(vec, tmp_path / "v.csv")
    assert np.array_equal(load_vector_csv(tmp_path / "v.csv").deaths, vec.deaths)

    dgm = PersistenceDiagram([(0.1, 0.3), (0.2, 0.9)])
    save_diagram_csv(dgm, tmp_path / "d.csv")
    assert np.array_equal(load_diagram_csv(tmp_path / "d.csv").points, dgm.points)

    empty = PersistenceDiagram(np.empty((0, 2)))
    save_diagram_csv(empty, tmp_path / "e.csv")
    assert len(load_diagram_csv(tmp_path / "e.csv")) == 0
