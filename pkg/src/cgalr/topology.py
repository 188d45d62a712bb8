"""Persistence summaries of a connectome.

Two summaries are supported: the graph-native persistence vector (weights
of the edges left out of a maximum spanning tree, read as death times of
1-cycles) and the H1 persistence diagram of the Vietoris-Rips filtration
on the dissimilarity matrix 1 - weights.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .connectome import Connectome
from .errors import DisconnectedGraph, InvalidArgument, InvalidData


@dataclass(frozen=True)
class PersistenceVector:
    """Ascending non-tree edge weights of the spanning-tree decomposition."""

    deaths: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.deaths, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "deaths", d)
        if d.size and not np.all(np.isfinite(d)):
            raise InvalidData("persistence vector contains non-finite values")
        if d.size and (d.min() < 0.0 or d.max() > 1.0):
            raise InvalidArgument("persistence vector values must lie in [0, 1]")
        if np.any(np.diff(d) < 0.0):
            raise InvalidArgument("persistence vector must be sorted ascending")

    def __len__(self) -> int:
        return int(self.deaths.size)


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs with death > birth."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 2)
        object.__setattr__(self, "points", pts)
        if pts.size and not np.all(np.isfinite(pts)):
            raise InvalidData("persistence diagram contains non-finite values")
        if np.any(pts[:, 1] <= pts[:, 0]):
            raise InvalidArgument("every diagram point needs death > birth (zero-persistence pairs are dropped)")

    def __len__(self) -> int:
        return int(self.points.shape[0])


EMPTY_DIAGRAM = PersistenceDiagram(np.empty((0, 2), dtype=np.float64))
EMPTY_VECTOR = PersistenceVector(np.empty(0, dtype=np.float64))


def _connected_components(n_vertices: int, edges) -> list:
    parent = list(range(n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    groups = {}
    for v in range(n_vertices):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def pgh_persistence_vector(m: Connectome) -> PersistenceVector:
    """Weights of the edges outside a maximum spanning tree, ascending.

    The graph is taken over the strictly positive weights; the Kruskal
    scan breaks weight ties by lexicographic edge index so the result is
    reproducible. A disconnected positive-weight graph is an error that
    names the offending components.
    """
    w = m.weights
    n = w.shape[0]
    edges = [(w[i, j], i, j) for i, j in combinations(range(n), 2) if w[i, j] > 0.0]
    components = _connected_components(n, [(i, j) for _, i, j in edges])
    if len(components) > 1:
        raise DisconnectedGraph(components)

    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    non_tree = []
    for weight, i, j in sorted(edges, key=lambda e: (-e[0], e[1], e[2])):
        ri, rj = find(i), find(j)
        if ri == rj:
            non_tree.append(weight)
        else:
            parent[ri] = rj
    return PersistenceVector(np.sort(np.asarray(non_tree, dtype=np.float64)))


def vr_h1_diagram(m: Connectome) -> PersistenceDiagram:
    """H1 persistence of the clique filtration on dissimilarities 1 - w."""
    return rips_h1_diagram(1.0 - m.weights)


def rips_h1_diagram(dissimilarity) -> PersistenceDiagram:
    """H1 persistence of the clique (Vietoris-Rips) filtration.

    Edges enter at their dissimilarity, triangles at the max of their
    edges; ties are ordered by (value, dimension, vertex tuple). The
    boundary of the triangle columns is reduced over Z/2; zero-persistence
    pairs are dropped. Every cycle of the finite clique complex dies, so
    the diagram has no infinite bars.
    """
    d = np.asarray(dissimilarity, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise InvalidArgument(f"dissimilarity must be a square matrix, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise InvalidData("dissimilarity contains non-finite entries")
    if not np.array_equal(d, d.T):
        raise InvalidArgument("dissimilarity must be symmetric")
    n = d.shape[0]

    edge_list = sorted(combinations(range(n), 2), key=lambda e: (d[e], e))
    edge_value = np.array([d[e] for e in edge_list])
    edge_index = {e: k for k, e in enumerate(edge_list)}

    triangles = sorted(
        combinations(range(n), 3),
        key=lambda t: (max(d[t[0], t[1]], d[t[0], t[2]], d[t[1], t[2]]), t),
    )

    # Column reduction over Z/2 with columns kept as bitmasks over edge
    # rows; only the triangle boundaries matter for H1.
    low_owner: dict[int, int] = {}
    reduced: list[int] = []
    points = []
    for (i, j, k) in triangles:
        value = max(d[i, j], d[i, k], d[j, k])
        col = (1 << edge_index[(i, j)]) | (1 << edge_index[(i, k)]) | (1 << edge_index[(j, k)])
        while col:
            lw = col.bit_length() - 1
            owner = low_owner.get(lw)
            if owner is None:
                break
            col ^= reduced[owner]
        if col:
            lw = col.bit_length() - 1
            low_owner[lw] = len(reduced)
            reduced.append(col)
            birth = edge_value[lw]
            if value > birth:
                points.append((birth, value))

    points.sort()
    return PersistenceDiagram(np.asarray(points, dtype=np.float64).reshape(-1, 2))


def save_vector_csv(v: PersistenceVector, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for value in v.deaths:
            fh.write(repr(float(value)) + "\n")


def load_vector_csv(path) -> PersistenceVector:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                values.append(float(line))
    return PersistenceVector(np.sort(np.asarray(values, dtype=np.float64)))


def save_diagram_csv(dgm: PersistenceDiagram, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for birth, death in dgm.points:
            fh.write(f"{float(birth)!r},{float(death)!r}\n")


def load_diagram_csv(path) -> PersistenceDiagram:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                birth, death = line.split(",")
                rows.append((float(birth), float(death)))
    rows.sort()
    return PersistenceDiagram(np.asarray(rows, dtype=np.float64).reshape(-1, 2))
