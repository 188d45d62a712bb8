"""Distances between consecutive topological summaries.

Five epoch-to-epoch distances are provided: the 1-Wasserstein distance on
persistence vectors (TOP), the p-Wasserstein and bottleneck distances on
diagrams (WD, BD), the heat-kernel-induced RKHS distance (HK), and the
sliced Wasserstein distance (SWK).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .connectome import Connectome
from .errors import InvalidArgument
from .topology import (
    PersistenceDiagram,
    PersistenceVector,
    pgh_persistence_vector,
    vr_h1_diagram,
)

DISTANCE_TAGS = ("top", "wd", "bd", "hk", "swk")


@dataclass(frozen=True)
class DistanceKind:
    """A distance tag plus the parameters that tag needs.

    wd uses the transport order ``p``; hk uses the bandwidth ``sigma``;
    swk uses ``n_dirs`` projection angles, order ``swk_p`` and, only for
    the exponentiated kernel form, the scale ``tau_swk``.
    """

    tag: str
    p: float = 2.0
    sigma: float = 0.1
    n_dirs: int = 50
    swk_p: float = 1.0
    tau_swk: float = 1.0

    def __post_init__(self):
        if self.tag not in DISTANCE_TAGS:
            raise InvalidArgument(f"unknown distance tag {self.tag!r}, expected one of {DISTANCE_TAGS}")
        if self.p < 1.0 or self.swk_p < 1.0:
            raise InvalidArgument("transport order p must be >= 1")
        if self.sigma <= 0.0:
            raise InvalidArgument("heat-kernel bandwidth sigma must be > 0")
        if self.n_dirs < 1:
            raise InvalidArgument("sliced Wasserstein needs at least one direction")
        if self.tau_swk <= 0.0:
            raise InvalidArgument("sliced Wasserstein kernel scale must be > 0")


def top_distance(u: PersistenceVector, v: PersistenceVector) -> float:
    """1-Wasserstein distance between sorted persistence vectors.

    The shorter vector is padded with zeros at the front, treating a
    missing cycle as one with persistence 0.
    """
    a, b = u.deaths, v.deaths
    if a.size < b.size:
        a = np.concatenate([np.zeros(b.size - a.size), a])
    elif b.size < a.size:
        b = np.concatenate([np.zeros(a.size - b.size), b])
    return float(np.abs(a - b).sum())


def _diagonal_gap(points: np.ndarray) -> np.ndarray:
    return (points[:, 1] - points[:, 0]) / 2.0


def wasserstein_distance(d1: PersistenceDiagram, d2: PersistenceDiagram, p: float = 2.0) -> float:
    """Exact p-Wasserstein distance via optimal assignment.

    Each diagram is augmented with diagonal slots for the other's points;
    unmatched points pay the l2 distance to their diagonal projection.
    """
    if p < 1.0:
        raise InvalidArgument("transport order p must be >= 1")
    pts1, pts2 = d1.points, d2.points
    n1, n2 = len(pts1), len(pts2)
    if n1 == 0 and n2 == 0:
        return 0.0
    size = n1 + n2
    cost = np.zeros((size, size))
    if n1 and n2:
        cost[:n1, :n2] = np.linalg.norm(pts1[:, None, :] - pts2[None, :, :], axis=2) ** p
    if n1:
        cost[:n1, n2:] = (_diagonal_gap(pts1) * math.sqrt(2.0))[:, None] ** p
    if n2:
        cost[n1:, :n2] = (_diagonal_gap(pts2) * math.sqrt(2.0))[None, :] ** p
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() ** (1.0 / p))


def _has_perfect_matching(adjacency: list) -> bool:
    """Kuhn's augmenting-path test on the left vertex set."""
    n_left = len(adjacency)
    n_right = n_left
    match_right = [-1] * n_right

    def augment(u: int, seen: list) -> bool:
        for v in adjacency[u]:
            if not seen[v]:
                seen[v] = True
                if match_right[v] < 0 or augment(match_right[v], seen):
                    match_right[v] = u
                    return True
        return False

    for u in range(n_left):
        if not augment(u, [False] * n_right):
            return False
    return True


def bottleneck_distance(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Smallest achievable worst-case matching cost (l-infinity geometry).

    Point-to-diagonal matches cost (death - birth) / 2. The optimum is
    always one of the finitely many pairwise costs, so a binary search
    over that candidate set with a bipartite feasibility check is exact.
    """
    pts1, pts2 = d1.points, d2.points
    n1, n2 = len(pts1), len(pts2)
    if n1 == 0 and n2 == 0:
        return 0.0

    diag1 = _diagonal_gap(pts1) if n1 else np.empty(0)
    diag2 = _diagonal_gap(pts2) if n2 else np.empty(0)
    if n1 and n2:
        cross = np.abs(pts1[:, None, :] - pts2[None, :, :]).max(axis=2)
    else:
        cross = np.empty((n1, n2))
    candidates = np.unique(np.concatenate([[0.0], cross.reshape(-1), diag1, diag2]))

    def feasible(r: float) -> bool:
        size = n1 + n2
        adjacency = []
        for i in range(n1):
            row = [j for j in range(n2) if cross[i, j] <= r]
            if diag1[i] <= r:
                row.extend(range(n2, size))
            adjacency.append(row)
        # Row n1+j is the diagonal partner of q_j: it may absorb q_j when
        # q_j can retreat to the diagonal, or pair with any diagonal slot.
        for j in range(n2):
            row = [j] if diag2[j] <= r else []
            row.extend(range(n2, size))
            adjacency.append(row)
        return _has_perfect_matching(adjacency)

    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(float(candidates[mid])):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def heat_kernel(d1: PersistenceDiagram, d2: PersistenceDiagram, sigma: float = 0.1) -> float:
    """Four-term Gaussian similarity with diagonal reflections.

    Empty diagrams give 0 (empty sum); the reflections suppress
    low-persistence points and make the kernel symmetric.
    """
    if sigma <= 0.0:
        raise InvalidArgument("heat-kernel bandwidth sigma must be > 0")
    p, q = d1.points, d2.points
    if len(p) == 0 or len(q) == 0:
        return 0.0
    p_ref = p[:, ::-1]
    q_ref = q[:, ::-1]

    def gauss(a, b):
        sq = ((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-sq / (8.0 * sigma))

    total = gauss(p, q) - gauss(p, q_ref) - gauss(p_ref, q) + gauss(p_ref, q_ref)
    return float(total.sum() / (8.0 * math.pi * sigma))


def heat_distance(d1: PersistenceDiagram, d2: PersistenceDiagram, sigma: float = 0.1) -> float:
    """RKHS distance induced by the heat kernel; the max guards rounding."""
    k11 = heat_kernel(d1, d1, sigma)
    k22 = heat_kernel(d2, d2, sigma)
    k12 = heat_kernel(d1, d2, sigma)
    return math.sqrt(max(0.0, k11 + k22 - 2.0 * k12))


def _angle_projections(points: np.ndarray, other: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Projections of a diagram augmented with the other's diagonal projections."""
    mids = other.sum(axis=1) / 2.0
    diag = np.stack([mids, mids], axis=1) if other.size else np.empty((0, 2))
    pool = np.concatenate([points.reshape(-1, 2), diag], axis=0)
    return np.sort(pool @ directions.T, axis=0)


def sliced_wasserstein_distance(
    d1: PersistenceDiagram, d2: PersistenceDiagram, n_dirs: int = 50, p: float = 1.0
) -> float:
    """Midpoint-rule slicing of the p-Wasserstein distance over angles.

    At each angle both diagrams are padded with the diagonal projections of
    the other's points so the sorted 1-d transport is a plain pairing.
    """
    if n_dirs < 1:
        raise InvalidArgument("sliced Wasserstein needs at least one direction")
    if p < 1.0:
        raise InvalidArgument("transport order p must be >= 1")
    pts1, pts2 = d1.points, d2.points
    if len(pts1) == 0 and len(pts2) == 0:
        return 0.0
    thetas = math.pi * (np.arange(n_dirs) + 0.5) / n_dirs
    directions = np.stack([np.cos(thetas), np.sin(thetas)], axis=1)
    proj1 = _angle_projections(pts1, pts2, directions)
    proj2 = _angle_projections(pts2, pts1, directions)
    per_angle = (np.abs(proj1 - proj2) ** p).sum(axis=0)
    return float(per_angle.mean() ** (1.0 / p))


def sliced_wasserstein_kernel(
    d1: PersistenceDiagram, d2: PersistenceDiagram, n_dirs: int = 50, p: float = 1.0, tau: float = 1.0
) -> float:
    """Gaussian kernel built on the sliced distance (optional form)."""
    if tau <= 0.0:
        raise InvalidArgument("kernel scale tau must be > 0")
    sw = sliced_wasserstein_distance(d1, d2, n_dirs=n_dirs, p=p)
    return math.exp(-(sw**p) / (2.0 * tau))


def summarize(kind: DistanceKind, m: Connectome):
    """Topological summary of a connectome for the given distance kind."""
    if kind.tag == "top":
        return pgh_persistence_vector(m)
    return vr_h1_diagram(m)


def epoch_distance(kind: DistanceKind, prev, cur) -> float:
    """Distance between consecutive summaries; the first epoch reports 0.

    ``prev`` may be None (no earlier summary yet), which by convention
    yields 0 so the signal series starts flat.
    """
    if prev is None:
        _check_summary(kind, cur)
        return 0.0
    _check_summary(kind, prev)
    _check_summary(kind, cur)
    if kind.tag == "top":
        return top_distance(prev, cur)
    if kind.tag == "wd":
        return wasserstein_distance(prev, cur, p=kind.p)
    if kind.tag == "bd":
        return bottleneck_distance(prev, cur)
    if kind.tag == "hk":
        return heat_distance(prev, cur, sigma=kind.sigma)
    return sliced_wasserstein_distance(prev, cur, n_dirs=kind.n_dirs, p=kind.swk_p)


def _check_summary(kind: DistanceKind, summary) -> None:
    if kind.tag == "top":
        if not isinstance(summary, PersistenceVector):
            raise InvalidArgument(f"distance {kind.tag!r} expects persistence vectors, got {type(summary).__name__}")
    elif not isinstance(summary, PersistenceDiagram):
        raise InvalidArgument(f"distance {kind.tag!r} expects persistence diagrams, got {type(summary).__name__}")
