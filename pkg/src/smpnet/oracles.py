"""Exact graph-theoretic quantities used as labels and as test oracles."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .graph import Graph

__all__ = [
    "bfs_distances",
    "all_pairs_shortest_paths",
    "MultitaskTargets",
    "multitask_targets",
    "spectral_radius",
    "enumerate_k_cycles",
    "count_k_cycles",
    "has_k_cycle",
    "receptive_field",
    "receptive_field_recursion",
    "trace_power",
    "is_connected",
]


def bfs_distances(g: Graph, source: int, nbrs: list[list[int]] | None = None) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes get the sentinel ``n``."""
    nbrs = g.neighbors() if nbrs is None else nbrs
    dist = np.full(g.n, g.n, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        du = dist[u] + 1
        for v in nbrs[u]:
            if dist[v] == g.n:
                dist[v] = du
                queue.append(v)
    return dist


def all_pairs_shortest_paths(g: Graph) -> np.ndarray:
    """(n, n) integer hop distances, ``n`` marking unreachable pairs."""
    nbrs = g.neighbors()
    out = np.empty((g.n, g.n), dtype=np.int64)
    for s in range(g.n):
        out[s] = bfs_distances(g, s, nbrs)
    return out


def is_connected(g: Graph) -> bool:
    return g.n == 0 or bool(np.all(bfs_distances(g, 0) < g.n))


# ----------------------------------------------------------------- spectral
def _dense_spectral_radius(a: np.ndarray) -> float:
    if a.shape[0] == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(a.astype(np.float64)))))


def _power_iteration(a: np.ndarray, rng: np.random.Generator, tol: float, max_iter: int):
    """Largest eigenvalue of a non-negative symmetric matrix, shifted by I.

    The shift makes the Perron eigenvalue strictly dominant in magnitude,
    so bipartite graphs (spectrum symmetric about 0) still converge.
    Returns (estimate, converged).
    """
    n = a.shape[0]
    if n == 0:
        return 0.0, True
    shifted = a.astype(np.float64) + np.eye(n)
    v = rng.uniform(0.5, 1.5, size=n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = shifted @ v
        lam = float(v @ w)
        if np.linalg.norm(w - lam * v) <= tol:
            return lam - 1.0, True
        v = w / np.linalg.norm(w)
    return lam - 1.0, False


def spectral_radius(
    g: Graph,
    method: str = "auto",
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> float:
    """Largest absolute adjacency eigenvalue.

    ``method`` is ``"power"``, ``"dense"`` or ``"auto"`` (power iteration,
    falling back to a dense symmetric eigensolve when it has not converged
    and ``n <= 64``).
    """
    a = g.adjacency()
    if method == "dense":
        return _dense_spectral_radius(a)
    lam, ok = _power_iteration(a, np.random.default_rng(seed), tol, max_iter)
    if method == "power" or ok:
        return lam
    if g.n <= 64:
        return _dense_spectral_radius(a)
    return lam


# ---------------------------------------------------------------- multitask
@dataclass(frozen=True)
class MultitaskTargets:
    dist: np.ndarray
    ecc: np.ndarray
    lap: np.ndarray
    connected: bool
    diameter: float
    radius: float

    NODE_KEYS = ("dist", "ecc", "lap")
    GRAPH_KEYS = ("connected", "diameter", "radius")

    def node_matrix(self) -> np.ndarray:
        return np.stack([self.dist, self.ecc, self.lap], axis=1).astype(np.float64)

    def graph_vector(self) -> np.ndarray:
        return np.array([float(self.connected), self.diameter, self.radius])

    def to_record(self) -> dict:
        return {
            "dist": self.dist.tolist(),
            "ecc": self.ecc.tolist(),
            "lap": self.lap.tolist(),
            "connected": self.connected,
            "diameter": self.diameter,
            "radius": self.radius,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "MultitaskTargets":
        return cls(
            np.asarray(rec["dist"], dtype=np.int64),
            np.asarray(rec["ecc"], dtype=np.int64),
            np.asarray(rec["lap"], dtype=np.float64),
            bool(rec["connected"]),
            float(rec["diameter"]),
            float(rec["radius"]),
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultitaskTargets)
            and np.array_equal(self.dist, other.dist)
            and np.array_equal(self.ecc, other.ecc)
            and np.array_equal(self.lap, other.lap)
            and self.connected == other.connected
            and self.diameter == other.diameter
            and self.radius == other.radius
        )


def multitask_targets(g: Graph, source: int, x: np.ndarray) -> MultitaskTargets:
    """Distance from ``source``, eccentricities, ``(D - A) x``, connectivity,
    diameter and spectral radius.

    Unreachable nodes keep the distance sentinel ``n``. Eccentricities are
    taken within each node's own component and the diameter is the largest
    eccentricity in the source's component, so disconnected graphs get
    finite values.
    """
    if not 0 <= source < g.n:
        raise ContractError(f"source {source} out of range for n={g.n}")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    d = all_pairs_shortest_paths(g)
    reach = d < g.n
    ecc = np.where(reach, d, 0).max(axis=1)
    a = g.adjacency()
    lap = g.degrees() * x - a @ x
    return MultitaskTargets(
        dist=d[source].copy(),
        ecc=ecc,
        lap=lap,
        connected=bool(reach[source].all()),
        diameter=float(ecc[reach[source]].max()),
        radius=spectral_radius(g),
    )


# ------------------------------------------------------------------- cycles
def _check_k(g: Graph, k: int) -> None:
    if not 3 <= k <= g.n:
        raise ValueError(f"cycle length k={k} must satisfy 3 <= k <= n={g.n}")


def enumerate_k_cycles(g: Graph, k: int) -> list[tuple[int, ...]]:
    """All simple k-cycles as canonical vertex tuples.

    The canonical form is the lexicographically least rotation/reflection:
    it starts at the smallest vertex and its second vertex is smaller than
    its last. The DFS only extends paths through vertices larger than the
    start, so each cycle is produced exactly twice (once per direction) and
    kept once.
    """
    _check_k(g, k)
    nbrs = g.neighbors()
    out: list[tuple[int, ...]] = []
    for s in range(g.n):
        path = [s]
        on_path = {s}

        def extend(u: int) -> None:
            if len(path) == k:
                if s in nbrs[u] and path[1] < path[-1]:
                    out.append(tuple(path))
                return
            for v in nbrs[u]:
                if v > s and v not in on_path:
                    path.append(v)
                    on_path.add(v)
                    extend(v)
                    path.pop()
                    on_path.discard(v)

        extend(s)
    return out


def count_k_cycles(g: Graph, k: int) -> int:
    """Number of simple cycles of length ``k``."""
    return len(enumerate_k_cycles(g, k))


def has_k_cycle(g: Graph, k: int) -> bool:
    _check_k(g, k)
    nbrs = g.neighbors()
    for s in range(g.n):
        stack = [(s, (s,))]
        while stack:
            u, path = stack.pop()
            if len(path) == k:
                if s in nbrs[u]:
                    return True
                continue
            for v in nbrs[u]:
                if v > s and v not in path:
                    stack.append((v, path + (v,)))
    return False


def trace_power(g: Graph, p: int) -> int:
    """``trace(A^p)`` by exact integer matrix products."""
    if p < 1:
        raise ValueError("p must be >= 1")
    a = [[int(v) for v in row] for row in g.adjacency()]
    n = g.n
    acc = a
    for _ in range(p - 1):
        acc = [[sum(acc[i][t] * a[t][j] for t in range(n) if acc[i][t]) for j in range(n)] for i in range(n)]
    return sum(acc[i][i] for i in range(n))


# ------------------------------------------------------------ receptive field
def receptive_field(g: Graph, i: int, l: int, dist: np.ndarray | None = None) -> np.ndarray:
    """Binary (n, n) adjacency of the edges node ``i`` sees after ``l`` layers.

    An edge (p, q) is kept when both endpoints are within ``l`` hops of
    ``i`` and ``d(i, p) + d(i, q) < 2 l``.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    d = bfs_distances(g, i) if dist is None else dist
    reach = d < g.n
    out = np.zeros((g.n, g.n), dtype=np.int64)
    for p, q in g.edges:
        if reach[p] and reach[q] and d[p] <= l and d[q] <= l and d[p] + d[q] < 2 * l:
            out[p, q] = out[q, p] = 1
    return out


def receptive_field_recursion(g: Graph, l: int) -> np.ndarray:
    """All receptive fields at depth ``l`` via element-wise max propagation.

    Starts from the star around each node and repeats
    ``U_i <- max(U_j for j in N_i + {i})``. Returns an (n, n, n) array whose
    slice ``[i]`` is node i's matrix.
    """
    if l < 1:
        raise ValueError("l must be >= 1")
    n = g.n
    a = g.adjacency()
    u = np.zeros((n, n, n), dtype=np.int64)
    for i in range(n):
        u[i, i, :] = a[i]
        u[i, :, i] = a[i]
    closed = a + np.eye(n, dtype=np.int64)
    for _ in range(l - 1):
        nxt = np.zeros_like(u)
        for i in range(n):
            nxt[i] = u[closed[i] > 0].max(axis=0)
        u = nxt
    return u
