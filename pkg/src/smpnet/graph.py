"""Undirected simple graphs, node permutations and their JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ContractError, DimensionError

__all__ = [
    "Graph",
    "Permutation",
    "apply_permutation",
    "cycle_graph",
    "path_graph",
    "complete_graph",
    "disjoint_union",
    "graph_from_adjacency",
]


def _canonical_edges(n: int, edges) -> tuple[tuple[int, int], ...]:
    out = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < n and 0 <= j < n):
            raise ContractError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise ContractError(f"self-loop at node {i}")
        out.add((min(i, j), max(i, j)))
    return tuple(sorted(out))


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph.

    ``edges`` is normalised to sorted, deduplicated pairs with ``i < j``.
    ``x`` is an optional (n, c_X) node feature matrix and ``y`` an optional
    mapping from canonical edge to a length-c_Y feature vector.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()
    x: np.ndarray | None = None
    y: dict[tuple[int, int], np.ndarray] | None = None
    _adj: np.ndarray | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ContractError("n must be non-negative")
        object.__setattr__(self, "edges", _canonical_edges(self.n, self.edges))
        if self.x is not None:
            x = np.asarray(self.x, dtype=np.float64)
            if x.ndim == 1:
                x = x[:, None]
            if x.shape[0] != self.n:
                raise DimensionError(f"node features have {x.shape[0]} rows for n={self.n}")
            object.__setattr__(self, "x", x)
        if self.y is not None:
            y = {}
            for (i, j), v in self.y.items():
                key = (min(i, j), max(i, j))
                y[key] = np.asarray(v, dtype=np.float64).reshape(-1)
            if set(y) != set(self.edges):
                raise ContractError("edge features must be given for exactly the graph's edges")
            object.__setattr__(self, "y", y)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        if self.n != other.n or self.edges != other.edges:
            return False
        if (self.x is None) != (other.x is None) or (self.y is None) != (other.y is None):
            return False
        if self.x is not None and not np.array_equal(self.x, other.x):
            return False
        if self.y is not None:
            return all(np.array_equal(self.y[e], other.y[e]) for e in self.edges)
        return True

    __hash__ = None

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def c_x(self) -> int:
        return 0 if self.x is None else self.x.shape[1]

    @property
    def c_y(self) -> int:
        if not self.y:
            return 0
        return len(next(iter(self.y.values())))

    def adjacency(self) -> np.ndarray:
        if self._adj is None:
            a = np.zeros((self.n, self.n), dtype=np.int64)
            if self.edges:
                e = np.asarray(self.edges)
                a[e[:, 0], e[:, 1]] = 1
                a[e[:, 1], e[:, 0]] = 1
            a.setflags(write=False)
            object.__setattr__(self, "_adj", a)
        return self._adj

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    @property
    def d_max(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    @property
    def d_avg(self) -> float:
        return 2.0 * self.m / self.n if self.n else 0.0

    def neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            nbrs[i].append(j)
            nbrs[j].append(i)
        for lst in nbrs:
            lst.sort()
        return nbrs

    def edge_feature_tensor(self) -> np.ndarray | None:
        """Dense (n, n, c_Y) tensor Y, symmetric in its first two axes."""
        if self.y is None:
            return None
        out = np.zeros((self.n, self.n, self.c_y))
        for (i, j), v in self.y.items():
            out[i, j] = v
            out[j, i] = v
        return out

    # ------------------------------------------------------------------ json
    def to_record(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "edges": [list(e) for e in self.edges],
            "x": None if self.x is None else self.x.tolist(),
            "y": None if self.y is None else [[i, j, self.y[(i, j)].tolist()] for i, j in self.edges],
        }

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "Graph":
        n = int(rec["n"])
        edges = rec["edges"]
        x = rec.get("x")
        y = rec.get("y")
        return cls(
            n,
            tuple(tuple(e) for e in edges),
            None if x is None else np.asarray(x, dtype=np.float64).reshape(n, -1),
            None if y is None else {(int(i), int(j)): v for i, j, v in y},
        )


def graph_from_adjacency(a: np.ndarray, x=None) -> Graph:
    a = np.asarray(a)
    i, j = np.nonzero(np.triu(a, 1))
    return Graph(a.shape[0], tuple(zip(i.tolist(), j.tolist())), x)


def cycle_graph(n: int) -> Graph:
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n: int) -> Graph:
    return Graph(n, tuple((i, i + 1) for i in range(n - 1)))


def complete_graph(n: int) -> Graph:
    return Graph(n, tuple((i, j) for i in range(n) for j in range(i + 1, n)))


def disjoint_union(*graphs: Graph) -> Graph:
    edges, offset = [], 0
    for g in graphs:
        edges += [(i + offset, j + offset) for i, j in g.edges]
        offset += g.n
    return Graph(offset, tuple(edges))


# ---------------------------------------------------------------- permutations
@dataclass(frozen=True, eq=False)
class Permutation:
    """Bijection ``i -> mapping[i]`` on ``range(n)``."""

    mapping: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.mapping, dtype=np.int64)
        if m.ndim != 1 or not np.array_equal(np.sort(m), np.arange(m.size)):
            raise ContractError(f"not a permutation: {m.tolist()}")
        m.setflags(write=False)
        object.__setattr__(self, "mapping", m)

    @property
    def n(self) -> int:
        return self.mapping.size

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, first: "Permutation") -> "Permutation":
        """``self o first``: apply ``first``, then ``self``."""
        if first.n != self.n:
            raise DimensionError(f"cannot compose permutations of sizes {self.n} and {first.n}")
        return Permutation(self.mapping[first.mapping])

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and np.array_equal(self.mapping, other.mapping)

    __hash__ = None


def apply_permutation(perm: Permutation, obj, node_axes: int | None = None):
    """Relabel nodes: the entry indexed by node ``i`` moves to ``perm(i)``.

    Arrays are permuted along their leading node axes: one for (n, c)
    vectors, two for (n, n) matrices and (n, n, c) tensors. Pass
    ``node_axes`` to override the default (2 for ndim >= 2 square in the
    first two axes, else 1). Graphs have their edges, node features and edge
    features relabelled.
    """
    if isinstance(obj, Graph):
        if obj.n != perm.n:
            raise DimensionError(f"permutation of size {perm.n} on graph with n={obj.n}")
        m = perm.mapping
        edges = tuple((int(m[i]), int(m[j])) for i, j in obj.edges)
        x = None if obj.x is None else apply_permutation(perm, obj.x, node_axes=1)
        y = None if obj.y is None else {(int(m[i]), int(m[j])): v for (i, j), v in obj.y.items()}
        return Graph(obj.n, edges, x, y)
    arr = np.asarray(obj)
    if node_axes is None:
        node_axes = 2 if arr.ndim >= 2 and arr.shape[0] == arr.shape[1] == perm.n else 1
    for ax in range(node_axes):
        if arr.shape[ax] != perm.n:
            raise DimensionError(f"axis {ax} has length {arr.shape[ax]}, permutation has {perm.n}")
    inv = perm.inverse().mapping
    out = arr[inv]
    if node_axes == 2:
        out = out[:, inv]
    return out
