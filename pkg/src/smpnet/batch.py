"""Stacking same-size graphs so one set of array ops serves a whole batch.

Local contexts of a batch have shape (B, n, r, c): B graphs, n nodes, r
context rows (n for one-hot identifiers, chi for colored ones) and c
channels. Neighbourhood sums, edge gathers and edge scatters are sparse
matrices over the B*n stacked nodes, so their cost is proportional to the
number of edges.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, DimensionError
from .graph import Graph

__all__ = ["GraphBatch"]


class GraphBatch:
    def __init__(self, graphs: list[Graph], colors: list[np.ndarray] | None = None):
        if not graphs:
            raise ContractError("empty batch")
        n = graphs[0].n
        if any(g.n != n for g in graphs):
            raise DimensionError("all graphs of a batch must have the same node count")
        self.graphs = list(graphs)
        self.size = len(graphs)
        self.n = n
        if colors is None:
            self.owner = np.tile(np.arange(n), (self.size, 1))
            self.rows = n
        else:
            owner = np.stack([np.asarray(c, dtype=np.int64) for c in colors])
            rows = {int(c.max()) + 1 if len(c) else 0 for c in owner}
            if len(rows) != 1:
                raise DimensionError("colored graphs of a batch must share their color count")
            self.owner = owner
            self.rows = rows.pop()

    # ------------------------------------------------------------- structure
    @cached_property
    def directed_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(dst, src) global node indices, one entry per edge direction."""
        dst, src = [], []
        for b, g in enumerate(self.graphs):
            if not g.edges:
                continue
            e = np.asarray(g.edges) + b * self.n
            dst += [e[:, 0], e[:, 1]]
            src += [e[:, 1], e[:, 0]]
        if not dst:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        return np.concatenate(dst), np.concatenate(src)

    @property
    def num_nodes(self) -> int:
        return self.size * self.n

    def _selector(self, idx: np.ndarray) -> sp.csr_matrix:
        k = idx.size
        return sp.csr_matrix((np.ones(k), (np.arange(k), idx)), shape=(k, self.num_nodes))

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Block-diagonal adjacency over the stacked nodes."""
        dst, src = self.directed_edges
        return sp.csr_matrix((np.ones(dst.size), (dst, src)), shape=(self.num_nodes, self.num_nodes))

    @cached_property
    def gather_dst(self) -> sp.csr_matrix:
        return self._selector(self.directed_edges[0])

    @cached_property
    def gather_src(self) -> sp.csr_matrix:
        return self._selector(self.directed_edges[1])

    @cached_property
    def scatter_dst(self) -> sp.csr_matrix:
        return self.gather_dst.T.tocsr()

    @cached_property
    def inv_davg(self) -> np.ndarray:
        """Per graph 1/d_avg, or 0 for edgeless graphs."""
        d = np.array([g.d_avg for g in self.graphs])
        return np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)

    def node_scale(self, trailing: tuple[int, ...]) -> np.ndarray:
        """1/d_avg per stacked node, broadcast to (B*n, *trailing)."""
        per_node = np.repeat(self.inv_davg, self.n)
        return np.broadcast_to(per_node.reshape((-1,) + (1,) * len(trailing)), (self.num_nodes,) + trailing)

    @cached_property
    def owner_mask(self) -> np.ndarray:
        """(B, n, r, 1) indicator of each node's own row in its context."""
        m = np.zeros((self.size, self.n, self.rows, 1))
        b, i = np.meshgrid(np.arange(self.size), np.arange(self.n), indexing="ij")
        m[b, i, self.owner, 0] = 1.0
        return m

    def edge_features(self) -> np.ndarray | None:
        """(E, c_Y) features in ``directed_edges`` order, or None."""
        if all(g.y is None for g in self.graphs):
            return None
        if any(g.y is None for g in self.graphs):
            raise ContractError("edge features missing on some graphs of the batch")
        feats = []
        for g in self.graphs:
            if g.m:
                f = np.stack([g.y[e] for e in g.edges])
                # directed_edges lists each graph's forward copies, then the reverse ones
                feats += [f, f]
        return np.concatenate(feats) if feats else np.zeros((0, self.graphs[0].c_y))

    def node_features(self) -> np.ndarray | None:
        if all(g.x is None for g in self.graphs):
            return None
        if any(g.x is None for g in self.graphs):
            raise ContractError("node features missing on some graphs of the batch")
        return np.stack([g.x for g in self.graphs])

    @property
    def c_x(self) -> int:
        return self.graphs[0].c_x
