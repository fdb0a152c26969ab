"""Structural message-passing layers, pooling heads and the MPNN baseline.

All layers act on a :class:`~smpnet.batch.GraphBatch`. Local contexts are
tensors of shape (B, n, r, c); slice ``[b, i]`` is the context matrix held
by node ``i`` of graph ``b`` and its row ``j`` is what node ``i`` knows
about node ``j``. MPNN node states are (B, n, c).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .batch import GraphBatch
from .errors import ContractError, DimensionError
from .graph import Graph
from .nn import Mlp, glorot, init_mlp
from .tensor import Tensor, concat, power, spmm

__all__ = [
    "EquivLinearParams",
    "FastSmpParams",
    "DefaultSmpParams",
    "MpnnLayerParams",
    "NodePoolParams",
    "init_local_context",
    "batch_context",
    "diagonal_context",
    "equivariant_linear",
    "equivariant_linear_single",
    "smp_fast_layer",
    "smp_fast_layer_per_edge",
    "smp_default_layer",
    "mpnn_layer",
    "sum_propagation_power",
    "node_pool",
    "graph_extract",
    "lift_mpnn_to_smp",
    "rms_norm",
]


# --------------------------------------------------------------------- params
@dataclass
class EquivLinearParams:
    w1: Tensor
    w2: Tensor
    w3: Tensor
    c: Tensor

    def __post_init__(self):
        shapes = {self.w1.shape, self.w2.shape, self.w3.shape}
        if len(shapes) != 1 or self.w1.ndim != 2 or self.c.shape != (self.w1.shape[1],):
            raise DimensionError(
                f"equivariant block: W1 {self.w1.shape}, W2 {self.w2.shape}, W3 {self.w3.shape}, c {self.c.shape}"
            )

    @property
    def c_in(self) -> int:
        return self.w1.shape[0]

    @property
    def c_out(self) -> int:
        return self.w1.shape[1]

    @classmethod
    def init(cls, rng: np.random.Generator, c_in: int, c_out: int, name: str = "equiv") -> "EquivLinearParams":
        return cls(
            glorot(rng, c_in, c_out, f"{name}.w1"),
            glorot(rng, c_in, c_out, f"{name}.w2"),
            glorot(rng, c_in, c_out, f"{name}.w3"),
            Tensor(np.zeros(c_out), requires_grad=True, name=f"{name}.c"),
        )

    @classmethod
    def from_arrays(cls, w1, w2, w3, c) -> "EquivLinearParams":
        return cls(*(Tensor(np.array(a, dtype=np.float64), requires_grad=True) for a in (w1, w2, w3, c)))

    def parameters(self) -> list[Tensor]:
        return [self.w1, self.w2, self.w3, self.c]


@dataclass
class FastSmpParams:
    equiv: EquivLinearParams
    w4: Tensor
    w5: Tensor

    def __post_init__(self):
        c = self.equiv.c_out
        if self.w4.shape != (c, c) or self.w5.shape != (c, c):
            raise DimensionError(f"W4 {self.w4.shape} and W5 {self.w5.shape} must be {c}x{c}")

    @classmethod
    def init(cls, rng: np.random.Generator, c_in: int, c_out: int, name: str = "fast") -> "FastSmpParams":
        return cls(
            EquivLinearParams.init(rng, c_in, c_out, f"{name}.equiv"),
            glorot(rng, c_out, c_out, f"{name}.w4"),
            glorot(rng, c_out, c_out, f"{name}.w5"),
        )

    def parameters(self) -> list[Tensor]:
        return self.equiv.parameters() + [self.w4, self.w5]


@dataclass
class DefaultSmpParams:
    """Equivariant block plus row-wise message and update perceptrons.

    ``diagonal_only`` zeroes every row except each node's own row after the
    update; the MPNN lifting relies on it.
    """

    equiv: EquivLinearParams
    message: Mlp
    update: Mlp
    c_y: int = 0
    diagonal_only: bool = False

    def __post_init__(self):
        c = self.equiv.c_out
        if self.message.d_in != 2 * c + self.c_y:
            raise DimensionError(f"message MLP input {self.message.d_in} != 2*{c} + {self.c_y}")
        if self.update.d_in != c + self.message.d_out:
            raise DimensionError(f"update MLP input {self.update.d_in} != {c} + {self.message.d_out}")

    @classmethod
    def init(cls, rng: np.random.Generator, c_in: int, c_out: int, c_y: int = 0,
             name: str = "default") -> "DefaultSmpParams":
        return cls(
            EquivLinearParams.init(rng, c_in, c_out, f"{name}.equiv"),
            init_mlp(rng, [2 * c_out + c_y, c_out, c_out], f"{name}.message"),
            init_mlp(rng, [2 * c_out, c_out, c_out], f"{name}.update"),
            c_y,
        )

    @property
    def c_out(self) -> int:
        return self.update.d_out

    def parameters(self) -> list[Tensor]:
        return self.equiv.parameters() + self.message.parameters() + self.update.parameters()


@dataclass
class MpnnLayerParams:
    message: Mlp
    update: Mlp
    c_y: int = 0

    def __post_init__(self):
        c = self.update.d_in - self.message.d_out
        if self.message.d_in != 2 * c + self.c_y:
            raise DimensionError(
                f"message MLP input {self.message.d_in} does not match node width {c} and edge width {self.c_y}"
            )

    @property
    def c_in(self) -> int:
        return self.update.d_in - self.message.d_out

    @property
    def c_out(self) -> int:
        return self.update.d_out

    @classmethod
    def init(cls, rng: np.random.Generator, c_in: int, c_out: int, c_y: int = 0,
             name: str = "mpnn") -> "MpnnLayerParams":
        return cls(
            init_mlp(rng, [2 * c_in + c_y, c_out, c_out], f"{name}.message"),
            init_mlp(rng, [c_in + c_out, c_out, c_out], f"{name}.update"),
            c_y,
        )

    def parameters(self) -> list[Tensor]:
        return self.message.parameters() + self.update.parameters()


@dataclass
class NodePoolParams:
    """Row-wise MLP followed by [mean, max, own row] pooling and a linear map."""

    mlp: Mlp
    out: Mlp

    def __post_init__(self):
        if self.out.d_in != 3 * self.mlp.d_out:
            raise DimensionError(f"output layer expects {self.out.d_in} inputs, pooling gives {3 * self.mlp.d_out}")

    @classmethod
    def init(cls, rng: np.random.Generator, c_in: int, c_hidden: int, c_out: int,
             name: str = "node_pool") -> "NodePoolParams":
        return cls(
            init_mlp(rng, [c_in, c_hidden, c_hidden], f"{name}.mlp"),
            init_mlp(rng, [3 * c_hidden, c_out], f"{name}.out"),
        )

    def parameters(self) -> list[Tensor]:
        return self.mlp.parameters() + self.out.parameters()


# ---------------------------------------------------------------- contexts
def init_local_context(g: Graph) -> np.ndarray:
    """(n, n, 1 + c_X) one-hot identifiers with node features on the diagonal."""
    u = np.zeros((g.n, g.n, 1 + g.c_x))
    idx = np.arange(g.n)
    u[idx, idx, 0] = 1.0
    if g.x is not None:
        u[idx, idx, 1:] = g.x
    return u


def batch_context(batch: GraphBatch) -> Tensor:
    """Initial (B, n, r, 1 + c_X) contexts; row ``owner[b, i]`` of node i holds [1, x_i]."""
    x = batch.node_features()
    c = 1 + (0 if x is None else x.shape[-1])
    u = np.zeros((batch.size, batch.n, batch.rows, c))
    b, i = np.meshgrid(np.arange(batch.size), np.arange(batch.n), indexing="ij")
    u[b, i, batch.owner, 0] = 1.0
    if x is not None:
        u[b, i, batch.owner, 1:] = x
    return Tensor(u)


def diagonal_context(batch: GraphBatch, x: np.ndarray | Tensor) -> Tensor:
    """Place node vectors (B, n, c) on each node's own row, zeros elsewhere."""
    x = x if isinstance(x, Tensor) else Tensor(x)
    full = (batch.size, batch.n, batch.rows, x.shape[-1])
    spread = x.reshape(batch.size, batch.n, 1, x.shape[-1]).expand(full)
    return spread * np.broadcast_to(batch.owner_mask, full)


# ------------------------------------------------------------ equivariant block
def equivariant_linear(u: Tensor, p: EquivLinearParams, owner_mask: np.ndarray, n: int) -> Tensor:
    """``U W1 + (1/n) 1 1^T U W2 + 1 c^T + (1/n) e_i 1^T U W3`` on every context.

    ``u`` is (..., r, c_in); ``owner_mask`` is (..., r, 1) with a single 1 per
    context at its owner's row; ``n`` is the graph's node count.
    """
    if u.shape[-1] != p.c_in:
        raise DimensionError(f"equivariant block expects {p.c_in} channels, got {u.shape}")
    col = u.sum(axis=-2, keepdims=True) * (1.0 / n)
    out_shape = u.shape[:-1] + (p.c_out,)
    spread = (col @ p.w2).expand(out_shape)
    own = (col @ p.w3).expand(out_shape) * np.broadcast_to(owner_mask, out_shape)
    return u @ p.w1 + spread + own + p.c


def equivariant_linear_single(u_i: np.ndarray | Tensor, i: int, p: EquivLinearParams) -> Tensor:
    """The block applied to one (n, c_in) context owned by node ``i``."""
    u_i = u_i if isinstance(u_i, Tensor) else Tensor(u_i)
    n = u_i.shape[0]
    mask = np.zeros((n, 1))
    mask[i] = 1.0
    return equivariant_linear(u_i, p, mask, n)


def _hat(u: Tensor, batch: GraphBatch, p: EquivLinearParams) -> Tensor:
    if u.shape[:3] != (batch.size, batch.n, batch.rows):
        raise DimensionError(f"context {u.shape} does not match batch ({batch.size}, {batch.n}, {batch.rows})")
    return equivariant_linear(u, p, batch.owner_mask, batch.n)


# ------------------------------------------------------------------ layers
def smp_fast_layer(u: Tensor, batch: GraphBatch, p: FastSmpParams) -> Tensor:
    """``U_i' = Uh_i + (sum_j Uh_j + (Uh_i W4) * sum_j Uh_j W5) / d_avg``.

    Both neighbour sums are one sparse product each, so every node computes
    its message once rather than once per edge.
    """
    uh = _hat(u, batch, p.equiv)
    b, n, r, c = uh.shape
    flat = uh.reshape(b * n, r, c)
    neigh = spmm(batch.adjacency, flat)
    neigh_w5 = spmm(batch.adjacency, flat @ p.w5)
    msg = (neigh + (flat @ p.w4) * neigh_w5) * batch.node_scale((r, c))
    return uh + msg.reshape(b, n, r, c)


def smp_fast_layer_per_edge(u: np.ndarray, g: Graph, p: FastSmpParams) -> np.ndarray:
    """Reference Fast layer for one graph that loops over edges explicitly."""
    n = g.n
    w4, w5 = p.w4.data, p.w5.data
    uh = np.stack([equivariant_linear_single(u[i], i, p.equiv).data for i in range(n)])
    out = uh.copy()
    if g.m == 0:
        return out
    for i, nbrs in enumerate(g.neighbors()):
        acc = np.zeros_like(uh[i])
        for j in nbrs:
            acc += uh[j] + (uh[i] @ w4) * (uh[j] @ w5)
        out[i] += acc / g.d_avg
    return out


def _message_passing(h: Tensor, batch: GraphBatch, message: Mlp, update: Mlp, c_y: int) -> Tensor:
    """Shared edge-wise step on stacked node states ``h`` of shape (B*n, ..., c)."""
    rest = h.shape[1:-1]
    hi = spmm(batch.gather_dst, h)
    hj = spmm(batch.gather_src, h)
    parts = [hi, hj]
    if c_y:
        # a batch without edges sends no messages, so features are moot
        y = batch.edge_features() if hi.shape[0] else np.zeros((0, c_y))
        if y is None or y.shape[-1] != c_y:
            raise DimensionError(f"layer expects {c_y} edge features per edge")
        y = y.reshape((y.shape[0],) + (1,) * len(rest) + (c_y,))
        parts.append(Tensor(np.broadcast_to(y, hi.shape[:-1] + (c_y,))))
    elif any(g.y for g in batch.graphs):
        raise ContractError("graph has edge features but the layer was built without them")
    msg = message(concat(parts, axis=-1))
    agg = spmm(batch.scatter_dst, msg)
    agg = agg * batch.node_scale(agg.shape[1:])
    return update(concat([h, agg], axis=-1))


def smp_default_layer(u: Tensor, batch: GraphBatch, p: DefaultSmpParams) -> Tensor:
    """Per-edge MLP messages on [Uh_i, Uh_j, y_ij], normalised sum, MLP update on [Uh_i, agg]."""
    uh = _hat(u, batch, p.equiv)
    b, n, r, c = uh.shape
    out = _message_passing(uh.reshape(b * n, r, c), batch, p.message, p.update, p.c_y)
    out = out.reshape(b, n, r, p.c_out)
    if p.diagonal_only:
        out = out * np.broadcast_to(batch.owner_mask, out.shape)
    return out


def mpnn_layer(x: Tensor, batch: GraphBatch, p: MpnnLayerParams) -> Tensor:
    """``x_i' = update([x_i, sum_j message([x_i, x_j, y_ij]) / d_avg])``."""
    b, n, c = x.shape
    if (b, n) != (batch.size, batch.n) or c != p.c_in:
        raise DimensionError(f"node states {x.shape} do not fit batch/layer width {p.c_in}")
    out = _message_passing(x.reshape(b * n, c), batch, p.message, p.update, p.c_y)
    return out.reshape(b, n, p.c_out)


def sum_propagation_power(g: Graph, l: int) -> np.ndarray:
    """Iterate ``U_i <- sum_{j in N_i} U_j`` from one-hot contexts; returns (n, n)."""
    if l < 1:
        raise ValueError("l must be >= 1")
    batch = GraphBatch([g])
    u = Tensor(np.eye(g.n).reshape(g.n, g.n, 1))
    for _ in range(l):
        u = spmm(batch.adjacency, u)
    return u.data[:, :, 0]


def rms_norm(h: Tensor, gain: Tensor, eps: float = 1e-6) -> Tensor:
    """Scale each graph's channels to unit root-mean-square, then by ``gain``.

    Statistics run over every axis between the batch axis and the channel
    axis (nodes, and context rows for SMP states), so they are permutation
    invariant and per graph; zero rows stay zero.
    """
    axes = tuple(range(1, h.ndim - 1))
    ms = (h * h).mean(axis=axes, keepdims=True)
    scale = power(ms + eps, -0.5).expand(h.shape)
    g = gain.reshape((1,) * (h.ndim - 1) + (gain.shape[0],)).expand(h.shape)
    return h * scale * g


# ------------------------------------------------------------------- heads
def node_pool(u: Tensor, batch: GraphBatch, p: NodePoolParams) -> Tensor:
    """(B, n, c_out) node features from [mean, max, own row] of a row-wise MLP."""
    h = p.mlp(u)
    own = (h * np.broadcast_to(batch.owner_mask, h.shape)).sum(axis=2)
    pooled = concat([h.mean(axis=2), h.max(axis=2), own], axis=-1)
    return p.out(pooled)


def graph_extract(u: Tensor, batch: GraphBatch, mlp: Mlp) -> Tensor:
    """(B, c_out) invariant features: MLP of [trace over node pairs, total sum]."""
    trace = (u * np.broadcast_to(batch.owner_mask, u.shape)).sum(axis=(1, 2))
    total = u.sum(axis=(1, 2))
    return mlp(concat([trace, total], axis=-1))


# ----------------------------------------------------------------- lifting
def lift_mpnn_to_smp(layers: list[MpnnLayerParams], n: int) -> list[DefaultSmpParams]:
    """Default-SMP layers that run the given MPNN on the context diagonal.

    Each layer broadcasts the owner row to all rows (``W2 = n I`` turns the
    1/n-normalised column sum back into a plain sum, which equals the owner
    row because all other rows are zero), applies the MPNN message and
    update row-wise, then keeps only the owner row. The construction is
    specific to graphs with ``n`` nodes.
    """
    out = []
    for k, p in enumerate(layers):
        if p.update.d_out != (layers[k + 1].c_in if k + 1 < len(layers) else p.update.d_out):
            raise DimensionError(f"MPNN layer {k} output does not feed layer {k + 1}")
        c = p.c_in
        zeros = np.zeros((c, c))
        equiv = EquivLinearParams.from_arrays(zeros, n * np.eye(c), zeros, np.zeros(c))
        out.append(DefaultSmpParams(equiv, p.message, p.update, p.c_y, diagonal_only=True))
    return out
