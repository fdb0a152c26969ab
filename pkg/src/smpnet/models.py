"""Stacked networks with task heads: SMP (fast/default) and the MPNN baseline.

Every variant shares the same readout. After each message-passing layer a
per-layer extractor reads the current state; extractor outputs are summed
over layers and passed through a final MLP. MPNN node states are placed on
the context diagonal before extraction so the heads are literally the same
modules.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .batch import GraphBatch
from .errors import ConfigError
from .layers import (
    DefaultSmpParams,
    FastSmpParams,
    MpnnLayerParams,
    NodePoolParams,
    batch_context,
    diagonal_context,
    graph_extract,
    mpnn_layer,
    node_pool,
    rms_norm,
    smp_default_layer,
    smp_fast_layer,
)
from .nn import Mlp, init_mlp
from .tensor import Tensor, concat, relu

__all__ = ["ModelConfig", "Network", "VARIANTS", "TASK_OUTPUTS"]

VARIANTS = ("smp-fast", "smp-default", "mpnn")
# task -> (graph-level outputs, node-level outputs)
TASK_OUTPUTS = {"cycles": (1, 0), "multitask": (3, 3)}


@dataclass(frozen=True)
class ModelConfig:
    variant: str = "smp-fast"
    task: str = "cycles"
    layers: int = 8
    width: int = 16
    c_x: int = 0
    head_width: int = 16

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown model variant {self.variant!r}; choose from {VARIANTS}")
        if self.task not in TASK_OUTPUTS:
            raise ConfigError(f"unknown task {self.task!r}")
        if self.layers < 1 or self.width < 1 or self.head_width < 1:
            raise ConfigError("layers and widths must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


class Network:
    def __init__(self, cfg: ModelConfig, rng: np.random.Generator):
        self.cfg = cfg
        c_in, c, h = 1 + cfg.c_x, cfg.width, cfg.head_width
        n_graph, n_node = TASK_OUTPUTS[cfg.task]
        self.layers = []
        for k in range(cfg.layers):
            width_in = c_in if k == 0 else c
            name = f"layer{k}"
            if cfg.variant == "smp-fast":
                self.layers.append(FastSmpParams.init(rng, width_in, c, name))
            elif cfg.variant == "smp-default":
                self.layers.append(DefaultSmpParams.init(rng, width_in, c, name=name))
            else:
                self.layers.append(MpnnLayerParams.init(rng, width_in, c, name=name))
        self.gains = [Tensor(np.ones(c), requires_grad=True, name=f"norm{k}.gain") for k in range(cfg.layers)]
        self.graph_heads: list[Mlp] = [init_mlp(rng, [2 * c, h, h], f"extract{k}") for k in range(cfg.layers)]
        self.graph_out = init_mlp(rng, [h, h, n_graph], "graph_out")
        self.node_heads: list[NodePoolParams] = []
        self.node_out = None
        if n_node:
            self.node_heads = [NodePoolParams.init(rng, c, h, h, f"pool{k}") for k in range(cfg.layers)]
            self.node_out = init_mlp(rng, [h, h, n_node], "node_out")

    def parameters(self) -> list[Tensor]:
        params = []
        for p in self.layers:
            params += p.parameters()
        params += self.gains
        for m in self.graph_heads:
            params += m.parameters()
        params += self.graph_out.parameters()
        for p in self.node_heads:
            params += p.parameters()
        if self.node_out is not None:
            params += self.node_out.parameters()
        return params

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        return [(p.name or f"param{k}", p) for k, p in enumerate(self.parameters())]

    def states(self, batch: GraphBatch) -> list[Tensor]:
        """Per-layer states in context form (B, n, r, c)."""
        out = []
        if self.cfg.variant == "mpnn":
            x0 = np.ones((batch.size, batch.n, 1))
            feats = batch.node_features()
            if feats is not None:
                x0 = np.concatenate([x0, feats], axis=-1)
            x = Tensor(x0)
            for p, gain in zip(self.layers, self.gains):
                x = rms_norm(mpnn_layer(x, batch, p), gain)
                out.append(diagonal_context(batch, x))
            return out
        u = batch_context(batch)
        layer = smp_fast_layer if self.cfg.variant == "smp-fast" else smp_default_layer
        for p, gain in zip(self.layers, self.gains):
            u = rms_norm(layer(u, batch, p), gain)
            out.append(u)
        return out

    def forward(self, batch: GraphBatch) -> dict[str, Tensor]:
        """``{"graph": (B, n_graph)}`` plus ``"node": (B, n, n_node)`` for node tasks."""
        states = self.states(batch)
        g = None
        # 1/n keeps the trace and total sum O(n) rather than O(n^2) on large graphs
        inv_n = 1.0 / batch.n
        for u, head in zip(states, self.graph_heads):
            term = graph_extract(u * inv_n, batch, head)
            g = term if g is None else g + term
        result = {"graph": self.graph_out(relu(g))}
        if self.node_heads:
            v = None
            for u, head in zip(states, self.node_heads):
                term = node_pool(u, batch, head)
                v = term if v is None else v + term
            result["node"] = self.node_out(relu(v))
        return result
