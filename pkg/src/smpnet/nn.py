"""Parameter containers and small perceptrons built on :mod:`smpnet.tensor`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .tensor import Tensor, relu

__all__ = ["Mlp", "glorot", "init_mlp", "mlp_forward", "linear_layer"]


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, name: str | None = None) -> Tensor:
    """Uniform Glorot weight matrix of shape (fan_in, fan_out)."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return Tensor(rng.uniform(-bound, bound, size=(fan_in, fan_out)), requires_grad=True, name=name)


@dataclass
class Mlp:
    """Weights and biases of a perceptron; ReLU between layers, identity at the end."""

    weights: list[Tensor]
    biases: list[Tensor]

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise DimensionError("an MLP needs one bias per weight matrix and at least one layer")
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise DimensionError(f"layer {k}: weight {w.shape} with bias {b.shape}")
            if k and self.weights[k - 1].shape[1] != w.shape[0]:
                raise DimensionError(
                    f"layer {k}: input width {w.shape[0]} != previous output {self.weights[k - 1].shape[1]}"
                )

    @property
    def d_in(self) -> int:
        return self.weights[0].shape[0]

    @property
    def d_out(self) -> int:
        return self.weights[-1].shape[1]

    def parameters(self) -> list[Tensor]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def __call__(self, x: Tensor) -> Tensor:
        return mlp_forward(x, self)

    @classmethod
    def from_arrays(cls, layers, requires_grad: bool = True) -> "Mlp":
        """Build from ``[(W, b), ...]`` numpy pairs."""
        return cls(
            [Tensor(np.array(w, dtype=np.float64, ndmin=2), requires_grad=requires_grad) for w, _ in layers],
            [Tensor(np.array(b, dtype=np.float64, ndmin=1), requires_grad=requires_grad) for _, b in layers],
        )


def init_mlp(rng: np.random.Generator, sizes: list[int], name: str = "mlp") -> Mlp:
    """Glorot weights and zero biases for consecutive ``sizes``."""
    ws, bs = [], []
    for k, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
        ws.append(glorot(rng, a, b, name=f"{name}.w{k}"))
        bs.append(Tensor(np.zeros(b), requires_grad=True, name=f"{name}.b{k}"))
    return Mlp(ws, bs)


def linear_layer(rng: np.random.Generator, d_in: int, d_out: int, name: str = "linear") -> Mlp:
    return init_mlp(rng, [d_in, d_out], name=name)


def mlp_forward(x: Tensor, p: Mlp) -> Tensor:
    """Apply ``p`` to every row (last axis) of ``x``."""
    if x.ndim < 1 or x.shape[-1] != p.d_in:
        raise DimensionError(f"mlp: input {x.shape} does not fit first layer {p.weights[0].shape}")
    last = len(p.weights) - 1
    for k, (w, b) in enumerate(zip(p.weights, p.biases)):
        x = x @ w + b
        if k < last:
            x = relu(x)
    return x
