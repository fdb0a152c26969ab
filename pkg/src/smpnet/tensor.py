"""Dense float64 arrays with reverse-mode automatic differentiation.

Every operation returns a new :class:`Tensor`. When at least one input
requires a gradient, the result keeps a reference to its parents and a
closure that maps the output gradient to parent gradients. Calling
:meth:`Tensor.backward` on a scalar walks that record once in reverse
topological order and accumulates ``.grad`` on the leaves.

Shapes are strict: apart from adding a bias vector along the last axis
(the ``1 b^T`` pattern), operands must match exactly. Other broadcasts go
through :meth:`Tensor.expand`.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, DimensionError

__all__ = [
    "Tensor",
    "as_tensor",
    "concat",
    "spmm",
    "bce_with_logits",
    "mse",
    "no_grad",
    "power",
    "relu",
    "sigmoid",
]

_BackwardFn = Callable[[np.ndarray], Sequence["np.ndarray | None"]]


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")

    def __init__(
        self,
        data,
        requires_grad: bool = False,
        name: str | None = None,
        _parents: tuple["Tensor", ...] = (),
        _backward: _BackwardFn | None = None,
    ):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = _parents
        self._backward = _backward

    # ------------------------------------------------------------------ basics
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag}, requires_grad={self.requires_grad})"

    # ---------------------------------------------------------------- backprop
    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into ``leaf.grad`` for every reachable leaf."""
        if self.data.size != 1 or self.data.ndim != 0:
            raise ContractError(f"backward needs a scalar loss, got shape {self.shape}")
        if not self.requires_grad:
            return
        order = _topological_order(self)
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node._backward is None:
                node.grad = g.copy() if node.grad is None else node.grad + g
                continue
            for parent, pg in zip(node._parents, node._backward(g)):
                if pg is None or not parent.requires_grad:
                    continue
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + pg
                else:
                    grads[key] = pg

    # -------------------------------------------------------------- operators
    def __add__(self, other) -> "Tensor":
        return add(self, other)

    def __radd__(self, other) -> "Tensor":
        return add(self, other)

    def __sub__(self, other) -> "Tensor":
        return add(self, -other if not isinstance(other, Tensor) else neg(other))

    def __rsub__(self, other) -> "Tensor":
        return add(neg(self), other)

    def __neg__(self) -> "Tensor":
        return neg(self)

    def __mul__(self, other) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other) -> "Tensor":
        return mul(self, other)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else np.prod(
            [self.shape[a] for a in np.atleast_1d(axis)]
        )
        return tsum(self, axis, keepdims) * (1.0 / count)

    def max(self, axis: int) -> "Tensor":
        return tmax(self, axis)

    def relu(self) -> "Tensor":
        return relu(self)

    def reshape(self, *shape) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def expand(self, shape: Sequence[int]) -> "Tensor":
        return expand(self, tuple(shape))


def _topological_order(root: Tensor) -> list[Tensor]:
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in seen:
                stack.append((p, False))
    return order


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


_RECORDING = True


@contextmanager
def no_grad():
    """Within the block, results never record their parents (inference mode)."""
    global _RECORDING
    prev, _RECORDING = _RECORDING, False
    try:
        yield
    finally:
        _RECORDING = prev


def _result(data: np.ndarray, parents: tuple[Tensor, ...], backward: _BackwardFn) -> Tensor:
    if _RECORDING and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, _parents=parents, _backward=backward)
    return Tensor(data)


# ---------------------------------------------------------------- elementwise
def add(a: Tensor, b) -> Tensor:
    """``a + b`` for equal shapes, a trailing bias vector, or a python scalar."""
    if not isinstance(b, Tensor):
        if np.ndim(b) != 0:
            b = Tensor(b)
        else:
            s = float(b)
            return _result(a.data + s, (a,), lambda g: (g,))
    if a.shape == b.shape:
        return _result(a.data + b.data, (a, b), lambda g: (g, g))
    if b.ndim == 1 and a.ndim >= 1 and a.shape[-1] == b.shape[0]:
        lead = tuple(range(a.ndim - 1))
        return _result(a.data + b.data, (a, b), lambda g: (g, g.sum(axis=lead)))
    if a.ndim == 1 and b.ndim >= 1 and b.shape[-1] == a.shape[0]:
        return add(b, a)
    raise DimensionError(f"add: shapes {a.shape} and {b.shape} do not match")


def neg(a: Tensor) -> Tensor:
    return _result(-a.data, (a,), lambda g: (-g,))


def mul(a: Tensor, b) -> Tensor:
    """Elementwise product. ``b`` may be a same-shape tensor/array or a scalar."""
    if not isinstance(b, Tensor):
        if np.ndim(b) == 0:
            s = float(b)
            return _result(a.data * s, (a,), lambda g: (g * s,))
        b = Tensor(b)
    if a.shape != b.shape:
        raise DimensionError(f"mul: shapes {a.shape} and {b.shape} do not match")
    ad, bd = a.data, b.data
    return _result(ad * bd, (a, b), lambda g: (g * bd, g * ad))


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    return _result(np.where(mask, a.data, 0.0), (a,), lambda g: (g * mask,))


def power(a: Tensor, exponent: float) -> Tensor:
    """Elementwise ``a ** exponent`` for positive ``a`` (or integer exponents)."""
    e = float(exponent)
    out = a.data**e
    return _result(out, (a,), lambda g: (g * e * a.data ** (e - 1.0),))


def sigmoid(a: Tensor) -> Tensor:
    s = _stable_sigmoid(a.data)
    return _result(s, (a,), lambda g: (g * s * (1.0 - s),))


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -x))


# -------------------------------------------------------------- linear algebra
def matmul(x: Tensor, w: Tensor) -> Tensor:
    """Contract the last axis of ``x`` (..., k) with a weight matrix (k, m)."""
    if w.ndim != 2 or x.ndim < 1 or x.shape[-1] != w.shape[0]:
        raise DimensionError(f"matmul: cannot multiply {x.shape} by {w.shape}")
    xd, wd = x.data, w.data
    k, m = wd.shape

    def backward(g: np.ndarray):
        gx = g @ wd.T if x.requires_grad else None
        gw = xd.reshape(-1, k).T @ g.reshape(-1, m) if w.requires_grad else None
        return gx, gw

    return _result(xd @ wd, (x, w), backward)


def spmm(s: sp.csr_matrix, x: Tensor) -> Tensor:
    """Sparse (p, q) matrix times dense ``x`` of shape (q, ...)."""
    if x.ndim < 1 or s.shape[1] != x.shape[0]:
        raise DimensionError(f"spmm: cannot multiply {s.shape} by {x.shape}")
    rest = x.shape[1:]
    width = int(np.prod(rest, dtype=np.int64))
    out = np.asarray(s @ x.data.reshape(x.shape[0], width)).reshape((s.shape[0],) + rest)

    def backward(g: np.ndarray):
        return (np.asarray(s.T @ g.reshape(g.shape[0], width)).reshape(x.shape),)

    return _result(out, (x,), backward)


# ------------------------------------------------------------------ reductions
def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = a.data.sum(axis=axis, keepdims=keepdims)
    shape = a.shape

    def backward(g: np.ndarray):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return _result(out, (a,), backward)


def tmax(a: Tensor, axis: int) -> Tensor:
    """Maximum along one axis; the gradient flows to the first maximal entry."""
    idx = np.argmax(a.data, axis=axis)
    out = np.take_along_axis(a.data, np.expand_dims(idx, axis), axis=axis)
    shape = a.shape

    def backward(g: np.ndarray):
        full = np.zeros(shape)
        np.put_along_axis(full, np.expand_dims(idx, axis), np.expand_dims(g, axis), axis=axis)
        return (full,)

    return _result(np.squeeze(out, axis=axis), (a,), backward)


# --------------------------------------------------------------------- shaping
def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    src = a.shape
    return _result(a.data.reshape(shape), (a,), lambda g: (g.reshape(src),))


def expand(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    """Explicit numpy-style broadcast of ``a`` to ``shape``."""
    if a.ndim != len(shape):
        raise DimensionError(f"expand: rank mismatch {a.shape} -> {shape}")
    for have, want in zip(a.shape, shape):
        if have != want and have != 1:
            raise DimensionError(f"expand: cannot broadcast {a.shape} -> {shape}")
    axes = tuple(i for i, (h, w) in enumerate(zip(a.shape, shape)) if h != w)
    out = np.broadcast_to(a.data, shape)

    def backward(g: np.ndarray):
        return (g.sum(axis=axes, keepdims=True),)

    return _result(out, (a,), backward)


def concat(tensors: Iterable[Tensor], axis: int = -1) -> Tensor:
    tensors = tuple(tensors)
    ax = axis % tensors[0].ndim
    for t in tensors[1:]:
        if t.ndim != tensors[0].ndim or any(
            t.shape[d] != tensors[0].shape[d] for d in range(t.ndim) if d != ax
        ):
            raise DimensionError(f"concat: shapes {[t.shape for t in tensors]} on axis {axis}")
    sizes = np.cumsum([t.shape[ax] for t in tensors])[:-1]
    out = np.concatenate([t.data for t in tensors], axis=ax)

    def backward(g: np.ndarray):
        return tuple(np.split(g, sizes, axis=ax))

    return _result(out, tensors, backward)


# ---------------------------------------------------------------------- losses
def bce_with_logits(logits: Tensor, targets) -> Tensor:
    """Mean binary cross-entropy computed from raw logits."""
    t = np.asarray(targets, dtype=np.float64)
    if t.shape != logits.shape:
        raise DimensionError(f"bce: logits {logits.shape} vs targets {t.shape}")
    z = logits.data
    loss = np.mean(np.logaddexp(0.0, z) - t * z)
    scale = 1.0 / z.size

    def backward(g: np.ndarray):
        return ((_stable_sigmoid(z) - t) * (g * scale),)

    return _result(np.asarray(loss), (logits,), backward)


def mse(pred: Tensor, targets) -> Tensor:
    """Mean squared error over all entries."""
    t = np.asarray(targets, dtype=np.float64)
    if t.shape != pred.shape:
        raise DimensionError(f"mse: prediction {pred.shape} vs targets {t.shape}")
    diff = pred.data - t
    scale = 2.0 / diff.size
    return _result(np.asarray(np.mean(diff * diff)), (pred,), lambda g: (diff * (g * scale),))
