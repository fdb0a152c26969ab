"""Central finite differences against the autodiff gradient."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import GradCheckError
from .tensor import Tensor


def finite_difference_check(f: Callable[[], Tensor], params: list[Tensor], h: float = 1e-5) -> float:
    """Worst relative error between autodiff and central differences.

    ``f`` takes no arguments and closes over ``params``; each entry of each
    parameter is perturbed by ``+-h`` in place and restored afterwards. The
    relative error per entry uses ``max(|analytic|, |numeric|, 1e-8)`` as
    denominator.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    for p in params:
        p.grad = None
    loss = f()
    if not np.isfinite(loss.data).all():
        raise GradCheckError("f is not finite at the base point")
    loss.backward()
    worst = 0.0
    for p in params:
        analytic = np.zeros_like(p.data) if p.grad is None else p.grad
        flat = p.data.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + h
            up = f().item()
            flat[k] = orig - h
            down = f().item()
            flat[k] = orig
            if not (np.isfinite(up) and np.isfinite(down)):
                raise GradCheckError(f"f is not finite when perturbing {p.name or 'parameter'}[{k}]")
            numeric = (up - down) / (2.0 * h)
            a = analytic.reshape(-1)[k]
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, err)
    for p in params:
        p.grad = None
    return worst
