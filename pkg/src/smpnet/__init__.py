"""Structural message-passing graph networks on a small numpy autodiff engine."""

from .graph import Graph, Permutation, apply_permutation
from .tensor import Tensor

__version__ = "0.1.0"

__all__ = ["Graph", "Permutation", "Tensor", "apply_permutation", "__version__"]
