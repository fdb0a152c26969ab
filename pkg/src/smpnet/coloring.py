"""Compact identifiers: greedy coloring of the 2L-th graph power."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .graph import Graph
from .oracles import all_pairs_shortest_paths

__all__ = ["ColorAssignment", "color_nodes", "validate_coloring", "init_colored_context"]


@dataclass(frozen=True)
class ColorAssignment:
    colors: np.ndarray
    chi: int
    L: int


def color_nodes(g: Graph, L: int) -> ColorAssignment:
    """Greedy coloring where nodes within ``2 L`` hops never share a color.

    Nodes are visited in ascending index order and take the lowest color
    not used by an already-colored node within distance ``2 L``.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    if g.n == 0:
        return ColorAssignment(np.zeros(0, dtype=np.int64), 0, L)
    d = all_pairs_shortest_paths(g)
    close = (d <= 2 * L) & (d < g.n)
    np.fill_diagonal(close, False)
    colors = np.full(g.n, -1, dtype=np.int64)
    for i in range(g.n):
        used = set(colors[close[i]].tolist())
        c = 0
        while c in used:
            c += 1
        colors[i] = c
    return ColorAssignment(colors, int(colors.max()) + 1, L)


def validate_coloring(g: Graph, ca: ColorAssignment) -> None:
    """Raise ContractError unless ``ca`` satisfies the distance-2L rule."""
    colors = np.asarray(ca.colors)
    if colors.shape != (g.n,):
        raise ContractError(f"{colors.size} colors for {g.n} nodes")
    if g.n and (colors.min() < 0 or ca.chi != int(colors.max()) + 1 or ca.chi > g.n):
        raise ContractError(f"color count {ca.chi} inconsistent with colors {colors.tolist()}")
    d = all_pairs_shortest_paths(g)
    close = (d <= 2 * ca.L) & (d < g.n)
    np.fill_diagonal(close, False)
    clash = close & (colors[:, None] == colors[None, :])
    if clash.any():
        i, j = map(int, np.argwhere(clash)[0])
        raise ContractError(f"nodes {i} and {j} are {d[i, j]} hops apart but share color {colors[i]}")


def init_colored_context(g: Graph, ca: ColorAssignment) -> np.ndarray:
    """(n, chi, 1 + c_X) contexts; node i's own row is ``colors[i]``."""
    validate_coloring(g, ca)
    u = np.zeros((g.n, ca.chi, 1 + g.c_x))
    idx = np.arange(g.n)
    u[idx, ca.colors, 0] = 1.0
    if g.x is not None:
        u[idx, ca.colors, 1:] = g.x
    return u
