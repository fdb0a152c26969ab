"""Per-layer forward timings for the three layer kinds on sparse random graphs."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from .batch import GraphBatch
from .graph import Graph
from .layers import (
    DefaultSmpParams,
    FastSmpParams,
    MpnnLayerParams,
    mpnn_layer,
    smp_default_layer,
    smp_fast_layer,
)
from .tensor import Tensor, no_grad

__all__ = ["BenchRow", "bench", "scaling_exponent", "rows_to_csv", "fixed_degree_graph"]

BENCH_VARIANTS = ("mpnn", "smp-fast", "smp-default")


@dataclass(frozen=True)
class BenchRow:
    variant: str
    n: int
    m: int
    c: int
    median_us: float


def fixed_degree_graph(rng: np.random.Generator, n: int, degree: float) -> Graph:
    """Uniform random graph with exactly ``round(n * degree / 2)`` edges."""
    pairs = np.array([(i, j) for i in range(n) for j in range(i + 1, n)])
    m = min(len(pairs), int(round(n * degree / 2)))
    pick = rng.choice(len(pairs), size=m, replace=False)
    return Graph(n, tuple(map(tuple, pairs[np.sort(pick)].tolist())))


def _layer_call(variant: str, g: Graph, c: int, rng: np.random.Generator):
    batch = GraphBatch([g])
    # warm the cached sparse operators so they are not timed
    batch.adjacency, batch.gather_dst, batch.gather_src, batch.scatter_dst, batch.owner_mask
    if variant == "mpnn":
        p = MpnnLayerParams.init(rng, c, c)
        x = Tensor(rng.uniform(-1, 1, (1, g.n, c)))
        return lambda: mpnn_layer(x, batch, p)
    u = Tensor(rng.uniform(-1, 1, (1, g.n, g.n, c)))
    if variant == "smp-fast":
        p = FastSmpParams.init(rng, c, c)
        return lambda: smp_fast_layer(u, batch, p)
    p = DefaultSmpParams.init(rng, c, c)
    return lambda: smp_default_layer(u, batch, p)


def bench(sizes=(16, 32, 64), degrees=(4.0,), width: int = 16, repeats: int = 25,
          seed: int = 0, variants=BENCH_VARIANTS) -> list[BenchRow]:
    """Median wall-clock of one forward layer call per (variant, n, degree)."""
    rng = np.random.default_rng(seed)
    rows = []
    for degree in degrees:
        for n in sizes:
            g = fixed_degree_graph(rng, n, degree)
            for variant in variants:
                call = _layer_call(variant, g, width, rng)
                times = []
                with no_grad():
                    for _ in range(3):
                        call()
                    for _ in range(repeats):
                        t = time.perf_counter()
                        call()
                        times.append(time.perf_counter() - t)
                rows.append(BenchRow(variant, n, g.m, width, float(np.median(times)) * 1e6))
    return rows


def scaling_exponent(rows: list[BenchRow], variant: str = "smp-fast") -> float:
    """Least-squares slope of log(time) against log(n) for one variant."""
    sel = [r for r in rows if r.variant == variant]
    if len({r.n for r in sel}) < 2:
        raise ValueError("need at least two sizes to fit an exponent")
    x = np.log([r.n for r in sel])
    y = np.log([r.median_us for r in sel])
    return float(np.polyfit(x, y, 1)[0])


def rows_to_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["variant", "n", "m", "c", "median_us"])
    for r in rows:
        w.writerow([r.variant, r.n, r.m, r.c, f"{r.median_us:.1f}"])
    return buf.getvalue()
