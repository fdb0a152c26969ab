"""Executable invariants: equivariance, oracle cross-checks, separation, gradients.

Every check runs with fixed seeds and returns a :class:`CheckResult`. The
permutation action used by the equivariance suite is injectable so that a
deliberately broken action can serve as a negative control.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Callable, Iterator

import networkx as nx
import numpy as np

from .batch import GraphBatch
from .coloring import ColorAssignment, color_nodes, init_colored_context, validate_coloring
from .errors import ContractError
from .gradcheck import finite_difference_check
from .graph import Graph, Permutation, apply_permutation, cycle_graph, disjoint_union
from .layers import (
    DefaultSmpParams,
    EquivLinearParams,
    FastSmpParams,
    MpnnLayerParams,
    NodePoolParams,
    batch_context,
    equivariant_linear,
    graph_extract,
    init_local_context,
    lift_mpnn_to_smp,
    mpnn_layer,
    node_pool,
    rms_norm,
    smp_default_layer,
    smp_fast_layer,
    smp_fast_layer_per_edge,
    sum_propagation_power,
)
from .models import ModelConfig, Network
from .nn import init_mlp
from .oracles import (
    count_k_cycles,
    receptive_field,
    receptive_field_recursion,
    spectral_radius,
    trace_power,
)
from .tensor import Tensor, bce_with_logits

__all__ = ["CheckResult", "SUITES", "run_suite", "random_graph", "format_result"]

Action = Callable[..., object]


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    value: float
    tolerance: float
    cases: int
    seconds: float = 0.0
    detail: str = ""


def format_result(r: CheckResult) -> str:
    status = "PASS" if r.passed else "FAIL"
    extra = f" ({r.detail})" if r.detail else ""
    return (f"{status} {r.suite}/{r.name}: worst {r.value:.3g} vs tol {r.tolerance:.0e} "
            f"over {r.cases} cases in {r.seconds:.1f}s{extra}")


# ------------------------------------------------------------------ helpers
def random_graph(rng: np.random.Generator, n: int, p: float | None = None,
                 c_x: int = 0, c_y: int = 0) -> Graph:
    p = float(rng.uniform(0.15, 0.6)) if p is None else p
    upper = np.triu(rng.random((n, n)) < p, 1)
    i, j = np.nonzero(upper)
    edges = tuple(zip(i.tolist(), j.tolist()))
    x = rng.uniform(-1, 1, (n, c_x)) if c_x else None
    y = {e: rng.uniform(-1, 1, c_y) for e in edges} if c_y else None
    return Graph(n, edges, x, y)


def _uniform_mlp(rng, sizes):
    mlp = init_mlp(rng, sizes)
    for w, b in zip(mlp.weights, mlp.biases):
        w.data = rng.uniform(-1, 1, w.shape)
        b.data = rng.uniform(-1, 1, b.shape)
    return mlp


def _rand_params(rng, obj):
    """Replace every parameter of ``obj`` by uniform [-1, 1] draws (biases included)."""
    for p in obj.parameters():
        p.data = rng.uniform(-1, 1, p.shape)
    return obj


def _timed(suite: str, name: str, tol: float, fn) -> CheckResult:
    t = time.perf_counter()
    worst, cases, detail = fn()
    worst = float(worst)
    return CheckResult(suite, name, bool(worst <= tol), worst, tol, cases, time.perf_counter() - t, detail)


# -------------------------------------------------------------- equivariance
EQUIV_TRIALS = 200
EQUIV_TOL = 1e-9


def _context_layer(kind: str, rng, g: Graph, c: int):
    """A function (n, n, c) array -> (n, n, c') array for one layer kind on ``g``."""
    if kind == "equivariant_linear":
        p = _rand_params(rng, EquivLinearParams.init(rng, c, c))
        return lambda u, b: equivariant_linear(Tensor(u[None]), p, b.owner_mask, b.n).data[0]
    if kind == "smp_fast_layer":
        p = _rand_params(rng, FastSmpParams.init(rng, c, c))
        return lambda u, b: smp_fast_layer(Tensor(u[None]), b, p).data[0]
    if kind == "smp_default_layer":
        p = _rand_params(rng, DefaultSmpParams.init(rng, c, c, c_y=g.c_y))
        return lambda u, b: smp_default_layer(Tensor(u[None]), b, p).data[0]
    if kind == "rms_norm":
        gain = Tensor(rng.uniform(-1, 1, c))
        return lambda u, b: rms_norm(Tensor(u[None]), gain).data[0]
    raise ValueError(kind)


CONTEXT_KINDS = ("equivariant_linear", "smp_fast_layer", "smp_default_layer", "rms_norm")


def _equivariance_contexts(kind: str, action: Action, seed: int):
    rng = np.random.default_rng([seed, 10, CONTEXT_KINDS.index(kind)])
    worst = 0.0
    for _ in range(EQUIV_TRIALS):
        n = int(rng.integers(4, 13))
        c = int(rng.integers(1, 5))
        c_y = int(rng.integers(1, 3)) if kind == "smp_default_layer" and rng.random() < 0.5 else 0
        g = random_graph(rng, n, c_y=c_y)
        f = _context_layer(kind, rng, g, c)
        perm = Permutation.random(n, rng)
        u = rng.uniform(-1, 1, (n, n, c))
        lhs = action(perm, f(u, GraphBatch([g])))
        rhs = f(action(perm, u), GraphBatch([action(perm, g)]))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst, EQUIV_TRIALS, ""


def _equivariance_mpnn(action: Action, seed: int):
    rng = np.random.default_rng([seed, 11])
    worst = 0.0
    for _ in range(EQUIV_TRIALS):
        n = int(rng.integers(4, 13))
        c = int(rng.integers(1, 5))
        c_y = int(rng.integers(0, 3))
        g = random_graph(rng, n, c_y=c_y)
        p = _rand_params(rng, MpnnLayerParams.init(rng, c, c, c_y=c_y))
        perm = Permutation.random(n, rng)
        x = rng.uniform(-1, 1, (n, c))
        out = mpnn_layer(Tensor(x[None]), GraphBatch([g]), p).data[0]
        lhs = action(perm, out, node_axes=1)
        rhs = mpnn_layer(Tensor(action(perm, x, node_axes=1)[None]), GraphBatch([action(perm, g)]), p).data[0]
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst, EQUIV_TRIALS, ""


def _equivariance_heads(action: Action, seed: int):
    rng = np.random.default_rng([seed, 12])
    worst = 0.0
    for _ in range(EQUIV_TRIALS):
        n = int(rng.integers(4, 13))
        c, h = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        g = random_graph(rng, n)
        pool = _rand_params(rng, NodePoolParams.init(rng, c, h, h))
        ext = _uniform_mlp(rng, [2 * c, h, h])
        perm = Permutation.random(n, rng)
        u = rng.uniform(-1, 1, (n, n, c))
        b, pb = GraphBatch([g]), GraphBatch([action(perm, g)])
        pu = Tensor(action(perm, u)[None])
        nodes = node_pool(Tensor(u[None]), b, pool).data[0]
        worst = max(worst, float(np.max(np.abs(action(perm, nodes, node_axes=1) - node_pool(pu, pb, pool).data[0]))))
        readout = graph_extract(Tensor(u[None]), b, ext).data
        worst = max(worst, float(np.max(np.abs(readout - graph_extract(pu, pb, ext).data))))
    return worst, EQUIV_TRIALS, "node_pool rows permute, graph_extract invariant"


def _equivariance_network(action: Action, seed: int):
    """Whole stacked networks: node outputs permute, graph outputs stay put."""
    rng = np.random.default_rng([seed, 13])
    worst = 0.0
    trials = 0
    for variant in ("smp-fast", "smp-default", "mpnn"):
        net = Network(ModelConfig(variant, "multitask", layers=3, width=6, c_x=2, head_width=6), rng)
        _rand_params(rng, net)
        for _ in range(EQUIV_TRIALS // 10):
            n = int(rng.integers(4, 13))
            g = random_graph(rng, n, c_x=2)
            perm = Permutation.random(n, rng)
            out = net.forward(GraphBatch([g]))
            pout = net.forward(GraphBatch([action(perm, g)]))
            node_err = np.abs(action(perm, out["node"].data[0], node_axes=1) - pout["node"].data[0])
            graph_err = np.abs(out["graph"].data - pout["graph"].data)
            worst = max(worst, float(node_err.max()), float(graph_err.max()))
            trials += 1
    return worst, trials, "three variants, multitask heads"


def _init_equivariance(action: Action, seed: int):
    rng = np.random.default_rng([seed, 14])
    worst = 0.0
    for _ in range(EQUIV_TRIALS):
        n = int(rng.integers(4, 13))
        g = random_graph(rng, n, c_x=int(rng.integers(0, 3)))
        perm = Permutation.random(n, rng)
        diff = action(perm, init_local_context(g)) - init_local_context(action(perm, g))
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst, EQUIV_TRIALS, ""


def equivariance_suite(action: Action = apply_permutation, seed: int = 0) -> Iterator[CheckResult]:
    for kind in CONTEXT_KINDS:
        yield _timed("equivariance", kind, EQUIV_TOL, lambda: _equivariance_contexts(kind, action, seed))
    yield _timed("equivariance", "mpnn_layer", EQUIV_TOL, lambda: _equivariance_mpnn(action, seed))
    yield _timed("equivariance", "pooling_heads", EQUIV_TOL, lambda: _equivariance_heads(action, seed))
    yield _timed("equivariance", "stacked_networks", EQUIV_TOL, lambda: _equivariance_network(action, seed))
    yield _timed("equivariance", "init_local_context", 0.0, lambda: _init_equivariance(action, seed))


# ------------------------------------------------------------------- oracles
def _powers_of_a(seed: int, trials: int = 500):
    rng = np.random.default_rng([seed, 21])
    mismatches = 0
    for _ in range(trials):
        g = random_graph(rng, int(rng.integers(1, 11)))
        a = g.adjacency()
        for l in range(1, 5):
            want = np.linalg.matrix_power(a, l)
            got = sum_propagation_power(g, l)
            if not np.array_equal(got, want.astype(np.float64)):
                mismatches += 1
    return mismatches, trials, "entries compared exactly against integer A^l, l = 1..4"


def small_connected_graphs(max_n: int = 6) -> list[Graph]:
    """Every connected graph on 1..max_n nodes, one per isomorphism class."""
    out = []
    for h in nx.graph_atlas_g():
        if 0 < h.number_of_nodes() <= max_n and nx.is_connected(h):
            out.append(Graph(h.number_of_nodes(), tuple(h.edges())))
    return out


def _receptive_fields(seed: int, trials: int = 1000):
    rng = np.random.default_rng([seed, 22])
    graphs = [random_graph(rng, int(rng.integers(1, 9))) for _ in range(trials)]
    atlas = small_connected_graphs(6)
    mismatches = 0
    for g in graphs + atlas:
        for l in range(1, 5):
            rec = receptive_field_recursion(g, l)
            for i in range(g.n):
                if not np.array_equal(rec[i], receptive_field(g, i, l)):
                    mismatches += 1
    return mismatches, len(graphs) + len(atlas), f"{trials} random graphs (n <= 8) + {len(atlas)} connected graphs on <= 6 nodes, l = 1..4"


def _fast_vs_per_edge(seed: int, trials: int = 50):
    rng = np.random.default_rng([seed, 23])
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 11))
        c = int(rng.integers(1, 4))
        g = random_graph(rng, n)
        p = _rand_params(rng, FastSmpParams.init(rng, c, c))
        u = rng.uniform(-1, 1, (n, n, c))
        fast = smp_fast_layer(Tensor(u[None]), GraphBatch([g]), p).data[0]
        worst = max(worst, float(np.max(np.abs(fast - smp_fast_layer_per_edge(u, g, p)))))
    return worst, trials, "single-aggregation vs per-edge loop"


def _cycle_oracles(seed: int, trials: int = 200):
    rng = np.random.default_rng([seed, 24])
    bad = 0
    for _ in range(trials):
        n = int(rng.integers(3, 10))
        g = random_graph(rng, n)
        if trace_power(g, 3) != 6 * count_k_cycles(g, 3):
            bad += 1
        perm = Permutation.random(n, rng)
        pg = apply_permutation(perm, g)
        for k in range(3, n + 1):
            if count_k_cycles(g, k) != count_k_cycles(pg, k):
                bad += 1
    return bad, trials, "tr(A^3) = 6 * triangles; cycle counts invariant under relabelling"


def _spectral(seed: int, trials: int = 200):
    rng = np.random.default_rng([seed, 25])
    worst = 0.0
    for _ in range(trials):
        g = random_graph(rng, int(rng.integers(1, 13)))
        worst = max(worst, abs(spectral_radius(g, "power") - spectral_radius(g, "dense")))
    return worst, trials, "power iteration vs dense eigensolver"


def _coloring_validity(seed: int, trials: int = 500):
    rng = np.random.default_rng([seed, 26])
    bad = 0
    for _ in range(trials):
        n = int(rng.integers(1, 31))
        g = random_graph(rng, n, p=float(rng.uniform(0.02, 0.3)))
        prev = 0
        for L in (1, 2, 3):
            ca = color_nodes(g, L)
            try:
                validate_coloring(g, ca)
            except ContractError:
                bad += 1
            if ca.chi < prev:
                bad += 1
            prev = ca.chi
    return bad, trials, "distance-2L rule and chi monotone in L, n <= 30"


def colored_run(g: Graph, colors: np.ndarray, layers: list[FastSmpParams]) -> np.ndarray:
    """Fast-SMP stack on colored contexts for one graph; returns (n, chi, c)."""
    ca = ColorAssignment(np.asarray(colors), int(np.max(colors)) + 1, 1)
    batch = GraphBatch([g], [ca.colors])
    u = Tensor(init_colored_context(g, ca)[None])
    for p in layers:
        u = smp_fast_layer(u, batch, p)
    return u.data[0]


def _coloring_reduction(seed: int, trials: int = 50):
    """With chi = n the colored run is the one-hot run with rows relabelled by color."""
    rng = np.random.default_rng([seed, 27])
    worst = 0.0
    for t in range(trials):
        n = int(rng.integers(2, 9))
        g = random_graph(rng, n)
        c_x = g.c_x
        layers = [_rand_params(rng, FastSmpParams.init(rng, 1 + c_x if k == 0 else 3, 3)) for k in range(3)]
        # half the trials use the greedy coloring of a graph where it is a bijection
        if t % 2 == 0:
            g = Graph(n, tuple(itertools.combinations(range(n), 2)))
            colors = color_nodes(g, 1).colors
        else:
            colors = rng.permutation(n)
        if len(set(colors.tolist())) != n:
            raise AssertionError("expected chi = n")
        colored = colored_run(g, colors, layers)
        u = Tensor(init_local_context(g)[None])
        batch = GraphBatch([g])
        for p in layers:
            u = smp_fast_layer(u, batch, p)
        onehot = u.data[0]
        worst = max(worst, float(np.max(np.abs(colored[:, colors] - onehot))))
    return worst, trials, "3 Fast-SMP layers, colored vs one-hot"


def oracle_suite(seed: int = 0) -> Iterator[CheckResult]:
    yield _timed("oracles", "powers_of_adjacency", 0, lambda: _powers_of_a(seed))
    yield _timed("oracles", "receptive_field_recursion", 0, lambda: _receptive_fields(seed))
    yield _timed("oracles", "fast_layer_per_edge", 1e-12, lambda: _fast_vs_per_edge(seed))
    yield _timed("oracles", "cycle_counts", 0, lambda: _cycle_oracles(seed))
    yield _timed("oracles", "spectral_radius", 1e-8, lambda: _spectral(seed))
    yield _timed("oracles", "coloring_validity", 0, lambda: _coloring_validity(seed))
    yield _timed("oracles", "coloring_chi_equals_n", 1e-9, lambda: _coloring_reduction(seed))


# ---------------------------------------------------------------- separation
def separation_traces() -> tuple[int, int, float, float]:
    """tr(A^3) of C6 and 2xC3 from the oracle and from SMP sum-propagation."""
    c6, two_c3 = cycle_graph(6), disjoint_union(cycle_graph(3), cycle_graph(3))
    exact = trace_power(c6, 3), trace_power(two_c3, 3)
    smp = float(np.trace(sum_propagation_power(c6, 3))), float(np.trace(sum_propagation_power(two_c3, 3)))
    return exact[0], exact[1], smp[0], smp[1]


def _trace_separation():
    a, b, sa, sb = separation_traces()
    ok = a == sa and b == sb and a != b
    return (0.0 if ok else 1.0), 1, f"tr(A^3): C6 {a} (SMP {sa:g}), 2xC3 {b} (SMP {sb:g})"


def mpnn_readouts(layers: list[MpnnLayerParams], graphs: list[Graph]) -> np.ndarray:
    """Mean-over-nodes readout of an MPNN stack run from all-ones features."""
    out = []
    for g in graphs:
        x = Tensor(np.ones((1, g.n, layers[0].c_in)))
        batch = GraphBatch([g])
        for p in layers:
            x = mpnn_layer(x, batch, p)
        out.append(x.data[0].mean(axis=0))
    return np.stack(out)


def _mpnn_blindness(seed: int, trials: int = 50):
    rng = np.random.default_rng([seed, 31])
    pair = [cycle_graph(6), disjoint_union(cycle_graph(3), cycle_graph(3))]
    worst = 0.0
    for _ in range(trials):
        c = int(rng.integers(1, 6))
        depth = int(rng.integers(1, 6))
        layers = [_rand_params(rng, MpnnLayerParams.init(rng, c, c)) for _ in range(depth)]
        r = mpnn_readouts(layers, pair)
        worst = max(worst, float(np.max(np.abs(r[0] - r[1]))))
    return worst, trials, "C6 vs 2xC3, uniform features"


def lifted_run(layers: list[MpnnLayerParams], g: Graph, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(MPNN output, lifted Default-SMP contexts) for one graph."""
    batch = GraphBatch([g])
    h = Tensor(x[None])
    for p in layers:
        h = mpnn_layer(h, batch, p)
    u = np.zeros((g.n, g.n, x.shape[1]))
    u[np.arange(g.n), np.arange(g.n)] = x
    ut = Tensor(u[None])
    for p in lift_mpnn_to_smp(layers, g.n):
        ut = smp_default_layer(ut, batch, p)
    return h.data[0], ut.data[0]


def _lifting(seed: int, trials: int = 100):
    rng = np.random.default_rng([seed, 32])
    worst_diag = worst_off = 0.0
    for _ in range(trials):
        n = int(rng.integers(1, 9))
        c_y = int(rng.integers(0, 3))
        g = random_graph(rng, n, c_y=c_y)
        widths = [int(w) for w in rng.integers(1, 5, size=int(rng.integers(1, 4)) + 1)]
        layers = [_rand_params(rng, MpnnLayerParams.init(rng, a, b, c_y=c_y)) for a, b in zip(widths, widths[1:])]
        x = rng.uniform(-1, 1, (n, widths[0]))
        h, u = lifted_run(layers, g, x)
        idx = np.arange(n)
        worst_diag = max(worst_diag, float(np.max(np.abs(u[idx, idx] - h))))
        off = u.copy()
        off[idx, idx] = 0.0
        worst_off = max(worst_off, float(np.max(np.abs(off))))
    return worst_diag, worst_off, trials


def separation_suite(seed: int = 0) -> Iterator[CheckResult]:
    yield _timed("separation", "trace_power_c6_vs_2c3", 0, _trace_separation)
    yield _timed("separation", "mpnn_readouts_coincide", 1e-12, lambda: _mpnn_blindness(seed))
    t = time.perf_counter()
    diag, off, cases = _lifting(seed)
    secs = time.perf_counter() - t
    yield CheckResult("separation", "lifting_diagonal", diag <= 1e-9, diag, 1e-9, cases, secs, "lifted SMP vs MPNN")
    yield CheckResult("separation", "lifting_off_diagonal", off <= 1e-12, off, 1e-12, cases, 0.0,
                      "off-diagonal magnitude")


# ----------------------------------------------------------------- gradients
GRAD_TRIALS = 20
GRAD_TOL = 1e-4


def _grad_case(kind: str, rng):
    """(loss closure, tensors to check) for one random instance of ``kind``."""
    n = int(rng.integers(3, 6))
    c = int(rng.integers(1, 4))
    g = random_graph(rng, n, p=0.5, c_y=1 if kind == "smp_default_layer" else 0)
    batch = GraphBatch([g])
    u = Tensor(rng.uniform(-1, 1, (1, n, n, c)), requires_grad=True)
    if kind == "equivariant_linear":
        p = _rand_params(rng, EquivLinearParams.init(rng, c, c))
        fwd = lambda: equivariant_linear(u, p, batch.owner_mask, n)
        params = p.parameters() + [u]
    elif kind == "smp_fast_layer":
        p = _rand_params(rng, FastSmpParams.init(rng, c, c))
        fwd = lambda: smp_fast_layer(u, batch, p)
        params = p.parameters() + [u]
    elif kind == "smp_default_layer":
        p = _rand_params(rng, DefaultSmpParams.init(rng, c, c, c_y=1))
        fwd = lambda: smp_default_layer(u, batch, p)
        params = p.parameters() + [u]
    elif kind == "mpnn_layer":
        p = _rand_params(rng, MpnnLayerParams.init(rng, c, c))
        x = Tensor(rng.uniform(-1, 1, (1, n, c)), requires_grad=True)
        fwd = lambda: mpnn_layer(x, batch, p)
        params = p.parameters() + [x]
    elif kind == "rms_norm":
        gain = Tensor(rng.uniform(-1, 1, c), requires_grad=True)
        fwd = lambda: rms_norm(u, gain)
        params = [gain, u]
    elif kind == "node_pool":
        p = _rand_params(rng, NodePoolParams.init(rng, c, 3, 2))
        fwd = lambda: node_pool(u, batch, p)
        params = p.parameters() + [u]
    elif kind == "graph_extract":
        mlp = _uniform_mlp(rng, [2 * c, 3, 2])
        fwd = lambda: graph_extract(u, batch, mlp)
        params = mlp.parameters() + [u]
    else:
        raise ValueError(kind)
    weights = rng.uniform(-1, 1, fwd().shape)
    return (lambda: (fwd() * weights).sum()), params


def _network_grad_case(variant: str, rng):
    net = _rand_params(rng, Network(ModelConfig(variant, "cycles", layers=2, width=3, head_width=3), rng))
    graphs = [random_graph(rng, 5, p=0.5) for _ in range(2)]
    batch = GraphBatch(graphs)
    y = np.array([0.0, 1.0])
    return (lambda: bce_with_logits(net.forward(batch)["graph"].reshape(2), y)), net.parameters()


GRAD_KINDS = ("equivariant_linear", "smp_fast_layer", "smp_default_layer", "mpnn_layer",
              "rms_norm", "node_pool", "graph_extract")


def _gradients(kind: str, seed: int, trials: int):
    rng = np.random.default_rng([seed, 41, GRAD_KINDS.index(kind) if kind in GRAD_KINDS else 99])
    worst = 0.0
    for _ in range(trials):
        if kind.startswith("network:"):
            f, params = _network_grad_case(kind.split(":", 1)[1], rng)
        else:
            f, params = _grad_case(kind, rng)
        worst = max(worst, finite_difference_check(f, params, h=1e-5))
    return worst, trials, "h = 1e-5"


def gradient_suite(seed: int = 0) -> Iterator[CheckResult]:
    for kind in GRAD_KINDS:
        yield _timed("gradients", kind, GRAD_TOL, lambda: _gradients(kind, seed, GRAD_TRIALS))
    yield _timed("gradients", "network_smp_fast_bce", GRAD_TOL, lambda: _gradients("network:smp-fast", seed, 3))


# ------------------------------------------------------------------- runner
SUITES = ("equivariance", "oracles", "separation", "gradients")


def run_suite(name: str = "all", action: Action = apply_permutation, seed: int = 0,
              report: Callable[[str], None] | None = None) -> list[CheckResult]:
    """Run one suite (or ``all``); ``report`` receives a line per finished check."""
    if name != "all" and name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    names = SUITES if name == "all" else (name,)
    suites = {
        "equivariance": lambda: equivariance_suite(action, seed),
        "oracles": lambda: oracle_suite(seed),
        "separation": lambda: separation_suite(seed),
        "gradients": lambda: gradient_suite(seed),
    }
    results = []
    for s in names:
        for r in suites[s]():
            if report is not None:
                report(format_result(r))
            results.append(r)
    return results
