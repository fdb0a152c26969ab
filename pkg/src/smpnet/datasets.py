"""Synthetic cycle-detection and multi-task graph datasets, stored as JSON lines.

Each line holds one graph in the form
``{"n", "edges", "x", "y", "label"}``. Dataset-level metadata (task, seed,
generator configuration) goes to a sidecar ``<path>.meta.json`` so the data
file stays one graph per line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ContractError, DatasetParseError, GenerationError
from .graph import Graph, Permutation, apply_permutation
from .oracles import MultitaskTargets, count_k_cycles, multitask_targets

__all__ = [
    "Record",
    "Dataset",
    "record_rng",
    "generate_cycle_dataset",
    "generate_multitask_dataset",
    "write_dataset",
    "read_dataset",
    "recheck_labels",
]

MAX_ATTEMPTS = 50
MAX_DEGREE_GAP = 0.05


@dataclass
class Record:
    graph: Graph
    label: Any  # int for cycles, MultitaskTargets for multitask

    def __eq__(self, other) -> bool:
        return isinstance(other, Record) and self.graph == other.graph and self.label == other.label


@dataclass
class Dataset:
    task: str
    records: list[Record]
    seed: int | None = None
    config: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and self.task == other.task
            and self.seed == other.seed
            and self.config == other.config
            and self.records == other.records
        )

    def subset(self, idx) -> "Dataset":
        return Dataset(self.task, [self.records[i] for i in idx], self.seed, dict(self.config))


def record_rng(seed: int, index: int, attempt: int = 0) -> np.random.Generator:
    """Independent stream per (seed, record index, attempt)."""
    return np.random.default_rng([seed, index, attempt])


# ------------------------------------------------------------------ cycles
def _creates_k_cycle(nbrs: list[set[int]], u: int, v: int, k: int) -> bool:
    """Is there a simple path of exactly k-1 edges from u to v?"""
    stack = [(u, (u,))]
    while stack:
        w, path = stack.pop()
        if len(path) == k:
            if w == v:
                return True
            continue
        for z in nbrs[w]:
            if z in path:
                continue
            if z == v and len(path) != k - 1:
                continue
            stack.append((z, path + (z,)))
    return False


def _cycle_graph_sample(rng: np.random.Generator, n: int, k: int, p: float, positive: bool) -> Graph:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    target = int(rng.binomial(len(pairs), p))
    order = rng.permutation(len(pairs))
    edges: set[tuple[int, int]] = set()
    nbrs: list[set[int]] = [set() for _ in range(n)]

    def link(i: int, j: int) -> None:
        edges.add((min(i, j), max(i, j)))
        nbrs[i].add(j)
        nbrs[j].add(i)

    # positives get a k-cycle, negatives a decoy cycle of length k-1 or k+1
    decoys = [c for c in (k - 1, k + 1) if c <= n]
    size = k if positive else int(decoys[rng.integers(len(decoys))])
    ring = rng.choice(n, size=size, replace=False)
    for a, b in zip(ring, np.roll(ring, -1)):
        link(int(a), int(b))
    target = max(target, size)
    for t in order:
        if len(edges) >= target:
            break
        i, j = pairs[t]
        if (i, j) in edges:
            continue
        if not positive and _creates_k_cycle(nbrs, i, j, k):
            continue
        link(i, j)
    return Graph(n, tuple(sorted(edges)))


def generate_cycle_dataset(k: int, n: int, count: int, seed: int, p: float | None = None) -> Dataset:
    """Balanced graphs labelled 1 iff they contain a simple k-cycle.

    Every record draws a target edge count from G(n, p) with
    ``p = 1.2 / (n - 1)``. Positives (even indices) plant a k-cycle on random
    nodes, negatives plant a decoy cycle of length k-1 or k+1. Both then add
    random edges in random order up to the target; negatives skip any edge
    that would close a k-cycle. The classes thus share the edge-count
    distribution and both always contain a cycle, so neither density nor
    plain cyclicity gives the label away. Labels are re-verified by brute
    force enumeration.
    """
    if k not in (4, 6, 8):
        raise ContractError(f"k must be 4, 6 or 8, got {k}")
    if n < k:
        raise ContractError(f"n={n} must be at least k={k}")
    p = 1.2 / (n - 1) if p is None else p
    config = {"k": k, "n": n, "count": count, "p": p}
    for attempt in range(MAX_ATTEMPTS):
        records = []
        for idx in range(count):
            positive = idx % 2 == 0
            rng = record_rng(seed, idx, attempt)
            for _ in range(MAX_ATTEMPTS):
                g = _cycle_graph_sample(rng, n, k, p, positive)
                if (count_k_cycles(g, k) > 0) == positive:
                    break
            else:
                raise GenerationError(f"record {idx}: no {'positive' if positive else 'negative'} graph found")
            records.append(Record(g, int(positive)))
        gap = _degree_gap(records)
        if gap < MAX_DEGREE_GAP:
            config["attempt"] = attempt
            return Dataset(f"cycles{k}", records, seed, config)
    n_pos = sum(r.label for r in records)
    raise GenerationError(
        f"mean degree gap {gap:.3f} between classes after {MAX_ATTEMPTS} attempts "
        f"({n_pos}/{len(records)} positive)"
    )


def _degree_gap(records: list[Record]) -> float:
    pos = [r.graph.d_avg for r in records if r.label]
    neg = [r.graph.d_avg for r in records if not r.label]
    if not pos or not neg:
        return 0.0
    a, b = float(np.mean(pos)), float(np.mean(neg))
    return abs(a - b) / max(a, b, 1e-12)


# --------------------------------------------------------------- multitask
def _random_tree(rng: np.random.Generator, n: int) -> list[tuple[int, int]]:
    edges = [(int(rng.integers(0, i)), i) for i in range(1, n)]
    perm = rng.permutation(n)
    return [(int(perm[a]), int(perm[b])) for a, b in edges]


def _multitask_graph(rng: np.random.Generator, n: int) -> Graph:
    if rng.random() < 0.5:
        p = rng.uniform(0.15, 0.5)
        upper = np.triu(rng.random((n, n)) < p, 1)
        i, j = np.nonzero(upper)
        return Graph(n, tuple(zip(i.tolist(), j.tolist())))
    edges = set(tuple(sorted(e)) for e in _random_tree(rng, n))
    extra = int(rng.integers(0, 4))
    missing = [(i, j) for i in range(n) for j in range(i + 1, n) if (i, j) not in edges]
    for t in rng.permutation(len(missing))[:extra]:
        edges.add(missing[t])
    return Graph(n, tuple(sorted(edges)))


def generate_multitask_dataset(count: int, n_min: int, n_max: int, seed: int) -> Dataset:
    """Random graphs with a flagged source node and a Gaussian node signal.

    Half the graphs are Erdos-Renyi with ``p ~ U[0.15, 0.5]``, half are
    random trees plus 0-3 extra edges. Node features are
    ``[is_source, x]``; labels are :func:`multitask_targets`.
    """
    if not 3 <= n_min <= n_max:
        raise ContractError(f"need 3 <= n_min <= n_max, got {n_min}, {n_max}")
    records = []
    for idx in range(count):
        rng = record_rng(seed, idx)
        n = int(rng.integers(n_min, n_max + 1))
        g = _multitask_graph(rng, n)
        source = int(rng.integers(0, n))
        x = rng.standard_normal(n)
        feats = np.zeros((n, 2))
        feats[source, 0] = 1.0
        feats[:, 1] = x
        g = Graph(n, g.edges, feats)
        records.append(Record(g, multitask_targets(g, source, x)))
    config = {"count": count, "n_min": n_min, "n_max": n_max}
    return Dataset("multitask", records, seed, config)


def multitask_source(g: Graph) -> int:
    return int(np.argmax(g.x[:, 0]))


def recheck_labels(d: Dataset) -> list[int]:
    """Indices of records whose stored label differs from the oracle."""
    bad = []
    for idx, r in enumerate(d.records):
        if d.task.startswith("cycles"):
            k = int(d.task[len("cycles"):])
            ok = r.label == int(count_k_cycles(r.graph, k) > 0)
        else:
            g = r.graph
            ok = r.label == multitask_targets(g, multitask_source(g), g.x[:, 1])
        if not ok:
            bad.append(idx)
    return bad


# ------------------------------------------------------------------ storage
def _meta_path(path: Path) -> Path:
    return path.with_name(path.name + ".meta.json")


def write_dataset(d: Dataset, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for r in d.records:
            rec = r.graph.to_record()
            rec["label"] = r.label.to_record() if isinstance(r.label, MultitaskTargets) else r.label
            fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
    meta = {"task": d.task, "seed": d.seed, "config": d.config, "count": len(d)}
    _meta_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_dataset(path) -> Dataset:
    path = Path(path)
    meta_file = _meta_path(path)
    meta = json.loads(meta_file.read_text()) if meta_file.exists() else {}
    records = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetParseError(lineno, f"invalid JSON ({exc.msg})") from None
            for key in ("n", "edges", "label"):
                if key not in rec:
                    raise DatasetParseError(lineno, f"missing key {key!r}")
            try:
                g = Graph.from_record(rec)
            except (ValueError, TypeError, IndexError) as exc:
                raise DatasetParseError(lineno, str(exc)) from None
            label = rec["label"]
            if isinstance(label, dict):
                label = MultitaskTargets.from_record(label)
            records.append(Record(g, label))
    task = meta.get("task")
    if task is None:
        task = "multitask" if records and isinstance(records[0].label, MultitaskTargets) else "cycles"
    return Dataset(task, records, meta.get("seed"), meta.get("config", {}))


def permute_record(r: Record, perm: Permutation) -> Record:
    """The same labelled graph under a node relabelling."""
    g = apply_permutation(perm, r.graph)
    if isinstance(r.label, MultitaskTargets):
        t = r.label
        m = perm.inverse().mapping
        label = MultitaskTargets(t.dist[m], t.ecc[m], t.lap[m], t.connected, t.diameter, t.radius)
        return Record(g, label)
    return Record(g, r.label)
