"""Training and evaluation loops, run configuration and metric reports.

A run reads a training and a test dataset, holds out a validation split,
trains with Adam on same-size graph buckets and keeps the parameters with
the lowest validation loss. Outputs go to ``out_dir``: ``metrics.csv``
(long format: epoch, split, metric, value), ``report.json`` and
``model.ckpt``.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .batch import GraphBatch
from .checkpoint import load_checkpoint, save_checkpoint
from .coloring import color_nodes
from .datasets import Dataset, read_dataset
from .errors import CheckpointError, ConfigError, TrainingError
from .models import ModelConfig, Network
from .optim import Adam
from .oracles import MultitaskTargets
from .tensor import Tensor, bce_with_logits, mse, no_grad

__all__ = [
    "RunConfig",
    "load_config",
    "make_batches",
    "Standardizer",
    "train",
    "evaluate",
    "build_network",
]

NODE_TARGETS = ("dist", "ecc", "lap")
GRAPH_TARGETS = ("connected", "diameter", "spectral_radius")
# the distance-type subset used to compare SMP against the MPNN baseline
DISTANCE_SUBSET = ("dist", "ecc", "diameter")


@dataclass
class RunConfig:
    """Everything that determines a training run.

    Config files hold one ``key = value`` pair per line; ``#`` starts a
    comment. Keys are the field names below.
    """

    task: str = "cycles"
    variant: str = "smp-fast"
    layers: int = 8
    width: int = 16
    head_width: int = 16
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    epochs: int = 200
    seed: int = 0
    train_path: str = ""
    test_path: str = ""
    out_dir: str = "run"
    val_fraction: float = 0.1
    plateau_epochs: int = 20
    lr_floor: float = 1e-5
    patience: int = 0  # stop after this many epochs without improvement; 0 disables
    coloring: int = 0  # L for colored contexts; 0 means one-hot identifiers

    def validate(self, check_files: bool = True) -> None:
        if self.task not in ("cycles", "multitask"):
            raise ConfigError(f"task must be 'cycles' or 'multitask', got {self.task!r}")
        self.model_config(0)
        if self.batch_size < 1 or self.epochs < 0:
            raise ConfigError("batch_size must be >= 1 and epochs >= 0")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ConfigError("val_fraction must lie in [0, 1)")
        if self.lr <= 0 or self.lr_floor <= 0:
            raise ConfigError("learning rates must be positive")
        if self.coloring < 0 or self.patience < 0 or self.plateau_epochs < 1:
            raise ConfigError("coloring and patience must be >= 0, plateau_epochs >= 1")
        if check_files:
            for key in ("train_path", "test_path"):
                path = getattr(self, key)
                if not path or not Path(path).is_file():
                    raise ConfigError(f"{key}: dataset file {path!r} not found")

    def model_config(self, c_x: int) -> ModelConfig:
        return ModelConfig(self.variant, self.task, self.layers, self.width, c_x, self.head_width)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def updated(self, overrides: dict[str, str]) -> "RunConfig":
        """Copy with string-valued overrides coerced to each field's type."""
        types = {f.name: f.type for f in fields(self)}
        values = self.to_dict()
        for key, raw in overrides.items():
            key = key.replace("-", "_")
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = _coerce(key, types[key], raw)
        return RunConfig(**values)


def _coerce(key: str, typ, raw):
    if not isinstance(raw, str):
        return raw
    kind = typ if isinstance(typ, str) else typ.__name__
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind}") from None
    return raw


def load_config(path) -> RunConfig:
    overrides = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        overrides[key.strip()] = value.strip()
    return RunConfig().updated(overrides)


# ------------------------------------------------------------------ batching
def _colors(d: Dataset, L: int) -> list[np.ndarray] | None:
    if not L:
        return None
    return [color_nodes(r.graph, L).colors for r in d.records]


def make_batches(
    d: Dataset,
    idx: np.ndarray,
    batch_size: int,
    colors: list[np.ndarray] | None = None,
    rng: np.random.Generator | None = None,
) -> list[tuple[GraphBatch, np.ndarray]]:
    """Group records by size (and color count) into batches of at most ``batch_size``.

    Records keep the order of ``idx`` inside each group. With ``rng`` the
    batch order is shuffled too. Returns ``(batch, record indices)`` pairs.
    """
    groups: dict[tuple[int, int], list[int]] = {}
    for i in idx:
        g = d.records[i].graph
        chi = 0 if colors is None else int(colors[i].max()) + 1
        groups.setdefault((g.n, chi), []).append(int(i))
    out = []
    for key in sorted(groups):
        members = groups[key]
        for s in range(0, len(members), batch_size):
            chunk = np.array(members[s : s + batch_size])
            graphs = [d.records[i].graph for i in chunk]
            cols = None if colors is None else [colors[i] for i in chunk]
            out.append((GraphBatch(graphs, cols), chunk))
    if rng is not None:
        out = [out[k] for k in rng.permutation(len(out))]
    return out


# ------------------------------------------------------------------ targets
@dataclass
class Standardizer:
    """Per-target mean and std from the training split."""

    node_mean: np.ndarray
    node_std: np.ndarray
    graph_mean: np.ndarray
    graph_std: np.ndarray

    @classmethod
    def fit(cls, labels: list[MultitaskTargets]) -> "Standardizer":
        node = np.concatenate([t.node_matrix() for t in labels])
        graph = np.stack([t.graph_vector() for t in labels])

        def std(a):
            s = a.std(axis=0)
            return np.where(s > 1e-12, s, 1.0)

        return cls(node.mean(axis=0), std(node), graph.mean(axis=0), std(graph))

    def to_dict(self) -> dict:
        return {k: v.tolist() for k, v in dataclasses.asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(*(np.asarray(d[k], dtype=np.float64) for k in ("node_mean", "node_std", "graph_mean", "graph_std")))

    def node(self, t: MultitaskTargets) -> np.ndarray:
        return (t.node_matrix() - self.node_mean) / self.node_std

    def graph(self, t: MultitaskTargets) -> np.ndarray:
        return (t.graph_vector() - self.graph_mean) / self.graph_std


class _Objective:
    """Task-specific loss and metric accumulation."""

    def __init__(self, task: str, scaler: Standardizer | None):
        self.task = task
        self.scaler = scaler

    def loss(self, out: dict[str, Tensor], d: Dataset, chunk: np.ndarray) -> Tensor:
        labels = [d.records[i].label for i in chunk]
        if self.task == "cycles":
            logits = out["graph"].reshape(len(chunk))
            return bce_with_logits(logits, np.asarray(labels, dtype=np.float64))
        node_t = np.stack([self.scaler.node(t) for t in labels])
        graph_t = np.stack([self.scaler.graph(t) for t in labels])
        # mse averages over targets too; scale back to a sum over the six targets
        k_node, k_graph = node_t.shape[-1], graph_t.shape[-1]
        return mse(out["node"], node_t) * float(k_node) + mse(out["graph"], graph_t) * float(k_graph)

    def metrics(self, net: Network, batches, d: Dataset) -> dict[str, float]:
        """Mean loss plus accuracy (cycles) or per-target log10 MSE (multitask)."""
        if not batches:
            raise ConfigError("cannot evaluate on an empty dataset")
        total, count = 0.0, 0
        correct = 0
        node_se = graph_se = None
        node_count = 0
        with no_grad():
            for batch, chunk in batches:
                out = net.forward(batch)
                total += self.loss(out, d, chunk).item() * len(chunk)
                count += len(chunk)
                labels = [d.records[i].label for i in chunk]
                if self.task == "cycles":
                    pred = out["graph"].data[:, 0] > 0
                    correct += int(np.sum(pred == (np.asarray(labels) > 0)))
                    continue
                node_t = np.stack([self.scaler.node(t) for t in labels])
                graph_t = np.stack([self.scaler.graph(t) for t in labels])
                ns = ((out["node"].data - node_t) ** 2).sum(axis=(0, 1))
                gs = ((out["graph"].data - graph_t) ** 2).sum(axis=0)
                node_se = ns if node_se is None else node_se + ns
                graph_se = gs if graph_se is None else graph_se + gs
                node_count += node_t.shape[0] * node_t.shape[1]
        result = {"loss": total / count}
        if self.task == "cycles":
            result["accuracy"] = correct / count
            return result
        for name, se in zip(NODE_TARGETS, node_se / node_count):
            result[f"log_mse_{name}"] = float(np.log10(se))
        for name, se in zip(GRAPH_TARGETS, graph_se / count):
            result[f"log_mse_{name}"] = float(np.log10(se))
        names = NODE_TARGETS + GRAPH_TARGETS
        result["mean_log_mse"] = float(np.mean([result[f"log_mse_{k}"] for k in names]))
        result["distance_log_mse"] = float(np.mean([result[f"log_mse_{k}"] for k in DISTANCE_SUBSET]))
        return result


# ------------------------------------------------------------------ helpers
def _check_task(task: str, d: Dataset, what: str) -> None:
    if not d.task.startswith(task):
        raise ConfigError(f"{what} holds task {d.task!r}, run is configured for {task!r}")
    if len(d) == 0:
        raise ConfigError(f"{what} is empty")


def _feature_width(d: Dataset) -> int:
    widths = {r.graph.c_x for r in d.records}
    if len(widths) != 1:
        raise ConfigError(f"mixed node feature widths {sorted(widths)}")
    return widths.pop()


def build_network(named: list[tuple[str, np.ndarray]], meta: dict) -> Network:
    cfg = ModelConfig(**meta["model"])
    net = Network(cfg, np.random.default_rng(0))
    own = net.named_parameters()
    if [n for n, _ in own] != [n for n, _ in named]:
        raise CheckpointError("checkpoint parameters do not match the model layout")
    for (name, p), (_, arr) in zip(own, named):
        if p.shape != arr.shape:
            raise CheckpointError(f"{name}: checkpoint shape {arr.shape} != model shape {p.shape}")
        p.data = arr.copy()
    return net


def _snapshot(net: Network) -> list[tuple[str, np.ndarray]]:
    return [(name, p.data.copy()) for name, p in net.named_parameters()]


class _MetricsLog:
    def __init__(self):
        self.rows: list[tuple[int, str, str, float]] = []

    def add(self, epoch: int, split: str, values: dict[str, float]) -> None:
        for k, v in values.items():
            self.rows.append((epoch, split, k, float(v)))

    def write(self, path: Path) -> None:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "split", "metric", "value"])
            for epoch, split, metric, value in self.rows:
                w.writerow([epoch, split, metric, repr(value)])


# --------------------------------------------------------------------- train
def train(cfg: RunConfig, train_set: Dataset | None = None, test_set: Dataset | None = None,
          log=None) -> dict:
    """Train, keep the best-validation parameters, test them, write outputs.

    Datasets are read from ``cfg.train_path``/``cfg.test_path`` unless given.
    Returns the report dictionary that is also written to ``report.json``.
    """
    started = time.perf_counter()
    cfg.validate(check_files=train_set is None or test_set is None)
    train_set = train_set if train_set is not None else read_dataset(cfg.train_path)
    test_set = test_set if test_set is not None else read_dataset(cfg.test_path)
    _check_task(cfg.task, train_set, "training set")
    _check_task(cfg.task, test_set, "test set")
    c_x = _feature_width(train_set)
    if _feature_width(test_set) != c_x:
        raise ConfigError("training and test sets have different node feature widths")

    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(len(train_set))
    n_val = int(round(cfg.val_fraction * len(train_set)))
    val_idx, fit_idx = np.sort(order[:n_val]), np.sort(order[n_val:])
    if len(fit_idx) == 0:
        raise ConfigError("validation split leaves no training records")

    scaler = None
    if cfg.task == "multitask":
        scaler = Standardizer.fit([train_set.records[i].label for i in fit_idx])
    objective = _Objective(cfg.task, scaler)

    net = Network(cfg.model_config(c_x), rng)
    opt = Adam(net.parameters(), lr=cfg.lr, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    train_colors = _colors(train_set, cfg.coloring)
    val_batches = make_batches(train_set, val_idx, cfg.batch_size, train_colors)

    metrics = _MetricsLog()
    train_losses: list[float] = []
    best = (np.inf, -1)
    best_params = _snapshot(net)
    since_best = since_lr = 0
    for epoch in range(cfg.epochs):
        shuffled = fit_idx[rng.permutation(len(fit_idx))]
        total = 0.0
        for step, (batch, chunk) in enumerate(make_batches(train_set, shuffled, cfg.batch_size, train_colors, rng)):
            loss = objective.loss(net.forward(batch), train_set, chunk)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingError(epoch, step, f"loss is {value}")
            opt.zero_grad()
            loss.backward()
            opt.step()
            total += value * len(chunk)
        train_losses.append(total / len(fit_idx))
        metrics.add(epoch, "train", {"loss": train_losses[-1], "lr": opt.lr})
        if val_batches:
            val = objective.metrics(net, val_batches, train_set)
            metrics.add(epoch, "val", val)
            score = val["loss"]
        else:
            score = train_losses[-1]
        if log is not None:
            log(f"epoch {epoch}: train loss {train_losses[-1]:.4f}, val loss {score:.4f}")
        if score < best[0]:
            best = (score, epoch)
            best_params = _snapshot(net)
            since_best = since_lr = 0
        else:
            since_best += 1
            since_lr += 1
        if since_lr >= cfg.plateau_epochs and opt.lr > cfg.lr_floor:
            opt.lr = max(opt.lr * 0.5, cfg.lr_floor)
            since_lr = 0
        if cfg.patience and since_best >= cfg.patience:
            break

    for (_, p), (_, arr) in zip(net.named_parameters(), best_params):
        p.data = arr
    meta = {
        "model": net.cfg.to_dict(),
        "coloring": cfg.coloring,
        "dataset_task": train_set.task,
        "standardizer": scaler.to_dict() if scaler else None,
        "best_epoch": best[1],
        "batch_size": cfg.batch_size,
        "config_hash": cfg.digest(),
    }
    test_batches = make_batches(test_set, np.arange(len(test_set)), cfg.batch_size, _colors(test_set, cfg.coloring))
    test = objective.metrics(net, test_batches, test_set)
    metrics.add(best[1], "test", test)

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out_dir / "model.ckpt", best_params, meta)
    metrics.write(out_dir / "metrics.csv")
    report = {
        "train_loss": train_losses,
        "test": test,
        "best_epoch": best[1],
        "epochs_run": len(train_losses),
        "wall_clock_s": time.perf_counter() - started,
        "seed": cfg.seed,
        "config_hash": cfg.digest(),
        "config": cfg.to_dict(),
    }
    _check_report(report)
    (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    return report


def _check_report(report: dict) -> None:
    values = list(report["test"].values()) + list(report["train_loss"])
    if not all(np.isfinite(values)):
        raise TrainingError(report["epochs_run"], -1, "non-finite metric in report")
    acc = report["test"].get("accuracy")
    if acc is not None and not 0.0 <= acc <= 1.0:
        raise TrainingError(report["epochs_run"], -1, f"accuracy {acc} out of range")


# ------------------------------------------------------------------ evaluate
def evaluate(checkpoint, d: Dataset, batch_size: int | None = None) -> dict:
    """Test metrics of a saved model on ``d``; the checkpoint is only read.

    Batches default to the training run's batch size so that the training
    report's test metrics are reproduced bit for bit.
    """
    named, meta = load_checkpoint(checkpoint)
    model = meta.get("model")
    if not model:
        raise CheckpointError("checkpoint has no model configuration")
    if len(d) == 0:
        raise ConfigError("cannot evaluate on an empty dataset")
    task = model["task"]
    if not d.task.startswith(task):
        raise CheckpointError(f"model was trained for {task!r}, dataset holds {d.task!r}")
    c_x = _feature_width(d)
    if c_x != model["c_x"]:
        raise CheckpointError(f"model expects {model['c_x']} node features, dataset has {c_x}")
    net = build_network(named, meta)
    scaler = Standardizer.from_dict(meta["standardizer"]) if meta.get("standardizer") else None
    batch_size = batch_size or meta.get("batch_size", 32)
    batches = make_batches(d, np.arange(len(d)), batch_size, _colors(d, meta.get("coloring", 0)))
    return _Objective(task, scaler).metrics(net, batches, d)
