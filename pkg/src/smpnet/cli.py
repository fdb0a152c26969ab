"""Command-line entry point: generate, train, evaluate, verify, bench.

Exit codes: 0 on success, 1 when a check or training run fails, 2 on
usage, configuration, dataset or checkpoint errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import (
    CheckpointError,
    ConfigError,
    DatasetParseError,
    GenerationError,
    TrainingError,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smpnet", description="Structural message-passing networks on small graphs.")
    sub = ap.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset as JSON lines")
    gen.add_argument("--task", choices=["cycles", "multitask"], required=True)
    gen.add_argument("--k", type=int, default=4, help="cycle length (cycles)")
    gen.add_argument("--n", type=int, default=12, help="graph size (cycles)")
    gen.add_argument("--n-min", type=int, default=5, help="smallest graph (multitask)")
    gen.add_argument("--n-max", type=int, default=24, help="largest graph (multitask)")
    gen.add_argument("--count", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)

    tr = sub.add_parser(
        "train",
        help="train a model",
        description="Train from a key = value config file; any key may be overridden with --key value.",
    )
    tr.add_argument("--config", help="plain-text key = value config file")
    tr.add_argument("--quiet", action="store_true", help="no per-epoch log lines")

    ev = sub.add_parser("evaluate", help="test a checkpoint on a dataset")
    ev.add_argument("--checkpoint", required=True)
    ev.add_argument("--dataset", required=True)
    ev.add_argument("--batch-size", type=int, default=None)
    ev.add_argument("--out", help="also write the metrics as JSON here")

    ve = sub.add_parser("verify", help="run the invariant suites")
    ve.add_argument("suite", nargs="?", default="all",
                    choices=["equivariance", "oracles", "separation", "gradients", "all"])
    ve.add_argument("--seed", type=int, default=0)

    be = sub.add_parser("bench", help="per-layer forward timings as CSV")
    be.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64])
    be.add_argument("--degrees", type=float, nargs="+", default=[4.0], help="average degrees")
    be.add_argument("--width", type=int, default=16)
    be.add_argument("--repeats", type=int, default=25)
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--out", help="CSV path (default: stdout)")
    return ap


def _overrides(extra: list[str]) -> dict[str, str]:
    """``--key value`` / ``--key=value`` pairs left over by argparse."""
    out = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or tok == "--":
            raise ConfigError(f"unexpected argument {tok!r}")
        key, sep, value = tok[2:].partition("=")
        if not sep:
            if i + 1 >= len(extra):
                raise ConfigError(f"option --{key} needs a value")
            value = extra[i + 1]
            i += 1
        out[key] = value
        i += 1
    return out


def _cmd_generate(args) -> int:
    from .datasets import generate_cycle_dataset, generate_multitask_dataset, write_dataset

    if args.count < 0:
        raise ConfigError("--count must be >= 0")
    if args.task == "cycles":
        d = generate_cycle_dataset(args.k, args.n, args.count, args.seed)
    else:
        d = generate_multitask_dataset(args.count, args.n_min, args.n_max, args.seed)
    write_dataset(d, args.out)
    print(f"wrote {len(d)} {d.task} graphs to {args.out}")
    return EXIT_OK


def _cmd_train(args, extra: list[str]) -> int:
    from .train import RunConfig, load_config, train

    cfg = load_config(args.config) if args.config else RunConfig()
    cfg = cfg.updated(_overrides(extra))
    log = None if args.quiet else (lambda line: print(line, flush=True))
    report = train(cfg, log=log)
    print(json.dumps({"test": report["test"], "best_epoch": report["best_epoch"],
                      "out_dir": str(Path(cfg.out_dir))}))
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    from .datasets import read_dataset
    from .train import evaluate

    if not Path(args.checkpoint).is_file():
        raise ConfigError(f"checkpoint {args.checkpoint!r} not found")
    if not Path(args.dataset).is_file():
        raise ConfigError(f"dataset {args.dataset!r} not found")
    metrics = evaluate(args.checkpoint, read_dataset(args.dataset), args.batch_size)
    text = json.dumps(metrics, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_suite

    results = run_suite(args.suite, seed=args.seed, report=lambda line: print(line, flush=True))
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def _cmd_bench(args) -> int:
    from .bench import bench, rows_to_csv, scaling_exponent

    rows = bench(args.sizes, args.degrees, args.width, args.repeats, args.seed)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if len(set(args.sizes)) >= 2:
        for variant in ("mpnn", "smp-fast", "smp-default"):
            print(f"{variant} scaling exponent vs n: {scaling_exponent(rows, variant):.2f}", file=sys.stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    ap = _parser()
    args, extra = ap.parse_known_args(argv)
    if extra and args.command != "train":
        ap.error(f"unrecognized arguments: {' '.join(extra)}")
    try:
        if args.command == "generate":
            return _cmd_generate(args)
        if args.command == "train":
            return _cmd_train(args, extra)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_bench(args)
    except (ConfigError, DatasetParseError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GenerationError, TrainingError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
