"""Checkpoint files: a plain-text manifest followed by raw little-endian float64.

Layout::

    SMPNET-CHECKPOINT 1
    meta <single-line JSON object>
    param <name> <d1>,<d2>,...        (one line per tensor, scalars use "-")
    ...
    end
    <payload: all tensors, manifest order, row-major, '<f8'>

The payload starts right after the newline that ends the ``end`` line.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import CheckpointError

MAGIC = "SMPNET-CHECKPOINT 1"


def save_checkpoint(path, named: list[tuple[str, np.ndarray]], meta: dict) -> None:
    lines = [MAGIC, "meta " + json.dumps(meta, sort_keys=True, separators=(",", ":"))]
    for name, arr in named:
        if " " in name:
            raise CheckpointError(f"parameter name {name!r} contains a space")
        dims = ",".join(str(d) for d in arr.shape) or "-"
        lines.append(f"param {name} {dims}")
    lines.append("end")
    payload = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for _, a in named)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(("\n".join(lines) + "\n").encode() + payload)


def load_checkpoint(path) -> tuple[list[tuple[str, np.ndarray]], dict]:
    raw = Path(path).read_bytes()
    pos = 0
    header: list[str] = []
    while True:
        nl = raw.find(b"\n", pos)
        if nl < 0:
            raise CheckpointError("truncated manifest")
        line = raw[pos:nl].decode()
        pos = nl + 1
        if line == "end":
            break
        header.append(line)
    if not header or header[0] != MAGIC:
        raise CheckpointError("not a checkpoint file")
    meta: dict = {}
    specs: list[tuple[str, tuple[int, ...]]] = []
    for line in header[1:]:
        kind, _, rest = line.partition(" ")
        if kind == "meta":
            try:
                meta = json.loads(rest)
            except json.JSONDecodeError:
                raise CheckpointError("malformed meta line") from None
        elif kind == "param":
            try:
                name, dims = rest.split(" ")
                shape = () if dims == "-" else tuple(int(d) for d in dims.split(","))
            except ValueError:
                raise CheckpointError(f"malformed manifest line {line!r}") from None
            specs.append((name, shape))
        else:
            raise CheckpointError(f"unknown manifest line {line!r}")
    total = sum(int(np.prod(s)) for _, s in specs)
    if pos + 8 * total != len(raw):
        raise CheckpointError("payload size does not match manifest")
    data = np.frombuffer(raw, dtype="<f8", count=total, offset=pos) if total else np.zeros(0)
    out, k = [], 0
    for name, shape in specs:
        size = int(np.prod(shape))
        out.append((name, data[k : k + size].reshape(shape).astype(np.float64)))
        k += size
    return out, meta
