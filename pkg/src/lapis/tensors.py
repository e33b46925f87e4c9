"""Text and raw-binary tensor argument format.

One entry per line: `shape: [2, 3] data: [1.0, 2.0, ...]` for tensors,
`shape: [2, 3] file: "x.bin"` for raw little-endian sidecar data, or
`value: 5` for scalars. Element types come from the entry function's
signature, so entries carry no dtype.
"""

from __future__ import annotations

import os
import re

import numpy as np

from .ir import DYNAMIC, MemRefType, ScalarType
from .printer import format_float

NUMPY_DTYPES = {
    "f16": np.dtype("<f2"), "f32": np.dtype("<f4"), "f64": np.dtype("<f8"),
    "i1": np.dtype("<u1"), "i32": np.dtype("<i4"), "i64": np.dtype("<i8"),
    "index": np.dtype("<i8"),
}

_SHAPE_RE = re.compile(r"^shape:\s*\[([^\]]*)\]\s*(data|file):\s*(.+)$")
_VALUE_RE = re.compile(r"^value:\s*(\S+)$")


class TensorFormatError(ValueError):
    pass


def parse_args_text(text: str, base_dir: str | None = None) -> list:
    """Raw entries: (shape tuple, flat number list | file path) or scalar."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        m = _VALUE_RE.match(line)
        if m:
            entries.append(_number(m.group(1), lineno))
            continue
        m = _SHAPE_RE.match(line)
        if m is None:
            raise TensorFormatError(f"line {lineno}: expected `shape: [..] data: [..]` or `value: ..`")
        shape = tuple(int(d) for d in m.group(1).split(",") if d.strip())
        kind, payload = m.group(2), m.group(3).strip()
        if kind == "file":
            name = payload.strip('"')
            entries.append((shape, os.path.join(base_dir or ".", name)))
        else:
            if not (payload.startswith("[") and payload.endswith("]")):
                raise TensorFormatError(f"line {lineno}: data must be a [..] list")
            body = payload[1:-1].strip()
            data = [_number(tok.strip(), lineno) for tok in body.split(",")] if body else []
            entries.append((shape, data))
    return entries


def _number(token: str, lineno: int):
    try:
        if any(c in token for c in ".eE") and not token.lstrip("+-").isdigit():
            return float(token)
        return int(token)
    except ValueError as exc:
        raise TensorFormatError(f"line {lineno}: bad number {token!r}") from exc


def coerce_inputs(entries: list, param_types: list) -> list:
    """Convert raw entries to numpy arrays / scalars matching the signature."""
    if len(entries) != len(param_types):
        raise TensorFormatError(f"{len(entries)} arguments supplied, function takes {len(param_types)}")
    out = []
    for i, (entry, t) in enumerate(zip(entries, param_types)):
        if isinstance(t, ScalarType):
            if isinstance(entry, tuple):
                raise TensorFormatError(f"argument {i}: expected a scalar `value:` entry")
            out.append(entry)
            continue
        if not isinstance(t, MemRefType):
            raise TensorFormatError(f"argument {i}: unsupported parameter type {t}")
        if not isinstance(entry, tuple):
            raise TensorFormatError(f"argument {i}: expected a tensor `shape:` entry")
        shape, payload = entry
        if len(shape) != t.rank:
            raise TensorFormatError(f"argument {i}: rank {len(shape)} does not match {t}")
        for d, (have, want) in enumerate(zip(shape, t.shape)):
            if want != DYNAMIC and have != want:
                raise TensorFormatError(f"argument {i}: extent {have} in dim {d} does not match {t}")
        dtype = NUMPY_DTYPES[t.element.kind]
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        if isinstance(payload, str):
            raw = open(payload, "rb").read()
            if len(raw) != count * dtype.itemsize:
                raise TensorFormatError(
                    f"argument {i}: {payload} holds {len(raw)} bytes, expected {count * dtype.itemsize}")
            arr = np.frombuffer(raw, dtype=dtype).reshape(shape)
        else:
            if len(payload) != count:
                raise TensorFormatError(f"argument {i}: {len(payload)} elements, shape needs {count}")
            arr = np.array(payload, dtype=dtype).reshape(shape)
        out.append(arr)
    return out


def load_args_file(path: str, param_types: list) -> list:
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    return coerce_inputs(parse_args_text(text, base_dir=os.path.dirname(os.path.abspath(path))),
                         param_types)


def format_outputs(outputs: list) -> str:
    lines = []
    for v in outputs:
        arr = np.asarray(v)
        if arr.ndim == 0 and not isinstance(v, np.ndarray):
            lines.append(f"value: {_format_element(v)}")
            continue
        shape = ", ".join(str(d) for d in arr.shape)
        data = ", ".join(_format_element(x) for x in arr.reshape(-1).tolist())
        lines.append(f"shape: [{shape}] data: [{data}]")
    return "".join(line + "\n" for line in lines)


def _format_element(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return format_float(x)
    return str(x)
