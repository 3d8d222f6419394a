"""Canonical JSON emission shared by every file format in this package.

Floats are written with 17 significant digits so that values round-trip
exactly and repeated runs produce byte-identical files.  ``json.loads`` is
used for parsing; only the writer needs to be custom.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import Any

import numpy as np


def format_float(value: float) -> str:
    if math.isnan(value) or math.isinf(value):
        raise ValueError(f"non-finite value {value!r} is not serializable")
    return format(value, ".17g")


def dumps_canonical(obj: Any) -> str:
    """Serialize to compact JSON with deterministic float formatting."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def dump_canonical_bytes(obj: Any) -> bytes:
    return (dumps_canonical(obj) + "\n").encode("ascii")


def _emit(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for k, item in enumerate(obj):
            if k:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for k, (key, value) in enumerate(obj.items()):
            if k:
                out.append(",")
            if not isinstance(key, str):
                raise TypeError(f"JSON object keys must be str, got {key!r}")
            out.append(json.dumps(key))
            out.append(":")
            _emit(value, out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} canonically")


def loads(text: str | bytes) -> Any:
    return json.loads(text)


def load_json_file(path: str) -> Any:
    with open(path, "rb") as fh:
        return json.loads(fh.read())


def write_json_file(path: str, obj: Any) -> None:
    with open(path, "wb") as fh:
        fh.write(dump_canonical_bytes(obj))


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()
