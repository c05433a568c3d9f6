"""Deterministic serialization helpers shared by the library and the CLI.

Floats are printed with 17 significant digits so that serialized values
round-trip bit-exactly and reruns diff clean.  Output never depends on
dict insertion order beyond what the caller constructs, and no timestamps
are ever embedded here.
"""

from __future__ import annotations

import numpy as np

__all__ = ["fmt_float", "dumps"]


def fmt_float(x: float) -> str:
    """Render a float with 17 significant digits (exact round-trip)."""
    if np.isnan(x) or np.isinf(x):
        raise ValueError(f"non-finite value not serializable: {x}")
    return format(float(x), ".17g")


def _emit(obj, parts: list) -> None:
    if isinstance(obj, dict):
        parts.append("{")
        for k, (key, val) in enumerate(obj.items()):
            if k:
                parts.append(", ")
            if not isinstance(key, str):
                raise TypeError(f"JSON keys must be strings, got {key!r}")
            parts.append(f'"{key}": ')
            _emit(val, parts)
        parts.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        parts.append("[")
        for k, val in enumerate(obj):
            if k:
                parts.append(", ")
            _emit(val, parts)
        parts.append("]")
    elif isinstance(obj, (bool, np.bool_)):
        parts.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        parts.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        parts.append(fmt_float(float(obj)))
    elif isinstance(obj, str):
        escaped = obj.replace("\\", "\\\\").replace('"', '\\"')
        parts.append(f'"{escaped}"')
    elif obj is None:
        parts.append("null")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON-encode ``obj`` with deterministic float formatting."""
    parts: list = []
    _emit(obj, parts)
    return "".join(parts)
