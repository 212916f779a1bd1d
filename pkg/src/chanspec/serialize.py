"""Deterministic JSON/CSV serialization for channels, matrices, and series.

All floating-point output uses 17 significant digits so that two identical
runs agree byte for byte.  Complex numbers serialize as [re, im] pairs.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .channel import Channel
from .cycles import CycleBlock, CycleSpec
from .series import Series

_REPRS = ("kraus", "superop", "choi")


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite float {x!r}")
    return format(float(x), ".17g")


def dumps_canonical(obj) -> str:
    """Render ``obj`` as JSON text with fixed float formatting.

    Accepts the usual JSON types plus numpy scalars/arrays and complex
    numbers (emitted as [re, im]).  Dict keys keep insertion order.
    """
    if isinstance(obj, np.ndarray):
        return dumps_canonical(obj.tolist())
    if isinstance(obj, np.generic):
        return dumps_canonical(obj.item())
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, complex):
        return f"[{_fmt_float(obj.real)}, {_fmt_float(obj.imag)}]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps_canonical(v) for v in obj) + "]"
    if isinstance(obj, dict):
        parts = [f"{json.dumps(str(k))}: {dumps_canonical(v)}" for k, v in obj.items()]
        return "{" + ", ".join(parts) + "}"
    raise TypeError(f"cannot serialize object of type {type(obj).__name__}")


def save_json(obj, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_canonical(obj))
        fh.write("\n")


def load_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def _matrix_entries(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m, dtype=complex)]


def _entries_matrix(data, name: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{name}: expected nested [re, im] arrays") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError(f"{name}: expected shape (rows, cols, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def channel_to_dict(channel: Channel, repr_name: str | None = None) -> dict:
    """{"d": int, "repr": kraus|superop|choi, "data": nested [re, im] arrays}."""
    name = channel.native_repr if repr_name is None else repr_name
    if name not in _REPRS:
        raise ValueError(f"unknown channel repr {name!r}")
    if name == "kraus":
        data = [_matrix_entries(k) for k in channel.kraus]
    elif name == "superop":
        data = _matrix_entries(channel.superop)
    else:
        data = _matrix_entries(channel.choi)
    return {"d": channel.d, "repr": name, "data": data}


def channel_from_dict(doc: dict) -> Channel:
    for field in ("d", "repr", "data"):
        if field not in doc:
            raise ValueError(f"channel document missing field {field!r}")
    d = int(doc["d"])
    name = doc["repr"]
    if name not in _REPRS:
        raise ValueError(f"unknown channel repr {name!r}")
    if name == "kraus":
        ops = [_entries_matrix(k, "kraus operator") for k in doc["data"]]
        for k in ops:
            if k.shape != (d, d):
                raise ValueError(f"kraus operator shape {k.shape} does not match d={d}")
        return Channel.from_kraus(ops)
    m = _entries_matrix(doc["data"], name)
    if m.shape != (d * d, d * d):
        raise ValueError(f"{name} shape {m.shape} does not match d={d}")
    return Channel.from_superop(m) if name == "superop" else Channel.from_choi(m)


def save_channel(channel: Channel, path: str, repr_name: str | None = None) -> None:
    save_json(channel_to_dict(channel, repr_name), path)


def load_channel(path: str) -> Channel:
    return channel_from_dict(load_json(path))


def stochastic_to_dict(s: np.ndarray) -> dict:
    """{"n": int, "data": row-major real entries}."""
    m = np.asarray(s, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("stochastic matrix must be square")
    return {"n": int(m.shape[0]), "data": [float(v) for v in m.reshape(-1)]}


def stochastic_from_dict(doc: dict) -> np.ndarray:
    for field in ("n", "data"):
        if field not in doc:
            raise ValueError(f"stochastic document missing field {field!r}")
    n = int(doc["n"])
    arr = np.asarray(doc["data"], dtype=float)
    if arr.shape == (n, n):
        return arr.copy()
    if arr.shape == (n * n,):
        return arr.reshape(n, n).copy()
    raise ValueError(f"stochastic data has {arr.size} entries, expected {n * n}")


def save_stochastic(s: np.ndarray, path: str) -> None:
    save_json(stochastic_to_dict(s), path)


def load_stochastic(path: str) -> np.ndarray:
    return stochastic_from_dict(load_json(path))


def cycle_spec_to_dict(spec: CycleSpec) -> dict:
    return {
        "cycles": [
            {"n": c.n, "d": c.d, "mu": [[float(m.real), float(m.imag)] for m in c.mu]}
            for c in spec.cycles
        ]
    }


def cycle_spec_from_dict(doc: dict) -> CycleSpec:
    if "cycles" not in doc:
        raise ValueError("cycle document missing field 'cycles'")
    blocks = []
    for entry in doc["cycles"]:
        for field in ("n", "d", "mu"):
            if field not in entry:
                raise ValueError(f"cycle entry missing field {field!r}")
        mu = [complex(p[0], p[1]) for p in entry["mu"]]
        blocks.append(CycleBlock(int(entry["n"]), int(entry["d"]), tuple(mu)))
    return CycleSpec(tuple(blocks))


def series_to_csv(series: Series) -> str:
    """One value per line: `re` for real series, `re,im` otherwise."""
    real = series.is_real()
    lines = []
    for v in series.values:
        if real:
            lines.append(_fmt_float(v.real))
        else:
            lines.append(f"{_fmt_float(v.real)},{_fmt_float(v.imag)}")
    return "\n".join(lines) + "\n"


def save_series_csv(series: Series, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(series_to_csv(series))


def load_series_csv(path: str) -> Series:
    values = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) not in (1, 2):
                raise ValueError(f"{path}:{lineno}: expected `re` or `re,im`, got {line!r}")
            try:
                re = float(parts[0])
                im = float(parts[1]) if len(parts) == 2 else 0.0
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed number in {line!r}") from exc
            values.append(complex(re, im))
    if not values:
        raise ValueError(f"{path}: no series values found")
    return Series(tuple(values))
