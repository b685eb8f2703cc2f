"""Self-describing single-file container for named arrays plus JSON metadata.

Byte layout (version 1), little-endian throughout:

    bytes 0..3    magic ``b"TCF1"``
    bytes 4..11   uint64: byte length H of the UTF-8 JSON header
    bytes 12..12+H the header
    remainder     raw array payload

The header is ``{"arrays": {name: {"shape": [...], "dtype": "<f8"|"<i8",
"offset": o}}, "meta": {...}}`` where ``offset`` indexes into the payload
and rows are stored row-major. ``meta`` is arbitrary JSON supplied by the
caller. Round-trips are bit-exact.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

__all__ = ["write_container", "read_container", "ContainerError"]

_MAGIC = b"TCF1"
_DTYPES = {"<f8": np.dtype("<f8"), "<i8": np.dtype("<i8")}


class ContainerError(ValueError):
    """Malformed or incompatible container file."""


def write_container(path: str | Path, arrays: dict[str, np.ndarray], meta: dict | None = None) -> None:
    entries = {}
    payload = bytearray()
    for name, arr in arrays.items():
        shape = list(np.asarray(arr).shape)
        arr = np.ascontiguousarray(arr)
        if arr.dtype.kind == "f":
            arr = arr.astype("<f8", copy=False)
        elif arr.dtype.kind in "iub":
            arr = arr.astype("<i8", copy=False)
        else:
            raise ContainerError(f"unsupported dtype {arr.dtype} for {name!r}")
        entries[name] = {
            "shape": shape,
            "dtype": arr.dtype.str,
            "offset": len(payload),
        }
        payload += arr.tobytes()
    header = json.dumps({"arrays": entries, "meta": meta or {}}).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(len(header).to_bytes(8, "little"))
        fh.write(header)
        fh.write(bytes(payload))


def read_container(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise ContainerError(f"{path}: bad magic {blob[:4]!r}")
    hlen = int.from_bytes(blob[4:12], "little")
    try:
        header = json.loads(blob[12 : 12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ContainerError(f"{path}: corrupt header: {exc}") from exc
    payload = blob[12 + hlen :]
    arrays = {}
    for name, entry in header["arrays"].items():
        dtype = _DTYPES.get(entry["dtype"])
        if dtype is None:
            raise ContainerError(f"{path}: unknown dtype {entry['dtype']!r}")
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(payload, dtype=dtype, count=count, offset=start)
        arrays[name] = arr.reshape(shape).copy()
    return arrays, header.get("meta", {})
