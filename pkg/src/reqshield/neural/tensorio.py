"""Deterministic on-disk container for named float64 tensors.

Layout: a magic line, one JSON header line (names, shapes, offsets, plus
caller metadata), then the concatenated little-endian float64 payloads in
C order. The same tensors and metadata always produce the same bytes, so
checkpoint files can be compared and hashed directly.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ArtifactMismatch
from ..fileio import atomic_write_bytes

MAGIC = b"RSTENSORS/1\n"
TENSOR_FORMAT_VERSION = 1


def tensors_to_bytes(tensors: dict[str, np.ndarray], meta: dict) -> bytes:
    entries = []
    payload = bytearray()
    for name, arr in tensors.items():
        raw = np.ascontiguousarray(arr, dtype="<f8").tobytes()
        entries.append(
            {
                "name": name,
                "shape": list(arr.shape),
                "offset": len(payload),
                "nbytes": len(raw),
            }
        )
        payload += raw
    header = {
        "format_version": TENSOR_FORMAT_VERSION,
        "meta": meta,
        "tensors": entries,
    }
    header_line = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return MAGIC + header_line + b"\n" + bytes(payload)


def save_tensors(path: str | Path, tensors: dict[str, np.ndarray], meta: dict) -> None:
    atomic_write_bytes(Path(path), tensors_to_bytes(tensors, meta))


def tensors_from_bytes(data: bytes) -> tuple[dict[str, np.ndarray], dict]:
    if not data.startswith(MAGIC):
        raise ArtifactMismatch("not a tensor container (bad magic)")
    newline = data.find(b"\n", len(MAGIC))
    if newline == -1:
        raise ArtifactMismatch("tensor container header is truncated")
    try:
        header = json.loads(data[len(MAGIC) : newline].decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ArtifactMismatch(f"bad tensor container header: {exc}") from exc
    if header.get("format_version") != TENSOR_FORMAT_VERSION:
        raise ArtifactMismatch(
            f"unsupported tensor format_version {header.get('format_version')!r}"
        )
    payload = data[newline + 1 :]
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        try:
            name = entry["name"]
            shape = tuple(entry["shape"])
            offset = entry["offset"]
            nbytes = entry["nbytes"]
        except (KeyError, TypeError) as exc:
            raise ArtifactMismatch(f"bad tensor entry: {exc}") from exc
        chunk = payload[offset : offset + nbytes]
        if len(chunk) != nbytes or nbytes != int(np.prod(shape)) * 8:
            raise ArtifactMismatch(f"tensor {name!r} payload is truncated")
        tensors[name] = np.frombuffer(chunk, dtype="<f8").reshape(shape).copy()
    return tensors, header.get("meta", {})


def load_tensors(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    return tensors_from_bytes(Path(path).read_bytes())
