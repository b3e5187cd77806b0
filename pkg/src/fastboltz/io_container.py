"""Versioned binary container used for kernel-table caches and checkpoints.

Byte layout (all integers little-endian):

    bytes 0:8    magic (8 ASCII bytes, padded with '_')
    bytes 8:12   format version, uint32
    bytes 12:16  header length H, uint32
    bytes 16:16+H  header: UTF-8 JSON object with
                   {"meta": {...}, "arrays": [{"name", "dtype", "shape"}, ...]}
    remainder    raw array payloads, C order, concatenated in header order

Writers emit to a temporary file in the target directory and rename into
place, so readers never observe partial files.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .errors import CheckpointError

_HEADER_FMT = "<II"


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_container(path, magic: bytes, version: int, meta: dict,
                    arrays: dict[str, np.ndarray]) -> None:
    if len(magic) > 8:
        raise ValueError("magic must be at most 8 bytes")
    magic = magic.ljust(8, b"_")
    manifest = [{"name": name, "dtype": str(np.asarray(a).dtype),
                 "shape": list(np.asarray(a).shape)} for name, a in arrays.items()]
    header = _canonical_json({"meta": meta, "arrays": manifest}).encode("utf-8")

    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(magic)
            fh.write(struct.pack(_HEADER_FMT, version, len(header)))
            fh.write(header)
            for name in arrays:
                fh.write(np.ascontiguousarray(arrays[name]).tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_container(path, magic: bytes, expected_version: int):
    """Read a container; returns (meta, arrays).  Raises CheckpointError on
    bad magic, version mismatch, or truncation."""
    magic = magic.ljust(8, b"_")
    with open(path, "rb") as fh:
        head = fh.read(16)
        if len(head) < 16:
            raise CheckpointError(f"{path}: truncated container header")
        if head[:8] != magic:
            raise CheckpointError(
                f"{path}: bad magic {head[:8]!r}, expected {magic!r}")
        version, hlen = struct.unpack(_HEADER_FMT, head[8:16])
        if version != expected_version:
            raise CheckpointError(
                f"{path}: format version {version}, expected {expected_version}")
        raw = fh.read(hlen)
        if len(raw) < hlen:
            raise CheckpointError(f"{path}: truncated header block")
        header = json.loads(raw.decode("utf-8"))
        arrays = {}
        for spec in header["arrays"]:
            dtype = np.dtype(spec["dtype"])
            shape = tuple(spec["shape"])
            count = int(np.prod(shape, dtype=np.int64)) if shape else 1
            buf = fh.read(count * dtype.itemsize)
            if len(buf) < count * dtype.itemsize:
                raise CheckpointError(f"{path}: truncated payload for {spec['name']}")
            arrays[spec["name"]] = np.frombuffer(buf, dtype=dtype).reshape(shape).copy()
    return header["meta"], arrays
