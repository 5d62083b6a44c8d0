"""Minimal ALDW codec, written against the container's published byte layout.

Deliberately independent of the core package: this side of the repo talks
to the analysis tool exclusively through files, so it carries its own
reader/writer for the format (magic ``ALDW``, u32 version 1, u64 header
length, compact JSON header with keys name/dtype/shape/order and optional
class_labels, then little-endian f32 row-major payload).
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import BadContainer

MAGIC = b"ALDW"
VERSION = 1


def write_aldw(path, name: str, values: np.ndarray, class_labels=None) -> None:
    arr = np.ascontiguousarray(values, dtype=np.float32)
    if arr.ndim != 2:
        raise BadContainer(f"need a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise BadContainer("refusing to write NaN/Inf weights")
    header: dict = {
        "name": name,
        "dtype": "f32",
        "shape": [int(arr.shape[0]), int(arr.shape[1])],
        "order": "row_major",
    }
    if class_labels is not None:
        if len(class_labels) != arr.shape[0]:
            raise BadContainer("label count does not match row count")
        header["class_labels"] = [str(s) for s in class_labels]
    header_bytes = json.dumps(header, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(arr.astype("<f4", copy=False).tobytes(order="C"))


def read_aldw(path) -> tuple[str, np.ndarray, list[str] | None]:
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise BadContainer(f"{path} is not an ALDW file")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise BadContainer(f"unsupported ALDW version {version}")
    (header_len,) = struct.unpack_from("<Q", blob, 8)
    try:
        header = json.loads(blob[16 : 16 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadContainer(f"malformed header in {path}: {exc}") from exc
    k, d = (int(v) for v in header["shape"])
    payload = blob[16 + header_len :]
    if len(payload) != k * d * 4:
        raise BadContainer(
            f"{path}: payload {len(payload)} bytes, expected {k * d * 4}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(k, d)
    labels = header.get("class_labels")
    if labels is not None:
        labels = [str(s) for s in labels]
    return str(header["name"]), values, labels
