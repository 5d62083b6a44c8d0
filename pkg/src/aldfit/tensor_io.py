"""Reading and writing weight matrices in the ALDW container and CSV.

ALDW byte layout, in file order:

    magic           4 bytes, ``b"ALDW"``
    version         u32 little-endian, currently 1
    header length   u64 little-endian
    header          UTF-8 JSON of exactly that many bytes with keys, in
                    order: ``name`` (string), ``dtype`` (always ``"f32"``),
                    ``shape`` ([K, D]), ``order`` (always ``"row_major"``),
                    and optionally ``class_labels`` (K strings)
    payload         K*D IEEE-754 binary32 values, little-endian, row-major

No padding, no trailing bytes. The writer emits the header as compact JSON
(no whitespace) with the key order above, so identical matrices always
produce identical files.

The CSV fallback is one row per class, comma-separated decimal floats
printed with 9 significant digits (enough to round-trip binary32 exactly).
If the first token of a row does not parse as a float it is taken as the
class label; labels must therefore not look like numbers.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BadMagic, IoFailure, NonFinite, ShapeMismatch

MAGIC = b"ALDW"
VERSION = 1

# binary32 needs at most 9 significant decimal digits to round-trip
CSV_SIG_DIGITS = 9


@dataclass(frozen=True)
class WeightMatrix:
    """K x D matrix of final-FC weights, one row per class.

    ``values`` is normalized to a read-only, C-contiguous float32 array, so
    instances are safe to share across threads.
    """

    name: str
    values: np.ndarray
    class_labels: list[str] | None = field(default=None)

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.values, dtype=np.float32)
        if arr.ndim != 2:
            raise ShapeMismatch(f"values must be 2-D, got ndim={arr.ndim}")
        k, d = arr.shape
        if k < 1:
            raise ShapeMismatch("need at least one class row")
        if d < 2:
            raise ShapeMismatch(f"need at least 2 features per class, got D={d}")
        if not np.all(np.isfinite(arr)):
            raise NonFinite("weight matrix contains NaN or Inf")
        if self.class_labels is not None and len(self.class_labels) != k:
            raise ShapeMismatch(
                f"{len(self.class_labels)} labels for {k} classes"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def num_classes(self) -> int:
        return self.values.shape[0]

    @property
    def num_features(self) -> int:
        return self.values.shape[1]

    def row(self, class_index: int) -> np.ndarray:
        """Weight vector of one class as float64 (regression precision)."""
        return self.values[class_index].astype(np.float64)


def to_bytes(matrix: WeightMatrix) -> bytes:
    """Encode a matrix as an ALDW byte string."""
    header: dict = {
        "name": matrix.name,
        "dtype": "f32",
        "shape": [matrix.num_classes, matrix.num_features],
        "order": "row_major",
    }
    if matrix.class_labels is not None:
        header["class_labels"] = list(matrix.class_labels)
    header_bytes = json.dumps(header, separators=(",", ":")).encode("utf-8")
    payload = matrix.values.astype("<f4", copy=False).tobytes(order="C")
    return b"".join(
        [
            MAGIC,
            struct.pack("<I", VERSION),
            struct.pack("<Q", len(header_bytes)),
            header_bytes,
            payload,
        ]
    )


def from_bytes(blob: bytes) -> WeightMatrix:
    """Decode an ALDW byte string into a matrix."""
    if blob[:4] != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, got {blob[:4]!r}")
    if len(blob) < 16:
        raise ShapeMismatch("truncated ALDW header")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != VERSION:
        raise BadMagic(f"unsupported ALDW version {version}")
    (header_len,) = struct.unpack_from("<Q", blob, 8)
    header_end = 16 + header_len
    if len(blob) < header_end:
        raise ShapeMismatch("header length exceeds file size")
    try:
        header = json.loads(blob[16:header_end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadMagic(f"malformed ALDW header: {exc}") from exc

    try:
        k, d = (int(v) for v in header["shape"])
        name = str(header["name"])
        dtype = header["dtype"]
        order = header["order"]
    except (KeyError, TypeError, ValueError) as exc:
        raise BadMagic(f"ALDW header missing required fields: {exc}") from exc
    if dtype != "f32" or order != "row_major":
        raise BadMagic(f"unsupported dtype/order {dtype!r}/{order!r}")

    payload = blob[header_end:]
    expected = k * d * 4
    if len(payload) != expected:
        raise ShapeMismatch(
            f"payload holds {len(payload)} bytes, header shape {k}x{d} "
            f"needs {expected}"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(k, d)

    labels = header.get("class_labels")
    if labels is not None:
        labels = [str(s) for s in labels]
    return WeightMatrix(name=name, values=values, class_labels=labels)


def write_matrix(matrix: WeightMatrix, path: str | Path) -> None:
    """Write a matrix to ``path``, ALDW for .aldw/.bin, CSV for .csv."""
    path = Path(path)
    try:
        if path.suffix.lower() == ".csv":
            path.write_text(_to_csv(matrix), encoding="utf-8")
        else:
            path.write_bytes(to_bytes(matrix))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def read_matrix(path: str | Path) -> WeightMatrix:
    """Read a matrix from an ALDW or CSV file.

    Dispatch is by content: files starting with the ALDW magic are parsed
    as binary, anything else is attempted as CSV before giving up with
    :class:`BadMagic`.
    """
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] == MAGIC:
        return from_bytes(blob)
    try:
        text = blob.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise BadMagic(f"{path} is neither ALDW nor text CSV") from exc
    return _from_csv(text, name=path.stem)


def _to_csv(matrix: WeightMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for k in range(matrix.num_classes):
        cells = [f"%.{CSV_SIG_DIGITS}g" % float(v) for v in matrix.values[k]]
        if matrix.class_labels is not None:
            cells.insert(0, matrix.class_labels[k])
        writer.writerow(cells)
    return buf.getvalue()


def _from_csv(text: str, name: str) -> WeightMatrix:
    rows: list[list[float]] = []
    labels: list[str] = []
    labeled: bool | None = None
    for lineno, cells in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not cells or all(c.strip() == "" for c in cells):
            continue
        first = cells[0].strip()
        has_label = not _is_float(first)
        if labeled is None:
            labeled = has_label
        elif labeled != has_label:
            raise ShapeMismatch(
                f"line {lineno}: mixed labeled and unlabeled CSV rows"
            )
        if has_label:
            labels.append(first)
            cells = cells[1:]
        if not cells:
            raise BadMagic(f"line {lineno}: no numeric cells")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise BadMagic(f"line {lineno}: not parseable as CSV floats") from exc
    if not rows:
        raise BadMagic("no data rows found in CSV")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ShapeMismatch("CSV rows have differing widths")
    values = np.asarray(rows, dtype=np.float32)
    return WeightMatrix(name=name, values=values, class_labels=labels or None)


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True
