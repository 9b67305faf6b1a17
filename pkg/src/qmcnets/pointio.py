"""Point-set files.

CSV: ``# key=value`` metadata lines, then one point per row written with
``%.17g`` so values round-trip exactly.

Binary: 16-byte header (magic ``QMCP``, little-endian uint64 N, uint32 s)
followed by N*s little-endian float64 values in row-major order.  Metadata is
not stored in the binary form.
"""

import io
import struct
from pathlib import Path

import numpy as np

from .errors import ParseError, ShapeMismatch

__all__ = ["write_csv", "read_csv", "write_binary", "read_binary", "read_points", "format_csv"]

MAGIC = b"QMCP"
_HEADER = struct.Struct("<4sQI")


def format_csv(points, meta=None):
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    buf = io.StringIO()
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    np.savetxt(buf, pts, fmt="%.17g", delimiter=",")
    return buf.getvalue()


def write_csv(path, points, meta=None):
    Path(path).write_text(format_csv(points, meta))


def read_csv(path):
    """Return (points, meta); an empty file raises ParseError."""
    meta = {}
    rows = []
    width = None
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        try:
            row = [float(x) for x in line.split(",")]
        except ValueError:
            raise ParseError(f"non-numeric value in {raw!r}", lineno) from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"expected {width} columns, found {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise ParseError("no points in file")
    return np.array(rows, dtype=np.float64), meta


def write_binary(path, points):
    pts = np.ascontiguousarray(points, dtype="<f8")
    if pts.ndim == 1:
        pts = pts[:, None]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, pts.shape[0], pts.shape[1]))
        fh.write(pts.tobytes())


def read_binary(path):
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ParseError("file shorter than the binary header")
    magic, N, s = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParseError("bad magic number; not a binary point file")
    body = data[_HEADER.size :]
    if len(body) != 8 * N * s:
        raise ShapeMismatch(f"header promises {N}x{s} values, file holds {len(body) // 8}")
    if N == 0:
        raise ParseError("no points in file")
    return np.frombuffer(body, dtype="<f8").reshape(N, s).astype(np.float64), {}


def read_points(path):
    """Read either format, sniffing the magic number."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    return read_binary(path) if head == MAGIC else read_csv(path)
