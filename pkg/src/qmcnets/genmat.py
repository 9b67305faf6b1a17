"""Generator matrices: the data model, built-in constructions and file I/O.

Matrix file format (whitespace separated text)::

    # comment lines start with '#'
    b s m
    <m rows of m digits for C_1>

    <m rows of m digits for C_2>
    ...

Row k of C_j produces the k-th output digit of coordinate j from the index
digits; entries act on least-significant-first index digit vectors.
"""

from dataclasses import dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from .errors import BaseTooSmall, InvalidDigit, LengthMismatch, ParseError
from .field import check_base

__all__ = [
    "GeneratorMatrixSet",
    "faure_matrices",
    "identity_matrices",
    "encoding_length",
    "encode_upper",
    "decode_upper",
    "load_matrices",
    "save_matrices",
    "DEFAULT_M_MAX",
]

DEFAULT_M_MAX = 32


@dataclass(frozen=True, eq=False)
class GeneratorMatrixSet:
    """s square generator matrices over Z_b, stacked as an (s, m_max, m_max) array."""

    b: int
    matrices: np.ndarray
    name: str = ""
    _hash: int = field(default=0, init=False, repr=False)

    def __post_init__(self):
        b = check_base(self.b)
        mats = np.array(self.matrices, dtype=np.int64)
        if mats.ndim == 2:
            mats = mats[None]
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise LengthMismatch(f"expected (s, m, m) matrices, got shape {mats.shape}")
        if mats.shape[0] < 1 or mats.shape[1] < 1:
            raise LengthMismatch("need s >= 1 and m_max >= 1")
        if mats.min() < 0 or mats.max() >= b:
            raise InvalidDigit(f"matrix entries must lie in [0, {b})")
        mats.setflags(write=False)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "_hash", hash((b, mats.tobytes(), mats.shape)))

    @property
    def s(self):
        return self.matrices.shape[0]

    @property
    def m_max(self):
        return self.matrices.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GeneratorMatrixSet):
            return NotImplemented
        return (
            self.b == other.b
            and self.matrices.shape == other.matrices.shape
            and np.array_equal(self.matrices, other.matrices)
        )

    def __hash__(self):
        return self._hash

    def leading(self, m=None, s=None):
        """Leading ``s`` matrices truncated to their top-left m x m block."""
        m = self.m_max if m is None else m
        s = self.s if s is None else s
        if not (1 <= m <= self.m_max and 1 <= s <= self.s):
            raise LengthMismatch(f"(m={m}, s={s}) outside ({self.m_max}, {self.s})")
        return GeneratorMatrixSet(self.b, self.matrices[:s, :m, :m], self.name)

    def select(self, dims):
        """Sub-collection of matrices for the 0-based dimension indices ``dims``."""
        dims = list(dims)
        return GeneratorMatrixSet(self.b, self.matrices[dims], self.name)


def identity_matrices(b, s, m):
    """Identity generators in every dimension (the van der Corput sequence per coordinate)."""
    eye = np.eye(m, dtype=np.int64)
    return GeneratorMatrixSet(b, np.repeat(eye[None], s, axis=0), f"identity-b{b}")


def faure_matrices(b, s, m):
    """Faure generators: C_j is the (j-1)-th power of the upper Pascal matrix mod b."""
    b = check_base(b)
    if b < s:
        raise BaseTooSmall(f"Faure construction needs b >= s, got b={b}, s={s}")
    mats = np.zeros((s, m, m), dtype=np.int64)
    for j in range(s):
        for k in range(m):
            for l in range(k, m):
                mats[j, k, l] = comb(l, k) * pow(j, l - k, b) % b
    return GeneratorMatrixSet(b, mats, f"faure-b{b}")


def encoding_length(m):
    return (m * m - m) // 2


def encode_upper(matrix):
    """Strict upper triangle of a binary unit-upper-triangular matrix, row by row."""
    C = np.asarray(matrix)
    m = C.shape[0]
    if C.shape != (m, m):
        raise LengthMismatch("matrix must be square")
    iu = np.triu_indices(m, k=1)
    return C[iu].astype(np.uint8)


def decode_upper(cells, m):
    """Inverse of :func:`encode_upper`: unit diagonal, cells above it, zeros below."""
    cells = np.asarray(cells, dtype=np.int64).ravel()
    if cells.size != encoding_length(m):
        raise LengthMismatch(f"expected {encoding_length(m)} cells for m={m}, got {cells.size}")
    C = np.eye(m, dtype=np.int64)
    C[np.triu_indices(m, k=1)] = cells
    return C


def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line.split()


def parse_matrices(text, name=""):
    lines = list(_tokens(text))
    if not lines:
        raise ParseError("empty matrix file")
    lineno, header = lines[0]
    if len(header) != 3:
        raise ParseError("header must be 'b s m'", lineno)
    try:
        if all("=" in x for x in header):
            # keyed form "b=2 s=2 m=3", any order
            kv = dict(x.split("=", 1) for x in header)
            b, s, m = int(kv["b"]), int(kv["s"]), int(kv["m"])
        else:
            b, s, m = (int(x) for x in header)
    except (ValueError, KeyError):
        raise ParseError("header must hold three integers", lineno) from None
    b = check_base(b)
    body = lines[1:]
    if len(body) != s * m:
        raise ParseError(f"expected {s * m} matrix rows, found {len(body)}", lineno)
    mats = np.zeros((s, m, m), dtype=np.int64)
    for idx, (lineno, row) in enumerate(body):
        if len(row) != m:
            raise ParseError(f"expected {m} digits, found {len(row)}", lineno)
        for col, tok in enumerate(row):
            try:
                d = int(tok)
            except ValueError:
                raise ParseError(f"not an integer: {tok!r}", lineno) from None
            if not 0 <= d < b:
                raise InvalidDigit(f"digit {d} outside [0, {b})", lineno)
            mats[idx // m, idx % m, col] = d
    return GeneratorMatrixSet(b, mats, name)


def load_matrices(path):
    path = Path(path)
    return parse_matrices(path.read_text(), name=path.stem)


def format_matrices(gms):
    out = []
    if gms.name:
        out.append(f"# {gms.name}")
    out.append(f"{gms.b} {gms.s} {gms.m_max}")
    for j in range(gms.s):
        if j:
            out.append("")
        for row in gms.matrices[j]:
            out.append(" ".join(str(int(d)) for d in row))
    return "\n".join(out) + "\n"


def save_matrices(gms, path):
    Path(path).write_text(format_matrices(gms))
