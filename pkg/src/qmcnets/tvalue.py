"""Quality parameter t of digital nets.

``exact_t`` uses the linear-independence condition on generator-matrix rows;
``geometric_oracle_t`` counts points in every elementary interval and is kept
as an independent check.  ``t_table`` builds the cumulative T(m, s) grid.
"""

import csv
import io
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import BudgetExceeded, DimensionMismatch, NotPowerOfBase
from .field import inv

__all__ = [
    "exact_t",
    "raw_t_grid",
    "geometric_oracle_t",
    "TTable",
    "t_table",
    "compare_tables",
    "ProjectionStats",
    "projection_stats",
    "compositions",
]


class _Basis2:
    """Row-echelon basis over Z_2 with rows packed into Python ints."""

    __slots__ = ("pivots",)

    def __init__(self, pivots=None):
        self.pivots = {} if pivots is None else pivots

    def copy(self):
        return _Basis2(dict(self.pivots))

    def add(self, v):
        while v:
            low = v & -v
            p = self.pivots.get(low)
            if p is None:
                self.pivots[low] = v
                return True
            v ^= p
        return False


class _BasisB:
    """Row-echelon basis over Z_b (b odd prime); rows are tuples of digits."""

    __slots__ = ("b", "pivots")

    def __init__(self, b, pivots=None):
        self.b = b
        self.pivots = {} if pivots is None else pivots

    def copy(self):
        return _BasisB(self.b, dict(self.pivots))

    def add(self, v):
        b = self.b
        v = list(v)
        for c in range(len(v)):
            if v[c] == 0:
                continue
            p = self.pivots.get(c)
            if p is None:
                f = inv(v[c], b)
                self.pivots[c] = [(x * f) % b for x in v]
                return True
            f = v[c]
            v = [(x - f * y) % b for x, y in zip(v, p)]
        return False


def _row_vectors(gms, m, dims):
    """Per dimension, the first m columns of each of the first m rows."""
    b = gms.b
    out = []
    for j in dims:
        rows = gms.matrices[j, :m, :m]
        if b == 2:
            out.append([int(sum(int(bit) << c for c, bit in enumerate(r))) for r in rows])
        else:
            out.append([tuple(int(x) for x in r) for r in rows])
    return out


def _condition_holds(rows, total, b):
    """True if every composition of ``total`` over the dimensions selects independent rows."""
    ndim = len(rows)

    def rec(basis, p, remaining):
        if p == ndim - 1:
            cur = basis.copy()
            return all(cur.add(rows[p][k]) for k in range(remaining))
        cur = basis
        if not rec(cur, p + 1, remaining):
            return False
        cur = cur.copy()
        for d in range(1, remaining + 1):
            if not cur.add(rows[p][d - 1]):
                return False
            if not rec(cur, p + 1, remaining - d):
                return False
        return True

    start = _Basis2() if b == 2 else _BasisB(b)
    return rec(start, 0, total)


def exact_t(gms, m=None, dims=None, t_min=0):
    """Smallest t such that the leading m columns satisfy the rank condition.

    ``dims`` are 0-based dimension indices (default: all).  ``t_min`` may be
    passed when a lower bound is already known (t never drops when a
    dimension is added).
    """
    m = gms.m_max if m is None else int(m)
    if not 1 <= m <= gms.m_max:
        raise ValueError(f"m must be in [1, {gms.m_max}]")
    dims = list(range(gms.s)) if dims is None else list(dims)
    if not dims:
        raise ValueError("dims must be non-empty")
    rows = _row_vectors(gms, m, dims)
    for t in range(max(0, t_min), m + 1):
        if _condition_holds(rows, m - t, gms.b):
            return t
    return m


def compositions(total, parts):
    """All tuples of ``parts`` non-negative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _cell_indices(pts_int, b, K, shape):
    # pts_int: (N, s) exact numerators over b**K; cell digit = numerator // b**(K-k)
    idx = np.zeros(pts_int.shape[0], dtype=np.int64)
    for r, k in enumerate(shape):
        if k:
            idx = idx * b**k + pts_int[:, r] // b ** (K - k)
    return idx


def geometric_oracle_t(P, b, m):
    """t from the net definition: smallest t with b**t points in every box of volume b**(t-m)."""
    pts = np.asarray(getattr(P, "points", P), dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    N, s = pts.shape
    if N != b**m:
        raise NotPowerOfBase(f"need exactly b**m = {b**m} points, got {N}")
    nums = getattr(P, "numerators", None)
    K = getattr(P, "K", None)
    if nums is not None and K is not None and getattr(P, "b", None) == b and K >= m:
        exact = np.asarray(nums, dtype=np.int64)
    else:
        # quantise to m digits; the tiny relative nudge keeps grid points that
        # round just below a boundary in the correct box
        K = m
        exact = np.floor(pts * b**m * (1 + 1e-12)).astype(np.int64)
        exact = np.minimum(exact, b**m - 1)
    for t in range(m + 1):
        ok = True
        for shape in compositions(m - t, s):
            counts = np.bincount(_cell_indices(exact, b, K, shape), minlength=b ** (m - t))
            if counts.size != b ** (m - t) or np.any(counts != b**t):
                ok = False
                break
        if ok:
            return t
    return m


def raw_t_grid(gms, m_max=None, s_max=None):
    """Array r[m-1, s-1] = exact t of the leading s matrices truncated to m x m."""
    m_max = gms.m_max if m_max is None else m_max
    s_max = gms.s if s_max is None else s_max
    grid = np.zeros((m_max, s_max), dtype=np.int64)
    for m in range(1, m_max + 1):
        lower = 0
        for s in range(1, s_max + 1):
            lower = exact_t(gms, m, range(s), t_min=lower)
            grid[m - 1, s - 1] = lower
    return grid


@dataclass
class TTable:
    """Cumulative quality table; ``values[m-1, s-1] = T(m, s)``."""

    values: np.ndarray
    set_name: str = ""

    @property
    def m_max(self):
        return self.values.shape[0]

    @property
    def s_max(self):
        return self.values.shape[1]

    def __getitem__(self, ms):
        m, s = ms
        return int(self.values[m - 1, s - 1])

    def to_text(self):
        """Aligned text with one row per s and one column per m."""
        width = max(2, len(str(int(self.values.max()))) + 1)
        head = "s\\m".rjust(4) + "".join(str(m).rjust(width) for m in range(1, self.m_max + 1))
        lines = [head]
        for s in range(1, self.s_max + 1):
            lines.append(str(s).rjust(4) + "".join(str(int(v)).rjust(width) for v in self.values[:, s - 1]))
        return "\n".join(lines) + "\n"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s"] + [f"m{m}" for m in range(1, self.m_max + 1)])
        for s in range(1, self.s_max + 1):
            w.writerow([s] + [int(v) for v in self.values[:, s - 1]])
        return buf.getvalue()


def t_table(gms, m_max=None, s_max=None):
    raw = raw_t_grid(gms, m_max, s_max)
    cum = np.maximum.accumulate(np.maximum.accumulate(raw, axis=0), axis=1)
    return TTable(cum, gms.name)


def compare_tables(A, B, initials=("A", "B")):
    """Grid of '*' (equal), the better table's initial, or 'nX' when better by n > 1.

    Returned as a list of rows indexed [s-1][m-1].
    """
    if A.values.shape != B.values.shape:
        raise DimensionMismatch(f"table shapes differ: {A.values.shape} vs {B.values.shape}")
    grid = []
    for s in range(A.s_max):
        row = []
        for m in range(A.m_max):
            a, bv = int(A.values[m, s]), int(B.values[m, s])
            if a == bv:
                row.append("*")
            else:
                who = initials[0] if a < bv else initials[1]
                diff = abs(a - bv)
                row.append(f"{diff}{who}" if diff > 1 else who)
        grid.append(row)
    return grid


def format_comparison(grid, fmt="text"):
    if fmt == "csv":
        head = "s," + ",".join(f"m{m}" for m in range(1, len(grid[0]) + 1))
        return "\n".join([head] + [f"{s}," + ",".join(row) for s, row in enumerate(grid, start=1)]) + "\n"
    width = max(3, max(len(c) for row in grid for c in row) + 1)
    m_max = len(grid[0])
    lines = ["s\\m".rjust(4) + "".join(str(m).rjust(width) for m in range(1, m_max + 1))]
    for s, row in enumerate(grid, start=1):
        lines.append(str(s).rjust(4) + "".join(c.rjust(width) for c in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ProjectionStats:
    r: int
    m: int
    avg: float
    max: int
    count: int


def projection_stats(gms, r, m=None, budget=100_000):
    """Average and maximum exact t over all r-element dimension subsets."""
    m = gms.m_max if m is None else m
    if not 1 <= r <= gms.s:
        raise ValueError(f"r must be in [1, {gms.s}]")
    count = math.comb(gms.s, r)
    if count > budget:
        raise BudgetExceeded(f"{count} subsets exceed the budget of {budget}; sample subsets instead")
    ts = [exact_t(gms, m, u) for u in combinations(range(gms.s), r)]
    return ProjectionStats(r, m, float(np.mean(ts)), int(max(ts)), count)
