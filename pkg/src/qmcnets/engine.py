"""Point generation: scrambled and tumbled digital sequences, lattices, LHS and MC.

Every digital point is computed from premultiplied generators::

    digits(x_ij) = Ct_j psi(i) + et_j        (mod b)

with ``Ct_j = L_j C_j L^T`` and ``et_j = L_j C_j e + e_j``.  The L_j / e_j
pair is the linear Owen-style scramble of coordinate j; L / e tumble the index
digits (Faure-Tezuka).  Generator matrices are padded with zero rows up to K
output digits so the scramble randomises digits beyond m_max.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import IndexOverflow, ShapeMismatch
from .field import check_base, digits_of_index, max_digits
from .genmat import GeneratorMatrixSet, faure_matrices, identity_matrices
from .rng import RngStream

__all__ = [
    "MODES",
    "ScrambleSpec",
    "PointBatch",
    "identity_spec",
    "random_scramble_spec",
    "premultiply",
    "scrambled_digits_direct",
    "generate",
    "rank1_lattice",
    "extensible_lattice",
    "lhs_sample",
    "mc_sample",
    "default_digits",
    "sample_points",
    "next_prime",
    "FAMILIES",
]

MODES = ("none", "owen", "tumble", "both", "shift")
_MODE_ALIASES = {"digital_shift_only": "shift", "scramble": "owen", "owen+tumble": "both"}

_ROLE_LJ, _ROLE_EJ, _ROLE_L, _ROLE_E = 0, 1, 2, 3


def _norm_mode(mode):
    mode = _MODE_ALIASES.get(mode, mode)
    if mode not in MODES:
        raise ValueError(f"unknown scramble mode {mode!r}; choose from {MODES}")
    return mode


def _as_stream(rng):
    if rng is None:
        return RngStream(0)
    if isinstance(rng, RngStream):
        return rng
    return RngStream(int(rng))


@dataclass(frozen=True, eq=False)
class ScrambleSpec:
    """One random linear scramble / tumble instance.

    ``Lj`` is (s, K, K) lower triangular with nonzero diagonal, ``ej`` (s, K);
    ``L`` is (m, m) lower triangular with nonzero diagonal and ``e`` has m digits.
    """

    mode: str
    b: int
    K: int
    Lj: np.ndarray
    ej: np.ndarray
    L: np.ndarray
    e: np.ndarray
    seed: int | None = None

    @property
    def s(self):
        return self.Lj.shape[0]

    @property
    def m_max(self):
        return self.L.shape[0]

    def digest(self):
        """Short stable hash of the scramble contents, for output metadata."""
        import hashlib

        h = hashlib.sha256()
        for arr in (self.Lj, self.ej, self.L, self.e):
            h.update(np.ascontiguousarray(arr, dtype=np.int64).tobytes())
        h.update(f"{self.mode}/{self.b}/{self.K}".encode())
        return h.hexdigest()[:16]


def default_digits(b, m_max):
    """K = m_max + 10 scrambled digits, capped at what a double represents exactly."""
    return min(m_max + 10, max_digits(b))


def identity_spec(gms, K=None):
    K = gms.m_max if K is None else int(K)
    s, m = gms.s, gms.m_max
    return ScrambleSpec(
        mode="none",
        b=gms.b,
        K=K,
        Lj=np.repeat(np.eye(K, dtype=np.int64)[None], s, axis=0),
        ej=np.zeros((s, K), dtype=np.int64),
        L=np.eye(m, dtype=np.int64),
        e=np.zeros(m, dtype=np.int64),
    )


def _random_lower(gen, b, size):
    # row by row so that a larger size extends a smaller one (nested scrambles)
    L = np.zeros((size, size), dtype=np.int64)
    for k in range(size):
        if k:
            L[k, :k] = gen.integers(0, b, size=k)
        L[k, k] = gen.integers(1, b) if b > 2 else 1
    return L


def _random_digits(gen, b, size):
    return np.array([gen.integers(0, b) for _ in range(size)], dtype=np.int64)


def random_scramble_spec(gms, mode="owen", K=None, rng=None):
    """Draw L_j, e_j (and L, e when tumbling) uniformly as required for scrambling.

    Off-diagonal and shift digits are uniform on Z_b, diagonals uniform on
    {1, ..., b-1}.  Each (role, dimension) pair reads its own substream and
    draws row by row, so the first K rows agree across different K.
    """
    mode = _norm_mode(mode)
    stream = _as_stream(rng)
    b, s, m = gms.b, gms.s, gms.m_max
    K = default_digits(b, m) if K is None else int(K)
    if K < 1:
        raise ValueError("K must be >= 1")
    if K > max_digits(b):
        raise ValueError(f"K={K} exceeds the {max_digits(b)} base-{b} digits a double holds")
    if mode != "none" and K < m:
        warnings.warn(f"scrambling K={K} < m_max={m} digits truncates the generators", stacklevel=2)
    spec = identity_spec(gms, K)
    Lj, ej, L, e = spec.Lj.copy(), spec.ej.copy(), spec.L.copy(), spec.e.copy()
    if mode in ("owen", "both"):
        for j in range(s):
            Lj[j] = _random_lower(stream.generator(_ROLE_LJ, j), b, K)
    if mode in ("owen", "both", "shift"):
        for j in range(s):
            ej[j] = _random_digits(stream.generator(_ROLE_EJ, j), b, K)
    if mode in ("tumble", "both"):
        L = _random_lower(stream.generator(_ROLE_L), b, m)
        e = _random_digits(stream.generator(_ROLE_E), b, m)
    return ScrambleSpec(mode, b, K, Lj, ej, L, e, seed=stream.seed)


def _padded(gms, K):
    s, m = gms.s, gms.m_max
    C = np.zeros((s, K, m), dtype=np.int64)
    rows = min(K, m)
    C[:, :rows, :] = gms.matrices[:, :rows, :]
    return C


def premultiply(gms, spec):
    """Return (Ct, et): Ct_j = L_j C_j L^T (K x m_max) and et_j = L_j C_j e + e_j."""
    if spec.b != gms.b or spec.s != gms.s or spec.m_max != gms.m_max:
        raise ShapeMismatch(
            f"scramble spec (b={spec.b}, s={spec.s}, m={spec.m_max}) does not match "
            f"generators (b={gms.b}, s={gms.s}, m={gms.m_max})"
        )
    b = gms.b
    C = _padded(gms, spec.K)
    LC = np.einsum("skr,srl->skl", spec.Lj, C) % b
    Ct = np.einsum("skl,ql->skq", LC, spec.L) % b
    et = (np.einsum("skl,l->sk", LC, spec.e) + spec.ej) % b
    return Ct, et


def scrambled_digits_direct(gms, spec, i):
    """Digits of point i straight from L_j C_j (L^T psi(i) + e) + e_j, no premultiplication.

    Returns an (s, K) digit array.
    """
    b, m = gms.b, gms.m_max
    psi = digits_of_index(i, b, m)
    tumbled = (spec.L.T @ psi + spec.e) % b
    C = _padded(gms, spec.K)
    out = np.empty((gms.s, spec.K), dtype=np.int64)
    for j in range(gms.s):
        y = (C[j] @ tumbled) % b
        out[j] = (spec.Lj[j] @ y + spec.ej[j]) % b
    return out


@dataclass
class PointBatch:
    """N points in [0,1)^s plus how they were made.

    ``numerators`` (when set) holds the exact digit integers so that
    ``points == numerators / b**K``.
    """

    points: np.ndarray
    family: str
    order: str = "natural"
    b: int | None = None
    spec: ScrambleSpec | None = None
    start_index: int = 0
    numerators: np.ndarray | None = None
    K: int | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        if self.points.ndim == 1:
            self.points = self.points[:, None]
        if self.points.shape[0] < 1:
            raise ValueError("a point batch needs N >= 1")

    @property
    def N(self):
        return self.points.shape[0]

    @property
    def s(self):
        return self.points.shape[1]

    def __len__(self):
        return self.N


def _weights(b, K):
    return np.array([b ** (K - 1 - k) for k in range(K)], dtype=np.int64)


def generate(gms, spec=None, N=None, order="gray", start_index=0, return_ops=False):
    """Points ``start_index .. start_index+N-1`` of a (scrambled) digital sequence.

    ``order="natural"`` evaluates each index from its digit vector directly.
    ``order="gray"`` visits index ``start_index (+) G(k)`` for k = 0..N-1, where
    G is the base-b gray code and (+) is digitwise addition mod b; each point
    follows from the previous one by subtracting a single premultiplied
    column.  A call whose start is aligned to b**m with N = b**m therefore
    yields exactly the natural-order block, reordered.
    With ``return_ops`` the number of digit updates is returned as well.
    """
    b, m = gms.b, gms.m_max
    spec = identity_spec(gms) if spec is None else spec
    if N is None:
        N = b**m - start_index
    N, start_index = int(N), int(start_index)
    if N < 1 or start_index < 0:
        raise ValueError("need N >= 1 and start_index >= 0")
    if start_index + N > b**m:
        raise IndexOverflow(f"start_index + N = {start_index + N} exceeds b**m_max = {b}**{m} = {b**m}")
    K = spec.K
    if K > max_digits(b):
        raise ValueError(f"K={K} exceeds the {max_digits(b)} base-{b} digits a double holds")
    Ct, et = premultiply(gms, spec)
    w = _weights(b, K)
    if order == "natural":
        idx = np.arange(start_index, start_index + N, dtype=np.int64)
        psi = np.empty((N, m), dtype=np.int64)
        q = idx.copy()
        for k in range(m):
            q, psi[:, k] = np.divmod(q, b)
        digits = (np.einsum("nl,skl->nsk", psi, Ct) + et[None]) % b
        nums = digits @ w
        points = nums.astype(np.float64) / float(b**K)
        ops = N * gms.s * K * m
    elif order == "gray":
        # walk the gray code of the offset k = 0..N-1 from the natural digits
        # of start_index, so a call on an aligned b**m block covers that block
        psi0 = digits_of_index(start_index, b, m)
        state0 = (Ct @ psi0 + et) % b
        if b == 2:
            cols = np.einsum("skl,k->sl", Ct, w).astype(np.uint64)
            packed0 = (state0 @ w).astype(np.uint64)
            points, nums, ops = kernels.gray_points_b2(cols, packed0, 0, N, K)
            nums = nums.astype(np.int64)
        else:
            points, nums, ops = kernels.gray_points(Ct, state0, b, 0, N)
    else:
        raise ValueError(f"order must be 'natural' or 'gray', got {order!r}")
    batch = PointBatch(
        points=points,
        family=gms.name or "digital",
        order=order,
        b=b,
        spec=spec,
        start_index=start_index,
        numerators=nums,
        K=K,
        seed=spec.seed,
    )
    return (batch, ops) if return_ops else batch


def _frac(x):
    x = x - np.floor(x)
    # floating roundoff can land exactly on 1.0
    x[x >= 1.0] = 0.0
    return x


def rank1_lattice(h, N, shift=None):
    """Rank-1 lattice {i h / N + shift} for i = 0..N-1 (fractional parts)."""
    h = np.atleast_1d(np.asarray(h, dtype=np.int64))
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    i = np.arange(N, dtype=np.int64)[:, None]
    pts = ((i * (h[None, :] % N)) % N) / N
    if shift is not None:
        pts = _frac(pts + np.asarray(shift, dtype=np.float64)[None, :])
    return PointBatch(pts, family="lattice", meta={"h": h.tolist(), "N": N})


def extensible_lattice(h, b, N, shift=None):
    """Extensible lattice {Q_b(i) h + shift}; the first b**m points form a rank-1 lattice."""
    b = check_base(b)
    h = np.atleast_1d(np.asarray(h, dtype=np.int64))
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    m = 0
    while b**m < N:
        m += 1
    den = b**m
    i = np.arange(N, dtype=np.int64)
    q = np.zeros(N, dtype=np.int64)
    rest = i.copy()
    for _ in range(m):
        rest, d = np.divmod(rest, b)
        q = q * b + d
    pts = ((q[:, None] * (h[None, :] % den)) % den) / den
    if shift is not None:
        pts = _frac(pts + np.asarray(shift, dtype=np.float64)[None, :])
    return PointBatch(pts, family="ext-lattice", b=b, meta={"h": h.tolist()})


def _as_generator(rng, *key):
    if isinstance(rng, np.random.Generator):
        return rng
    return _as_stream(rng).generator(*key)


def lhs_sample(N, s, rng=None):
    """Latin hypercube sample: each column puts one point in every stratum [k/N, (k+1)/N)."""
    gen = _as_generator(rng, 7)
    strata = np.stack([gen.permutation(N) for _ in range(s)], axis=1)
    pts = (strata + gen.random((N, s))) / N
    return PointBatch(pts, family="lhs")


def mc_sample(N, s, rng=None):
    gen = _as_generator(rng, 8)
    return PointBatch(gen.random((N, s)), family="mc")


FAMILIES = ("faure", "identity", "matrix-file", "lattice", "ext-lattice", "lhs", "mc")

# Korobov generator used for lattice families unless a vector is given
KOROBOV_ETA = 17797


def next_prime(n):
    from .field import is_prime

    n = max(2, int(n))
    while not is_prime(n):
        n += 1
    return n


def korobov_vector(s, eta=KOROBOV_ETA, modulus=None):
    h = [1]
    for _ in range(1, s):
        h.append(h[-1] * eta if modulus is None else h[-1] * eta % modulus)
    return np.array(h, dtype=np.int64)


def _digits_needed(b, N):
    m = 0
    while b**m < N:
        m += 1
    return max(m, 1)


def sample_points(
    family,
    N,
    s=None,
    b=None,
    scramble="owen",
    K=None,
    seed=0,
    replicate=0,
    matrices=None,
    m_max=None,
    order="gray",
    h=None,
):
    """One replicate of a randomised point set of the named family.

    Digital families ("faure", "identity", "matrix-file") apply ``scramble``;
    lattice families get a uniform random shift unless ``scramble == "none"``.
    Replicate r draws from the substream ``RngStream(seed).child(r)``.
    """
    stream = RngStream(seed).child(replicate)
    if family in ("faure", "identity", "matrix-file"):
        if family == "matrix-file":
            if matrices is None:
                raise ValueError("matrix-file family needs a GeneratorMatrixSet")
            gms = matrices if s is None else matrices.leading(s=s)
        else:
            if s is None:
                raise ValueError("dimension s is required")
            bb = (next_prime(s) if family == "faure" else 2) if b is None else b
            mm = _digits_needed(bb, N) if m_max is None else m_max
            gms = faure_matrices(bb, s, mm) if family == "faure" else identity_matrices(bb, s, mm)
        if N > gms.b**gms.m_max:
            raise IndexOverflow(f"N={N} exceeds b**m_max = {gms.b}**{gms.m_max} = {gms.b**gms.m_max}")
        K_eff = K if K is not None else (default_digits(gms.b, gms.m_max) if scramble != "none" else gms.m_max)
        spec = random_scramble_spec(gms, scramble, K_eff, stream)
        batch = generate(gms, spec, N, order=order)
        batch.family = family
        return batch
    if s is None:
        raise ValueError("dimension s is required")
    if family == "lattice":
        hv = korobov_vector(s, modulus=N) if h is None else np.asarray(h)
        shift = None if scramble == "none" else stream.generator(9).random(s)
        return rank1_lattice(hv, N, shift)
    if family == "ext-lattice":
        bb = 2 if b is None else b
        hv = korobov_vector(s, modulus=bb ** _digits_needed(bb, N)) if h is None else np.asarray(h)
        shift = None if scramble == "none" else stream.generator(9).random(s)
        return extensible_lattice(hv, bb, N, shift)
    if family == "lhs":
        return lhs_sample(N, s, stream)
    if family == "mc":
        return mc_sample(N, s, stream)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
