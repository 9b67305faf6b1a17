"""Arithmetic in the prime field Z_b and base-b digit bookkeeping.

Digit vectors are stored least-significant digit first: index ``i`` maps to
``(i_1, i_2, ...)`` with ``i = sum(i_k * b**(k-1))``.
"""

import math

import numpy as np

from .errors import IndexOverflow, NotPrime

__all__ = [
    "is_prime",
    "check_base",
    "max_digits",
    "digits_of_index",
    "index_from_digits",
    "radical_inverse",
    "gray_digit_step",
    "gray_digits",
    "add",
    "sub",
    "mul",
    "neg",
    "inv",
    "matmul_mod",
    "rank_mod",
]


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for p in range(3, math.isqrt(n) + 1, 2):
        if n % p == 0:
            return False
    return True


def check_base(b):
    """Return ``b`` as an int, raising :class:`NotPrime` unless it is a prime."""
    b = int(b)
    if not is_prime(b):
        raise NotPrime(f"base must be a prime >= 2, got {b}")
    return b


def max_digits(b):
    """Largest K with b**K <= 2**53, so K-digit fractions are exact doubles."""
    b = check_base(b)
    k = 0
    while b ** (k + 1) <= 2**53:
        k += 1
    return k


def digits_of_index(i, b, length):
    """Base-b digits of ``i``, least significant first, as an int64 array."""
    b = check_base(b)
    i = int(i)
    if i < 0:
        raise ValueError("index must be non-negative")
    if length < 1:
        raise ValueError("length must be positive")
    if i >= b**length:
        raise IndexOverflow(f"index {i} does not fit in {length} base-{b} digits")
    out = np.zeros(length, dtype=np.int64)
    k = 0
    while i:
        i, out[k] = divmod(i, b)
        k += 1
    return out


def index_from_digits(digits, b):
    value = 0
    for d in reversed([int(x) for x in digits]):
        value = value * b + d
    return value


def radical_inverse(i, b):
    """Van der Corput radical inverse: reflect the base-b digits of ``i`` about the radix point."""
    b = check_base(b)
    i = int(i)
    if i < 0:
        raise ValueError("index must be non-negative")
    num, den = 0, 1
    while i:
        i, d = divmod(i, b)
        num = num * b + d
        den *= b
    return num / den


def gray_digit_step(i_next, b):
    """Position (1-based) of the gray-code digit that changes going to ``i_next``.

    The digit at that position is decremented by one in Z_b.  The position is
    one more than the number of trailing zero base-b digits of ``i_next``.
    """
    i_next = int(i_next)
    if i_next < 1:
        raise ValueError("i_next must be >= 1")
    k = 1
    while i_next % b == 0:
        i_next //= b
        k += 1
    return k


def gray_digits(i, b, length):
    """Gray-code digit vector reached from all zeros after ``i`` single-digit decrements.

    Digit k has been decremented ``floor(i/b**(k-1)) - floor(i/b**k)`` times.
    """
    b = check_base(b)
    i = int(i)
    if i >= b**length:
        raise IndexOverflow(f"index {i} does not fit in {length} base-{b} digits")
    out = np.zeros(length, dtype=np.int64)
    hi = i
    for k in range(length):
        lo = hi
        hi = lo // b
        out[k] = (-(lo - hi)) % b
    return out


def add(a, c, b):
    return (a + c) % b


def sub(a, c, b):
    return (a - c) % b


def mul(a, c, b):
    return (a * c) % b


def neg(a, b):
    return (-a) % b


def inv(c, b):
    c %= b
    if c == 0:
        raise ZeroDivisionError(f"0 has no inverse in Z_{b}")
    return pow(c, b - 2, b)


def matmul_mod(A, B, b):
    """Matrix product over Z_b for small integer arrays."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    # int64 holds the partial sums for every base and size used here
    return (A @ B) % b


def rank_mod(M, b):
    """Rank of an integer matrix over Z_b via Gaussian elimination."""
    A = np.array(M, dtype=np.int64) % b
    if A.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    rows, cols = A.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nz = np.nonzero(A[rank:, col])[0]
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        A[rank] = (A[rank] * inv(int(A[rank, col]), b)) % b
        others = np.nonzero(A[:, col])[0]
        for r in others:
            if r != rank:
                A[r] = (A[r] - A[r, col] * A[rank]) % b
        rank += 1
    return rank
