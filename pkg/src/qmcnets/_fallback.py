"""Pure numpy versions of the hot kernels (same signatures as ``_kernels``)."""

import math

import numpy as np

_CHUNK = 1 << 14


def _trailing_zero_digits(idx, b):
    idx = np.asarray(idx, dtype=np.int64).copy()
    tz = np.zeros(idx.shape, dtype=np.int64)
    live = idx % b == 0
    while live.any():
        tz[live] += 1
        idx[live] //= b
        live = live & (idx % b == 0)
    return tz


def gray_points_b2(cols, state0, start, n, K):
    """Gray-order base-2 points from bit-packed columns.

    ``cols[j, l]`` packs column l of the premultiplied matrix for coordinate j
    with digit k at bit ``K - k``.  Returns points, packed numerators and the
    number of digit operations performed.
    """
    cols = np.asarray(cols, dtype=np.uint64)
    s = cols.shape[0]
    nums = np.empty((n, s), dtype=np.uint64)
    nums[0] = np.asarray(state0, dtype=np.uint64)
    if n > 1:
        steps = np.arange(start + 1, start + n, dtype=np.int64)
        tz = _trailing_zero_digits(steps, 2)
        upd = cols[:, tz].T
        upd[0] ^= nums[0]
        nums[1:] = np.bitwise_xor.accumulate(upd, axis=0)
    points = nums.astype(np.float64) * 2.0**-K
    return points, nums, (n - 1) * s * K


def gray_points(ct, state0, b, start, n):
    """Gray-order points for a general prime base from digit matrices.

    ``ct`` has shape (s, K, m); ``state0`` (s, K) holds the digits of point
    ``start``.  Each step subtracts one column of ``ct`` from the digits.
    """
    ct = np.asarray(ct, dtype=np.int64)
    s, K, _ = ct.shape
    weights = np.array([b ** (K - 1 - k) for k in range(K)], dtype=np.int64)
    nums = np.empty((n, s), dtype=np.int64)
    state = np.asarray(state0, dtype=np.int64) % b
    nums[0] = state @ weights
    done = 1
    while done < n:
        stop = min(n, done + _CHUNK)
        steps = np.arange(start + done, start + stop, dtype=np.int64)
        tz = _trailing_zero_digits(steps, b)
        # (s, K, chunk) column updates, accumulated then reduced mod b
        upd = np.cumsum(-ct[:, :, tz], axis=2)
        digits = (state[:, :, None] + upd) % b
        nums[done:stop] = np.einsum("skn,k->ns", digits, weights)
        state = digits[:, :, -1]
        done = stop
    points = nums.astype(np.float64) / float(b**K)
    return points, nums, (n - 1) * s * K


def _bernoulli_tables(x, alpha):
    B1 = x - 0.5
    if alpha == 1:
        return B1, None
    B2 = x * x - x + 1.0 / 6.0
    return B1, B2


def _g_block(B1, B2, xi, xj, alpha):
    d = xi[:, None, :] - xj[None, :, :]
    d = np.where(d < 0.0, d + 1.0, d)
    g = B1[0][:, None, :] * B1[1][None, :, :]
    if alpha == 1:
        g += 0.5 * (d * d - d + 1.0 / 6.0)
    else:
        g += 0.25 * B2[0][:, None, :] * B2[1][None, :, :]
        d2 = d * d
        g -= (d2 * d2 - 2.0 * d2 * d + d2 - 1.0 / 30.0) / 24.0
    return g


def pair_sums(x, alpha, gammas, threads=0):
    """Sum over all ordered pairs of prod_r(1 + gamma*g_r) - 1, one total per gamma."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    gammas = np.atleast_1d(np.asarray(gammas, dtype=np.float64))
    N, s = x.shape
    B1, B2 = _bernoulli_tables(x, alpha)
    block = max(1, (1 << 20) // max(1, N * s))
    partial = [[] for _ in gammas]
    for lo in range(0, N, block):
        hi = min(N, lo + block)
        g = _g_block(
            (B1[lo:hi], B1),
            None if B2 is None else (B2[lo:hi], B2),
            x[lo:hi],
            x,
            alpha,
        )
        for t, gam in enumerate(gammas):
            # running product minus one: p <- p + gamma*g*(1 + p)
            p = np.zeros(g.shape[:2])
            for r in range(s):
                p += gam * g[:, :, r] * (1.0 + p)
            partial[t].extend(p.sum(axis=1).tolist())
    return np.array([math.fsum(v) for v in partial])
