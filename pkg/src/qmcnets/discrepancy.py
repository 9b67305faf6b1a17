"""Kernel (generalized L2) squared discrepancy of a point set.

For smoothness ``alpha`` and projection weight ``gamma`` the one-dimensional
kernel is

    k(x, y) = 1 + gamma * g(x, y),
    g(x, y) = sum_{k=1..alpha} B_k(x) B_k(y) / (k!)^2
              - (-1)^alpha / (2 alpha)! * B_{2 alpha}({x - y})

and ``D^2 = -1 + N^-2 sum_{i,j} prod_r k(x_ir, x_jr)``.  Because gamma
multiplies the whole non-constant part, D^2 is a polynomial of degree s in
gamma with no constant term; its gamma^j coefficient collects the j-dimensional
projections.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import IllConditioned, UnsupportedDegree

__all__ = [
    "DiscrepancyParams",
    "DiscrepancyReport",
    "bernoulli_poly",
    "squared_discrepancy",
    "squared_discrepancy_alpha2",
    "scale_constant",
    "projection_decomposition",
    "newton_coefficients",
    "rms_scaled_discrepancy",
]

# exact Bernoulli numbers B_0..B_4
_BERNOULLI_NUMBERS = (1.0, -0.5, 1.0 / 6.0, 0.0, -1.0 / 30.0)


def bernoulli_poly(i, y):
    """Bernoulli polynomial B_i(y) for i = 0..4 (scalar or array y)."""
    y = np.asarray(y, dtype=np.float64)
    if i == 0:
        out = np.ones_like(y)
    elif i == 1:
        out = y - 0.5
    elif i == 2:
        out = y * y - y + 1.0 / 6.0
    elif i == 3:
        out = y**3 - 1.5 * y * y + 0.5 * y
    elif i == 4:
        out = y**4 - 2.0 * y**3 + y * y - 1.0 / 30.0
    else:
        raise UnsupportedDegree(f"Bernoulli polynomials are available for degree 0..4, not {i}")
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DiscrepancyParams:
    alpha: int = 2
    gamma: float = 1.0

    def __post_init__(self):
        if self.alpha not in (1, 2):
            raise UnsupportedDegree(f"alpha must be 1 or 2, got {self.alpha}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


@dataclass
class DiscrepancyReport:
    d2: float
    d2_scaled: float
    scale_constant: float
    per_order: list = field(default_factory=list)
    alpha: int = 2
    gamma: float = 1.0
    N: int = 0
    s: int = 0

    def to_dict(self):
        return {
            "d2": self.d2,
            "d2_scaled": self.d2_scaled,
            "scale_constant": self.scale_constant,
            "per_order": list(self.per_order),
            "alpha": self.alpha,
            "gamma": self.gamma,
            "N": self.N,
            "s": self.s,
        }


def _as_points(P):
    pts = getattr(P, "points", P)
    pts = np.asarray(pts, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] < 1:
        raise ValueError("need at least one point")
    return pts


def _d2_many(pts, alpha, gammas, threads=0):
    N = pts.shape[0]
    return kernels.pair_sums(pts, alpha, np.asarray(gammas, dtype=np.float64), threads) / float(N) ** 2


def diagonal_integral(alpha):
    """Integral over [0,1] of g(x, x): sum_k int B_k^2/(k!)^2 - (-1)^alpha B_2alpha(0)/(2alpha)!."""
    total = 0.0
    for k in range(1, alpha + 1):
        # int_0^1 B_k(x)^2 dx = (-1)^(k-1) (k!)^2 B_2k / (2k)!
        total += (-1) ** (k - 1) * _BERNOULLI_NUMBERS[2 * k] / math.factorial(2 * k)
    total -= (-1) ** alpha * _BERNOULLI_NUMBERS[2 * alpha] / math.factorial(2 * alpha)
    return total


def scale_constant(s, params=None):
    """Dimension constant c(s) = prod_r(1 + gamma*int g(x,x)) - 1.

    A simple random sample of N points has E[D^2] = c(s)/N, so dividing by
    c(s) makes the RMS scaled discrepancy of random points equal N^-1/2.
    """
    params = params or DiscrepancyParams()
    return math.expm1(s * math.log1p(params.gamma * diagonal_integral(params.alpha)))


def squared_discrepancy(P, params=None, per_order=False, threads=0):
    """Squared discrepancy report of a point set (O(N^2 s) pair sum)."""
    params = params or DiscrepancyParams()
    pts = _as_points(P)
    N, s = pts.shape
    d2 = float(_d2_many(pts, params.alpha, [params.gamma], threads)[0])
    c = scale_constant(s, params)
    orders = []
    if per_order:
        orders = projection_decomposition(pts, params.alpha, threads=threads).tolist()
    return DiscrepancyReport(d2, d2 / c, c, orders, params.alpha, params.gamma, N, s)


def squared_discrepancy_alpha2(P, gamma=1.0):
    """alpha = 2 discrepancy written out with B_1, B_2 and B_4 directly (numpy, O(N^2 s) memory-light)."""
    pts = _as_points(P)
    N, s = pts.shape
    total = 0.0
    for i in range(N):
        x = pts[i]
        d = x[None, :] - pts
        d = np.where(d < 0, d + 1.0, d)
        term = (
            bernoulli_poly(1, x)[None, :] * bernoulli_poly(1, pts)
            + 0.25 * bernoulli_poly(2, x)[None, :] * bernoulli_poly(2, pts)
            - bernoulli_poly(4, d) / 24.0
        )
        total += math.fsum(np.prod(1.0 + gamma * term, axis=1) - 1.0)
    return total / N**2


def newton_coefficients(nodes, values):
    """Monomial coefficients (low to high) of the interpolating polynomial, via divided differences."""
    x = np.asarray(nodes, dtype=np.float64)
    dd = np.array(values, dtype=np.float64)
    n = x.size
    for level in range(1, n):
        dd[level:] = (dd[level:] - dd[level - 1 : -1]) / (x[level:] - x[: n - level])
    # expand Newton form: p(g) = dd0 + (g-x0)(dd1 + (g-x1)(dd2 + ...))
    coef = np.zeros(n)
    coef[0] = dd[n - 1]
    deg = 0
    for k in range(n - 2, -1, -1):
        # coef <- coef * (g - x_k) + dd_k
        shifted = np.zeros(n)
        shifted[1 : deg + 2] = coef[: deg + 1]
        shifted[: deg + 1] -= x[k] * coef[: deg + 1]
        shifted[0] += dd[k]
        coef = shifted
        deg += 1
    return coef


def projection_decomposition(P, alpha=2, nodes=None, threads=0, rtol=1e-6):
    """Coefficients (D2_1, ..., D2_s) with D^2(P, gamma) = sum_j gamma^j D2_j.

    D^2 is evaluated at s distinct positive nodes (default gamma_k = k/s) and
    at gamma = 0, where it vanishes, then interpolated by divided differences.
    """
    pts = _as_points(P)
    s = pts.shape[1]
    nodes = np.arange(1, s + 1, dtype=np.float64) / s if nodes is None else np.asarray(nodes, dtype=np.float64)
    if nodes.size != s or np.any(nodes <= 0) or np.unique(nodes).size != s:
        raise ValueError("need s distinct positive interpolation nodes")
    vals = _d2_many(pts, alpha, nodes, threads)
    xs = np.concatenate([[0.0], nodes])
    ys = np.concatenate([[0.0], vals])
    coef = newton_coefficients(xs, ys)
    recon = np.polyval(coef[::-1], nodes)
    scale = np.max(np.abs(vals)) if np.any(vals) else 1.0
    if np.max(np.abs(recon - vals)) > rtol * scale:
        raise IllConditioned("interpolation residual exceeds tolerance")
    return coef[1:]


def rms_scaled_discrepancy(batches, params=None, threads=0):
    """Root mean square of the scaled discrepancy sqrt(D^2/c) over replicate point sets."""
    params = params or DiscrepancyParams()
    vals = []
    for P in batches:
        pts = _as_points(P)
        c = scale_constant(pts.shape[1], params)
        vals.append(_d2_many(pts, params.alpha, [params.gamma], threads)[0] / c)
    return math.sqrt(max(0.0, float(np.mean(vals))))
