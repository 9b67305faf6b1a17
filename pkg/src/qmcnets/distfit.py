"""Fit scrambled-net squared discrepancies to a shifted chi-square mixture.

The model is ``W = c + sum_v beta_v X_v`` with independent chi-square(1)
variables X_v.  Parameters are chosen by matching log quantiles of an
empirical sample of size M against order statistics of a model sample of size
Lsamp (an odd multiple of M).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import FitDiverged, NonPositiveSample, NotOddMultiple
from .integrands import inverse_normal_cdf
from .rng import RngStream

__all__ = [
    "MixtureModel",
    "QuantileFitConfig",
    "FitResult",
    "SimplexResult",
    "sample_mixture",
    "quantile_indices",
    "loss",
    "fit",
    "simplex_minimize",
    "qq_pairs",
]


@dataclass(frozen=True)
class MixtureModel:
    betas: tuple = ()
    c: float = 0.0

    def __post_init__(self):
        betas = tuple(sorted((float(x) for x in self.betas), reverse=True))
        if any(x < 0 for x in betas) or self.c < 0:
            raise ValueError("mixture weights and constant must be non-negative")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "c", float(self.c))

    @property
    def n(self):
        return len(self.betas)

    def mean(self):
        return sum(self.betas) + self.c

    def variance(self):
        return 2.0 * sum(x * x for x in self.betas)


@dataclass
class QuantileFitConfig:
    M: int = 1000
    Lsamp: int = 11000
    n: int = 3
    xatol: float = 1e-6
    fatol: float = 1e-10
    maxiter: int = 4000
    seed: int = 0

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        _check_odd_multiple(self.M, self.Lsamp)


def _check_odd_multiple(M, Lsamp):
    q, r = divmod(Lsamp, M)
    if r or q % 2 == 0:
        raise NotOddMultiple(f"Lsamp={Lsamp} is not an odd multiple of M={M}")
    return q


def _normals(gen, shape):
    u = gen.random(shape)
    u[u == 0.0] = 2.0**-54
    return inverse_normal_cdf(u)


def sample_mixture(model, count, rng=None):
    """Sorted draws of c + sum beta_v Z_v^2 with standard normal Z_v."""
    gen = rng if isinstance(rng, np.random.Generator) else RngStream(0 if rng is None else rng).generator(11)
    if model.n == 0:
        return np.full(count, model.c)
    z = _normals(gen, (count, model.n))
    return np.sort(model.c + (z * z) @ np.asarray(model.betas))


def quantile_indices(M, Lsamp):
    """p_i = (2i-1)/(2M) and 1-based k_i = iL/M - (L-M)/(2M), exact integers."""
    q = _check_odd_multiple(M, Lsamp)
    i = np.arange(1, M + 1)
    p = (2 * i - 1) / (2 * M)
    # L = qM with q odd, so k_i = i*q - (q-1)/2
    k = i * q - (q - 1) // 2
    return p, k


def _common_squares(config, n):
    gen = RngStream(config.seed).generator(12)
    z = _normals(gen, (config.Lsamp, max(n, 1)))
    return z * z


def _model_quantiles(betas, c, squares, k):
    if len(betas) == 0:
        w = np.full(squares.shape[0], c)
    else:
        # column v always carries the v-th largest weight
        ordered = np.sort(np.asarray(betas, dtype=np.float64))[::-1]
        w = c + squares[:, : len(betas)] @ ordered
    w.sort()
    return w[k - 1]


def _check_empirical(empirical):
    z = np.sort(np.asarray(empirical, dtype=np.float64))
    if np.any(z <= 0):
        raise NonPositiveSample("all empirical values must be positive for the log loss")
    return z


def loss(model, empirical, config, squares=None):
    """Sum of squared gaps between empirical and model log quantiles.

    Model quantiles come from a fixed-seed sample of size ``config.Lsamp``
    (common random numbers), so the loss is a deterministic function of the
    parameters.
    """
    z = _check_empirical(empirical)
    if z.size != config.M:
        raise ValueError(f"expected M={config.M} empirical values, got {z.size}")
    _, k = quantile_indices(config.M, config.Lsamp)
    if squares is None:
        squares = _common_squares(config, model.n)
    w = _model_quantiles(model.betas, model.c, squares, k)
    with np.errstate(divide="ignore"):
        gaps = np.log(z) - np.log(w)
    return float(np.sum(gaps * gaps))


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    nit: int
    converged: bool
    message: str = ""


def simplex_minimize(f, x0, xatol=1e-8, fatol=1e-12, maxiter=None, initial_step=None):
    """Nelder-Mead simplex minimisation; ``converged`` is False when maxiter was hit."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    f0 = f(x0)
    if not np.isfinite(f0):
        raise ValueError("objective is not finite at the starting point")
    options = {"xatol": xatol, "fatol": fatol, "adaptive": x0.size > 3}
    if maxiter is not None:
        options["maxiter"] = maxiter
        options["maxfev"] = 4 * maxiter
    if initial_step is not None:
        simplex = [x0]
        for i in range(x0.size):
            v = x0.copy()
            v[i] += initial_step
            simplex.append(v)
        options["initial_simplex"] = np.array(simplex)
    res = optimize.minimize(f, x0, method="Nelder-Mead", options=options)
    x, fx = res.x, float(res.fun)
    if not fx <= f0:
        x, fx = x0, f0
    return SimplexResult(x, fx, int(res.nit), bool(res.success), str(res.message))


@dataclass
class FitResult:
    model: MixtureModel
    loss: float
    initial_loss: float
    iterations: int
    converged: bool
    initial_model: MixtureModel = field(default=None)

    def to_dict(self):
        return {
            "n": self.model.n,
            "betas": list(self.model.betas),
            "c": self.model.c,
            "loss": self.loss,
            "initial_loss": self.initial_loss,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def initial_model(empirical, n, ratio=0.5):
    """Geometric betas matched to the sample variance; c just below the sample minimum."""
    z = np.asarray(empirical, dtype=np.float64)
    c = 0.9 * float(z.min())
    if n == 0:
        return MixtureModel((), float(np.exp(np.mean(np.log(z)))))
    weights = ratio ** np.arange(n)
    beta1 = math.sqrt(max(float(np.var(z)), 1e-300) / (2.0 * float(np.sum(weights**2))))
    return MixtureModel(tuple(beta1 * weights), c)


def fit(empirical, config=None):
    """Fit a MixtureModel with ``config.n`` chi-square terms by log-quantile matching."""
    z = _check_empirical(empirical)
    config = config or QuantileFitConfig(M=z.size, Lsamp=11 * z.size)
    n = config.n
    if np.ptp(z) == 0:
        # a constant sample is matched exactly by the pure shift model
        n = 0
    init = initial_model(z, n)
    if n == 0:
        # the loss is minimised in closed form by the geometric mean
        value = loss(init, z, config)
        return FitResult(init, value, value, 0, True, init)
    squares = _common_squares(config, n)
    _, k = quantile_indices(config.M, config.Lsamp)
    logz = np.log(z)

    def objective(theta):
        params = np.exp(theta)
        w = _model_quantiles(params[:n], params[n], squares, k)
        if np.any(w <= 0):
            return math.inf
        gaps = logz - np.log(w)
        return float(np.sum(gaps * gaps))

    theta0 = np.log(np.array(list(init.betas) + [max(init.c, 1e-300)]))
    init_loss = objective(theta0)
    res = simplex_minimize(objective, theta0, config.xatol, config.fatol, config.maxiter, initial_step=0.5)
    # a restart from the optimum shakes the simplex out of early collapse
    res2 = simplex_minimize(objective, res.x, config.xatol, config.fatol, config.maxiter, initial_step=0.1)
    if res2.fun <= res.fun:
        res = SimplexResult(res2.x, res2.fun, res.nit + res2.nit, res2.converged, res2.message)
    if not np.isfinite(res.fun):
        raise FitDiverged("quantile loss is not finite at the optimum")
    params = np.exp(res.x)
    model = MixtureModel(tuple(params[:n]), params[n])
    return FitResult(model, res.fun, init_loss, res.nit, res.converged, init)


def qq_pairs(model, empirical, config):
    """(p_i, empirical quantile, model quantile) rows for Q-Q plotting."""
    z = _check_empirical(empirical)
    p, k = quantile_indices(config.M, config.Lsamp)
    w = _model_quantiles(model.betas, model.c, _common_squares(config, model.n), k)
    return np.column_stack([p, z, w])
