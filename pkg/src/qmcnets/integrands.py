"""Test integrands and the randomized quadrature benchmark.

Genz families follow the usual forms (a = difficulty vector, u = shift):

=============== ===========================================
oscillatory     cos(2 pi u_1 + sum a_i x_i)
product_peak    prod (a_i^-2 + (x_i - u_i)^2)^-1
corner_peak     (1 + sum a_i x_i)^-(s+1)
gaussian        exp(-sum a_i^2 (x_i - u_i)^2)
c0              exp(-sum a_i |x_i - u_i|)
discontinuous   0 if x_1 > u_1 or x_2 > u_2, else exp(sum a_i x_i)
=============== ===========================================

When ``a`` is not given it is drawn uniformly and rescaled so that
``sum(a) = GENZ_DIFFICULTY[kind]``.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .errors import DomainError, UnsupportedDimension

__all__ = [
    "Integrand",
    "BenchmarkRecord",
    "BenchmarkResult",
    "inverse_normal_cdf",
    "product_integrand",
    "keister_integrand",
    "constant_integrand",
    "genz_family",
    "GENZ_KINDS",
    "GENZ_DIFFICULTY",
    "periodize",
    "benchmark",
    "digit_accuracy",
    "read_params",
    "load_params",
    "integrand_from_params",
]


@dataclass
class Integrand:
    name: str
    s: int
    func: Callable[[np.ndarray], np.ndarray]
    exact_value: float | None = None
    note: str = ""
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[1] != self.s:
            raise ValueError(f"{self.name} expects {self.s} coordinates, got {x.shape[1]}")
        return self.func(x)


def inverse_normal_cdf(p):
    """Standard normal quantile function; p must lie strictly inside (0, 1)."""
    arr = np.asarray(p, dtype=np.float64)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError("inverse normal CDF is defined on the open interval (0, 1)")
    out = special.ndtri(arr)
    return out if out.ndim else float(out)


def constant_integrand(s, value=1.0):
    return Integrand("constant", s, lambda x: np.full(x.shape[0], value), float(value), "exact")


def product_integrand(a):
    """prod_j [1 + a_j (x_j - 1/2)], whose integral over the unit cube is 1."""
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))

    def f(x):
        return np.prod(1.0 + a[None, :] * (x - 0.5), axis=1)

    return Integrand("product", a.size, f, 1.0, "exact", {"a": a.tolist()})


def default_product_weights(s):
    return 0.4 + np.arange(1, s + 1) / 10.0


_KEISTER_EPS = 1e-15


def keister_integrand(s):
    """pi^(s/2) cos(sqrt(sum_j Phi^-1(x_j)^2 / 2)); coordinates clamped to [1e-15, 1-1e-15]."""

    def f(x):
        z = inverse_normal_cdf(np.clip(x, _KEISTER_EPS, 1.0 - _KEISTER_EPS))
        return math.pi ** (s / 2) * np.cos(np.sqrt(np.sum(z * z, axis=1) / 2.0))

    return Integrand("keister", s, f, None, "no closed form used; reference computed separately")


GENZ_KINDS = ("oscillatory", "product_peak", "corner_peak", "gaussian", "c0", "discontinuous")
GENZ_DIFFICULTY = {
    "oscillatory": 9.0,
    "product_peak": 7.25,
    "corner_peak": 1.85,
    "gaussian": 7.03,
    "c0": 20.4,
    "discontinuous": 4.3,
}


def _genz_exact(kind, a, u):
    s = a.size
    if kind == "oscillatory":
        val = complex(math.cos(2 * math.pi * u[0]), math.sin(2 * math.pi * u[0]))
        for ai in a:
            val *= 1.0 if ai == 0 else (complex(math.cos(ai), math.sin(ai)) - 1.0) / complex(0.0, ai)
        return val.real
    if kind == "product_peak":
        return float(np.prod(a * (np.arctan(a * (1.0 - u)) + np.arctan(a * u))))
    if kind == "corner_peak":
        if s > 20:
            raise UnsupportedDimension("corner peak exact value uses 2^s inclusion-exclusion; s <= 20")
        total = math.fsum(
            (-1) ** bin(mask).count("1") / (1.0 + sum(a[i] for i in range(s) if mask >> i & 1))
            for mask in range(1 << s)
        )
        return total / (math.factorial(s) * float(np.prod(a)))
    if kind == "gaussian":
        return float(np.prod(math.sqrt(math.pi) / (2 * a) * (special.erf(a * (1 - u)) + special.erf(a * u))))
    if kind == "c0":
        return float(np.prod((2.0 - np.exp(-a * u) - np.exp(-a * (1 - u))) / a))
    if kind == "discontinuous":
        upper = np.ones(s)
        upper[: min(s, 2)] = u[: min(s, 2)]
        return float(np.prod(np.where(a == 0, upper, np.expm1(a * upper) / np.where(a == 0, 1, a))))
    raise ValueError(kind)


def genz_family(kind, s, params=None, rng=None):
    """A Genz test integrand with closed-form exact value.

    ``params`` may hold ``a`` and ``u``; missing entries are drawn from ``rng``
    (a numpy Generator or seed).
    """
    if kind not in GENZ_KINDS:
        raise ValueError(f"unknown Genz family {kind!r}; choose from {GENZ_KINDS}")
    params = dict(params or {})
    gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    if "a" in params:
        a = np.atleast_1d(np.asarray(params["a"], dtype=np.float64))
    else:
        a = gen.random(s)
        a *= GENZ_DIFFICULTY[kind] / a.sum()
    u = np.atleast_1d(np.asarray(params["u"], dtype=np.float64)) if "u" in params else gen.random(s)
    if a.size != s or u.size != s:
        raise ValueError("a and u must have s entries")

    if kind == "oscillatory":
        def f(x):
            return np.cos(2 * math.pi * u[0] + x @ a)
    elif kind == "product_peak":
        def f(x):
            return np.prod(1.0 / (a**-2.0 + (x - u) ** 2), axis=1)
    elif kind == "corner_peak":
        def f(x):
            return (1.0 + x @ a) ** (-(s + 1))
    elif kind == "gaussian":
        def f(x):
            return np.exp(-np.sum((a * (x - u)) ** 2, axis=1))
    elif kind == "c0":
        def f(x):
            return np.exp(-np.abs(x - u) @ a)
    else:
        def f(x):
            inside = x[:, 0] <= u[0]
            if s > 1:
                inside &= x[:, 1] <= u[1]
            return np.where(inside, np.exp(x @ a), 0.0)

    try:
        exact = _genz_exact(kind, a, u)
        note = "closed form"
    except UnsupportedDimension:
        exact, note = None, "exact value unavailable for s > 20"
    return Integrand(f"genz-{kind}", s, f, exact, note, {"a": a.tolist(), "u": u.tolist()})


def periodize(f):
    """Compose with x -> |2x - 1| coordinatewise; the integral is unchanged."""

    def g(x):
        return f.func(np.abs(2.0 * x - 1.0))

    return Integrand(f"periodized-{f.name}", f.s, g, f.exact_value, f.note, dict(f.params))


def digit_accuracy(rel_err):
    """max(-log10(relative error), 0); larger is better."""
    rel_err = np.asarray(rel_err, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.maximum(-np.log10(rel_err), 0.0)


@dataclass
class BenchmarkRecord:
    N: int
    R: int
    mean: float
    rms_rel_err: float | None
    rms_abs_err: float | None
    std_err: float
    estimates: list = field(default_factory=list, repr=False)


@dataclass
class BenchmarkResult:
    integrand: str
    family: str
    records: list

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "R", "mean", "rms_rel_err", "std_err"])
        for r in self.records:
            rel = "" if r.rms_rel_err is None else repr(r.rms_rel_err)
            w.writerow([r.N, r.R, repr(r.mean), rel, repr(r.std_err)])
        return buf.getvalue()

    def to_json(self):
        return json.dumps(
            {
                "integrand": self.integrand,
                "family": self.family,
                "records": [
                    {k: v for k, v in r.__dict__.items() if k != "estimates"} for r in self.records
                ],
            },
            indent=1,
        )


def benchmark(f, sampler, N_list, R, family=""):
    """RMS error of sample-mean estimates over R independent randomisations per N.

    ``sampler(N, r)`` must return an (N, s) array (or a PointBatch) for
    replicate r.  With a known exact value the RMS relative error is reported;
    otherwise the spread of the estimates stands in for the error.
    """
    if R < 1:
        raise ValueError("R must be >= 1")
    records = []
    for N in sorted(int(n) for n in N_list):
        est = np.empty(R)
        for r in range(R):
            pts = sampler(N, r)
            pts = getattr(pts, "points", pts)
            est[r] = math.fsum(f(pts)) / N
        mean = float(np.mean(est))
        se = float(np.std(est, ddof=1) / math.sqrt(R)) if R > 1 else 0.0
        if f.exact_value is not None:
            abs_rms = float(np.sqrt(np.mean((est - f.exact_value) ** 2)))
            rel = abs_rms / abs(f.exact_value) if f.exact_value != 0 else None
        else:
            abs_rms = float(np.std(est))
            rel = None
        records.append(BenchmarkRecord(N, R, mean, rel, abs_rms, se, est.tolist()))
    return BenchmarkResult(f.name, family, records)


def read_params(text):
    """Parse ``key = value`` lines ('#' comments); comma-separated values become float lists."""
    out = {}
    for raw in str(text).splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected 'key = value', got {raw!r}")
        key, val = (x.strip() for x in line.split("=", 1))
        if "," in val:
            out[key] = [float(v) for v in val.split(",") if v.strip()]
        else:
            try:
                out[key] = int(val)
            except ValueError:
                try:
                    out[key] = float(val)
                except ValueError:
                    out[key] = val
    return out


def load_params(path):
    with open(path) as fh:
        return read_params(fh.read())


def integrand_from_params(params, rng=None):
    """Build an integrand from a parameter mapping with ``name`` and ``s`` keys."""
    name = params.get("name", "product")
    s = int(params["s"])
    if name == "product":
        f = product_integrand(params.get("a", default_product_weights(s)))
    elif name == "keister":
        f = keister_integrand(s)
    elif name == "constant":
        f = constant_integrand(s, float(params.get("value", 1.0)))
    elif name in GENZ_KINDS:
        sub = {k: params[k] for k in ("a", "u") if k in params}
        f = genz_family(name, s, sub, rng)
    else:
        raise ValueError(f"unknown integrand {name!r}")
    if str(params.get("periodize", "0")).lower() in ("1", "true", "yes"):
        f = periodize(f)
    return f
