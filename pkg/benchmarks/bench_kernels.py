"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]

Times gray-order generation (base 2 and base 3) and the discrepancy pair
sums with both backends, checks that the outputs agree and prints a table.
"""

import argparse
import time

import numpy as np

from qmcnets import _fallback, kernels
from qmcnets.engine import premultiply, random_scramble_spec
from qmcnets.genmat import faure_matrices

try:
    from qmcnets import _kernels
except ImportError:
    _kernels = None


def _best(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _cases():
    gms2 = faure_matrices(2, 2, 20)
    spec2 = random_scramble_spec(gms2, "owen", 30, 0)
    Ct2, et2 = premultiply(gms2, spec2)
    w = np.array([1 << (30 - 1 - k) for k in range(30)], dtype=np.uint64)
    cols = np.einsum("skl,k->sl", Ct2.astype(np.uint64), w).astype(np.uint64)
    packed0 = (et2.astype(np.uint64) @ w).astype(np.uint64)
    N2 = 2**18

    gms3 = faure_matrices(3, 3, 12)
    spec3 = random_scramble_spec(gms3, "owen", 22, 0)
    Ct3, et3 = premultiply(gms3, spec3)
    N3 = 3**10

    P = np.random.default_rng(0).random((2000, 5))
    g = np.ones(5)
    return [
        (f"gray b=2 s=2 N={N2}", lambda m: m.gray_points_b2(cols, packed0, 0, N2, 30)[1]),
        (f"gray b=3 s=3 N={N3}", lambda m: m.gray_points(Ct3, et3, 3, 0, N3)[1]),
        ("pair sums alpha=2 N=2000 s=5", lambda m: m.pair_sums(P, 2, g)),
        ("pair sums alpha=1 N=2000 s=5", lambda m: m.pair_sums(P, 1, g)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"active backend: {kernels.BACKEND}")
    if _kernels is None:
        print("compiled module not built; only the fallback is timed")
    print(f"{'case':32s} {'python[s]':>10s} {'cython[s]':>10s} {'speedup':>8s} agree")
    for name, call in _cases():
        t_py, out_py = _best(lambda: call(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:32s} {t_py:10.4f} {'-':>10s} {'-':>8s} -")
            continue
        t_cy, out_cy = _best(lambda: call(_kernels), args.repeat)
        agree = np.allclose(np.asarray(out_py, dtype=float), np.asarray(out_cy, dtype=float), rtol=1e-12, atol=0)
        print(f"{name:32s} {t_py:10.4f} {t_cy:10.4f} {t_py / t_cy:8.1f} {agree}")


if __name__ == "__main__":
    main()
