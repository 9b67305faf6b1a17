"""Acceptance criteria 1-14.

Each criterion is a function returning ``(passed, detail)``.  Under pytest
every criterion is its own test and a one-line PASS/FAIL summary per
criterion is printed at the end of the session (see conftest.py).  Running
this file directly prints the same lines.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest
from scipy import stats

from qmcnets import distfit, evolve
from qmcnets.discrepancy import (
    DiscrepancyParams,
    projection_decomposition,
    rms_scaled_discrepancy,
    squared_discrepancy,
)
from qmcnets.engine import (
    MODES,
    generate,
    identity_spec,
    premultiply,
    random_scramble_spec,
    sample_points,
    scrambled_digits_direct,
)
from qmcnets.genmat import GeneratorMatrixSet, faure_matrices, identity_matrices, load_matrices
from qmcnets.integrands import benchmark, default_product_weights, keister_integrand, product_integrand
from qmcnets.rng import RngStream
from qmcnets.tvalue import exact_t, geometric_oracle_t

import oracles

RESULTS = {}


def _random_unit_upper(gen, b, s, m):
    mats = np.zeros((s, m, m), dtype=np.int64)
    for j in range(s):
        M = np.triu(gen.integers(0, b, (m, m)), 1)
        np.fill_diagonal(M, gen.integers(1, b, m) if b > 2 else 1)
        mats[j] = M
    return GeneratorMatrixSet(b, mats)


def _digits(nums, b, K):
    """(..., K) digit array, most significant first, of exact numerators over b**K."""
    nums = np.asarray(nums, dtype=np.int64)
    out = np.empty(nums.shape + (K,), dtype=np.int64)
    for k in range(K - 1, -1, -1):
        nums, out[..., k] = np.divmod(nums, b)
    return out


def _slope(Ns, values):
    return float(np.polyfit(np.log(Ns), np.log(values), 1)[0])


# 1 -------------------------------------------------------------------------
def criterion_1():
    start = time.perf_counter()
    gen = np.random.default_rng(2024)
    mismatches, count = 0, 0
    for b, m_hi, s_hi, trials in ((2, 6, 4, 60), (3, 4, 3, 60)):
        for _ in range(trials):
            m = int(gen.integers(1, m_hi + 1))
            s = int(gen.integers(1, s_hi + 1))
            gms = _random_unit_upper(gen, b, s, m)
            P = generate(gms, identity_spec(gms), b**m, "natural")
            mismatches += exact_t(gms) != geometric_oracle_t(P, b, m)
            count += 1
    elapsed = time.perf_counter() - start
    return mismatches == 0 and elapsed < 120, f"{count} random sets, {mismatches} mismatches, {elapsed:.1f}s"


# 2 -------------------------------------------------------------------------
def criterion_2():
    bad = []
    for b in (2, 3, 5):
        for s in range(1, b + 1):
            for m in range(1, 5):
                gms = faure_matrices(b, s, m)
                t = exact_t(gms)
                t_geo = geometric_oracle_t(generate(gms, None, b**m, "natural"), b, m)
                if t != 0 or t_geo != 0:
                    bad.append((b, s, m, t, t_geo))
    return not bad, f"all (b, s <= b, m <= 4) give t = 0 by rank and by box counts" if not bad else f"failures {bad}"


# 3 -------------------------------------------------------------------------
def criterion_3():
    gen = np.random.default_rng(3)
    cases = {
        "b=2 random unit-upper s=3 m=5": _random_unit_upper(gen, 2, 3, 5),
        "b=3 faure s=3 m=4": faure_matrices(3, 3, 4),
        "b=5 random general s=2 m=3": GeneratorMatrixSet(5, gen.integers(0, 5, (2, 3, 3))),
    }
    changed = 0
    stream = RngStream(33)
    for c, (name, gms) in enumerate(cases.items()):
        t0 = exact_t(gms)
        m = gms.m_max
        for r in range(100):
            spec = random_scramble_spec(gms, "owen", m + 10, stream.child(c, r))
            Ct, _ = premultiply(gms, spec)
            t_scr = exact_t(GeneratorMatrixSet(gms.b, Ct[:, :m, :]))
            # the shifted points themselves, counted in boxes, on a subset
            if r < 20:
                t_geo = geometric_oracle_t(generate(gms, spec, gms.b**m, "natural"), gms.b, m)
            else:
                t_geo = t0
            changed += (t_scr != t0) + (t_geo != t0)
    return changed == 0, f"3 base cases x 100 scrambles, {changed} t-value changes"


# 4 -------------------------------------------------------------------------
def criterion_4():
    m, n_specs = 4, 1000
    details, ok = [], True
    for b, s in ((2, 2), (3, 3)):
        gms = faure_matrices(b, s, m)
        K = m + 10
        N = b**m
        i_last = N - 1
        stream = RngStream(400 + b)
        counts = {(j, k): np.zeros(b, dtype=np.int64) for j in range(s) for k in (0, m - 1, K - 1)}
        structural_bad = 0
        y_all = None
        for r in range(n_specs):
            spec = random_scramble_spec(gms, "owen", K, stream.child(r))
            P = generate(gms, spec, N, "natural")
            x = _digits(P.numerators, b, K)  # (N, s, K)
            for (j, k), cnt in counts.items():
                cnt[x[i_last, j, k]] += 1
            if r < 25:
                if y_all is None:
                    y_all = _digits(generate(gms, None, N, "natural", 0).numerators, b, m)
                    y_all = np.concatenate([y_all, np.zeros((N, s, K - m), dtype=np.int64)], axis=2)
                ii, ll = np.triu_indices(N, 1)
                for j in range(s):
                    ya, yb = y_all[ii, j], y_all[ll, j]
                    xa, xb = x[ii, j], x[ll, j]
                    neq = ya != yb
                    first = np.argmax(neq, axis=1)
                    prefix = np.arange(K)[None, :] < first[:, None]
                    # (iia) digits before the first difference agree
                    structural_bad += int(np.any((xa != xb) & prefix))
                    # (iib) digits at the first difference differ
                    rows = np.arange(first.size)
                    structural_bad += int(np.any(xa[rows, first] == xb[rows, first]))
        pvals = [stats.chisquare(cnt).pvalue for cnt in counts.values()]
        ok &= min(pvals) > 0.001 and structural_bad == 0
        details.append(f"b={b}: min chi-square p={min(pvals):.3g} over {len(pvals)} digits, structural violations={structural_bad}")
    return ok, "; ".join(details)


# 5 -------------------------------------------------------------------------
def criterion_5():
    m = 4
    mismatches = 0
    for b in (2, 3):
        gms = faure_matrices(b, 2, m)
        stream = RngStream(500 + b)
        for r in range(50):
            spec = random_scramble_spec(gms, "both", m + 6, stream.child(r))
            P = generate(gms, spec, b**m, "natural")
            x = _digits(P.numerators, b, spec.K)
            for i in range(b**m):
                mismatches += int(not np.array_equal(scrambled_digits_direct(gms, spec, i), x[i]))
    return mismatches == 0, f"2 bases x 50 specs x all b^m points, {mismatches} digit mismatches"


# 6 -------------------------------------------------------------------------
def criterion_6():
    from importlib import resources

    data = resources.files("qmcnets") / "data"
    sets = [
        ("faure b=2", faure_matrices(2, 2, 10)),
        ("identity b=2", identity_matrices(2, 3, 10)),
        ("faure b=3", faure_matrices(3, 3, 6)),
        ("matrix-file b=2", load_matrices(data / "faure_b2_s2_m8.txt")),
        ("matrix-file b=3", load_matrices(data / "faure_b3_s3_m4.txt")),
    ]
    checked, bad = 0, 0
    for c, (name, gms) in enumerate(sets):
        b, M = gms.b, gms.m_max
        for mode in MODES:
            K = min(M + 6, 53) if mode != "none" else M
            spec = random_scramble_spec(gms, mode, K, RngStream(600).child(c, MODES.index(mode)))
            for m in range(0, min(8, M) + 1):
                for lam in range(min(3, b ** (M - m))):
                    nat = generate(gms, spec, b**m, "natural", lam * b**m).numerators
                    gray = generate(gms, spec, b**m, "gray", lam * b**m).numerators
                    same = sorted(map(tuple, nat.tolist())) == sorted(map(tuple, gray.tolist()))
                    bad += not same
                    checked += 1
    return bad == 0, f"{checked} aligned blocks over digital families and all scramble modes, {bad} differ"


# 7 -------------------------------------------------------------------------
def criterion_7():
    gen = np.random.default_rng(7)
    worst = 0.0
    for alpha in (1, 2):
        for N, s in ((1, 1), (16, 2), (64, 3), (128, 4), (256, 5)):
            P = gen.random((N, s))
            want = oracles.brute_d2(P.tolist(), alpha, 1.0)
            got = squared_discrepancy(P, DiscrepancyParams(alpha, 1.0)).d2
            worst = max(worst, abs(got - want) / abs(want))
    ratios = []
    for s in (2, 5):
        for N in (16, 64, 256, 1024):
            rms = rms_scaled_discrepancy([sample_points("mc", N, s, seed=70 + s, replicate=r) for r in range(500)])
            ratios.append(rms * math.sqrt(N))
    ok = worst <= 1e-12 and all(0.9 <= r <= 1.1 for r in ratios)
    return ok, f"max rel. gap to brute force {worst:.2e}; RMS*sqrt(N) for MC in [{min(ratios):.3f}, {max(ratios):.3f}]"


# 8 -------------------------------------------------------------------------
def criterion_8():
    start = time.perf_counter()
    Ns = [2**m for m in range(4, 13)]
    R = 100

    def curve(family, scramble, reps):
        return [
            rms_scaled_discrepancy(
                [sample_points(family, N, 2, b=2 if family == "faure" else None, scramble=scramble, seed=8, replicate=r) for r in range(reps)]
            )
            for N in Ns
        ]

    scr = _slope(Ns, curve("faure", "owen", R))
    uns = _slope(Ns, curve("faure", "none", 1))
    mc = _slope(Ns, curve("mc", "owen", R))
    elapsed = time.perf_counter() - start
    ok = scr <= -1.2 and uns <= -0.9 and abs(mc + 0.5) <= 0.1 and elapsed < 600
    return ok, f"slopes: scrambled {scr:.3f}, unscrambled {uns:.3f}, MC {mc:.3f} ({elapsed:.0f}s)"


# 9 -------------------------------------------------------------------------
def criterion_9():
    R = 100
    ms = range(4, 11)

    def curve(extra):
        vals = []
        for m in ms:
            K = m + extra
            vals.append(
                rms_scaled_discrepancy([sample_points("faure", 2**m, 2, b=2, scramble="owen", K=K, seed=9, replicate=r) for r in range(R)])
            )
        return np.array(vals)

    k10, k20, k0 = curve(10), curve(20), curve(0)
    agree = np.abs(k10 / k20 - 1)
    ratio = k0[-1] / k10[-1]
    ok = np.all(agree <= 0.1) and ratio > 1.1
    return ok, f"max |K=m+10 / K=m+20 - 1| = {agree.max():.2e}; K=m vs K=m+10 at N=2^10: ratio {ratio:.1f}"


# 10 ------------------------------------------------------------------------
def criterion_10():
    worst = 0.0
    for s in range(1, 6):
        for P in (np.random.default_rng(s).random((64, s)), sample_points("faure", 125, s, b=5, seed=10).points):
            coef = projection_decomposition(P)
            for g in (0.5, 0.7, 2.0):
                direct = squared_discrepancy(P, DiscrepancyParams(2, g)).d2
                recon = math.fsum(c * g ** (j + 1) for j, c in enumerate(coef))
                worst = max(worst, abs(recon - direct) / abs(direct))
    return worst <= 1e-8, f"max held-out relative error {worst:.2e} (s = 1..5)"


# 11 ------------------------------------------------------------------------
def criterion_11():
    start = time.perf_counter()
    cfg = evolve.EAConfig(u=100, s_max=4, m_max=6, max_generations=30, seed=11)
    gen = RngStream(1100).generator(0)
    baseline = [evolve.objective(evolve.random_individual(cfg, gen), 6, 4) for _ in range(1000)]
    p10 = float(np.percentile(baseline, 10))
    _, history, _ = evolve.run(cfg)
    monotone = all(b <= a for a, b in zip(history, history[1:]))
    elapsed = time.perf_counter() - start
    ok = monotone and history[-1] <= p10 and elapsed < 600
    return ok, (
        f"best objective {history[0]} -> {history[-1]} over {len(history) - 1} generations, "
        f"non-increasing={monotone}; random 10th percentile {p10:.1f} ({elapsed:.0f}s)"
    )


# 12 ------------------------------------------------------------------------
def criterion_12():
    truth = distfit.MixtureModel((3.0, 2.0, 1.0), 0.5)
    z = distfit.sample_mixture(truth, 500, np.random.default_rng(12))
    cfg = distfit.QuantileFitConfig(M=500, Lsamp=5500, n=3)
    res = distfit.fit(z, cfg)
    qq = distfit.qq_pairs(res.model, z, cfg)
    central = (qq[:, 0] >= 0.1) & (qq[:, 0] <= 0.9)
    gap = float(np.max(np.abs(np.log(qq[central, 1]) - np.log(qq[central, 2]))))
    _, k = distfit.quantile_indices(1000, 11000)
    ok = gap <= math.log(1.1) and res.loss <= res.initial_loss and k[0] == 6
    return ok, (
        f"max central log-quantile gap {gap:.4f} (limit {math.log(1.1):.4f}); loss {res.loss:.3f} <= init {res.initial_loss:.3f}; "
        f"k_1 = {k[0]}; fitted betas {tuple(round(b, 2) for b in res.model.betas)}, c = {res.model.c:.2f}"
    )


# 13 ------------------------------------------------------------------------
def criterion_13():
    start = time.perf_counter()
    s, N, R = 14, 2**10, 100
    f = product_integrand(default_product_weights(s))
    net = benchmark(f, lambda n, r: sample_points("faure", n, s, b=17, seed=13, replicate=r), [N], R).records[0]
    mc = benchmark(f, lambda n, r: sample_points("mc", n, s, seed=13, replicate=r), [N], R).records[0]
    unbiased = abs(net.mean - 1.0) <= 3 * net.std_err
    elapsed = time.perf_counter() - start
    ok = unbiased and net.rms_rel_err < mc.rms_rel_err and elapsed < 300
    return ok, (
        f"net mean {net.mean:.5f} (SE {net.std_err:.5f}); RMS rel. error net {net.rms_rel_err:.4f} vs MC {mc.rms_rel_err:.4f} ({elapsed:.0f}s)"
    )


# 14 ------------------------------------------------------------------------
def criterion_14():
    ref = oracles.keister_1d_reference()
    f = keister_integrand(1)
    P = sample_points("faure", 2**16, 1, b=2, seed=14)
    est = math.fsum(f(P.points)) / P.N
    rel = abs(est - ref) / abs(ref)
    return rel <= 1e-4, f"estimate {est:.8f}, trapezoid reference {ref:.8f}, relative gap {rel:.2e}"


CRITERIA = {
    1: ("t-value oracle equivalence", criterion_1),
    2: ("Faure nets have t = 0", criterion_2),
    3: ("t-value invariant under scrambling", criterion_3),
    4: ("scrambled digit properties", criterion_4),
    5: ("premultiplied vs direct scrambling", criterion_5),
    6: ("gray / natural block equality", criterion_6),
    7: ("discrepancy formula and MC normalisation", criterion_7),
    8: ("discrepancy decay rates", criterion_8),
    9: ("scrambled digit count K sufficiency", criterion_9),
    10: ("projection decomposition", criterion_10),
    11: ("evolutionary search sanity", criterion_11),
    12: ("chi-square mixture fit recovery", criterion_12),
    13: ("product integrand benchmark", criterion_13),
    14: ("Keister s=1 reference", criterion_14),
}


def _line(num, title, ok, detail):
    return f"[{'PASS' if ok else 'FAIL'}] criterion {num:2d} {title}: {detail}"


@pytest.mark.slow
@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num):
    title, fn = CRITERIA[num]
    ok, detail = fn()
    RESULTS[num] = _line(num, title, ok, detail)
    print(RESULTS[num])
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for num in sorted(CRITERIA):
        title, fn = CRITERIA[num]
        ok, detail = fn()
        failed += not ok
        print(_line(num, title, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
