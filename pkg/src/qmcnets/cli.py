"""Command-line interface: ``qmcnets {gen,disc,tvalue,evolve,fit,bench}``.

Exit codes: 0 success, 2 usage or validation error, 3 runtime failure
(fit divergence, budget exceeded, ill-conditioned decomposition).

Config files for ``evolve`` and ``bench`` are plain ``key = value`` lines
with ``#`` comments; comma-separated values are lists.
"""

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__, pointio
from .discrepancy import DiscrepancyParams, squared_discrepancy
from .distfit import QuantileFitConfig, fit, qq_pairs
from .engine import FAMILIES, MODES, sample_points
from .errors import BudgetExceeded, FitDiverged, IllConditioned, QMCError
from .evolve import EAConfig, load_checkpoint, run
from .genmat import format_matrices, load_matrices
from .integrands import benchmark, integrand_from_params, load_params
from .rng import fresh_seed
from .tvalue import compare_tables, exact_t, format_comparison, projection_stats, t_table

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3
_RUNTIME_ERRORS = (FitDiverged, BudgetExceeded, IllConditioned)


class UsageError(Exception):
    pass


def _resolve_seed(args):
    if getattr(args, "seed", None) is None:
        args.seed = fresh_seed()
        args.seed_generated = True
    return args.seed


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _add_sampler_args(p, need_n=True):
    p.add_argument("--family", choices=FAMILIES, default="faure")
    p.add_argument("--b", type=int, default=None, help="prime base (default: smallest prime >= s for faure, 2 otherwise)")
    p.add_argument("--s", type=int, default=None, help="dimension")
    if need_n:
        p.add_argument("--n", type=int, default=None, help="number of points")
    p.add_argument("--m-max", type=int, default=None, help="generator matrix size")
    p.add_argument("--matrices", default=None, help="matrix file for --family matrix-file")
    p.add_argument("--scramble", default="owen", help="|".join(MODES))
    p.add_argument("--digits", type=int, default=None, help="scrambled digits K")
    p.add_argument("--order", choices=("gray", "natural"), default="gray")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--replicate", type=int, default=0)


def _sample(args, N):
    gms = load_matrices(args.matrices) if args.family == "matrix-file" else None
    if args.family == "matrix-file" and gms is None:
        raise UsageError("--family matrix-file needs --matrices")
    if args.s is None and gms is None:
        raise UsageError("--s is required")
    if N is None or N < 1:
        raise UsageError("--n must be a positive integer")
    if args.m_max is not None and args.b is not None and N > args.b**args.m_max:
        raise UsageError(f"--n {N} exceeds the bound b^m_max = {args.b}^{args.m_max} = {args.b**args.m_max}")
    return sample_points(
        args.family,
        N,
        args.s,
        args.b,
        args.scramble,
        args.digits,
        args.seed,
        args.replicate,
        gms,
        args.m_max,
        args.order,
    )


def _batch_meta(args, batch):
    meta = {
        "family": args.family,
        "b": batch.b if getattr(batch, "b", None) is not None else args.b,
        "s": batch.s,
        "n": batch.N,
        "scramble": args.scramble,
        "digits": batch.K if getattr(batch, "K", None) is not None else args.digits,
        "order": getattr(batch, "order", args.order),
        "seed": args.seed,
        "replicate": args.replicate,
        "version": __version__,
    }
    spec = getattr(batch, "spec", None)
    if spec is not None:
        meta["spec_hash"] = spec.digest()
    if getattr(args, "seed_generated", False):
        meta["seed_generated"] = True
    return meta


def cmd_gen(args):
    _resolve_seed(args)
    batch = _sample(args, args.n)
    meta = _batch_meta(args, batch)
    if args.format == "bin":
        if args.out in (None, "-"):
            raise UsageError("--format bin needs --out")
        pointio.write_binary(args.out, batch.points)
        Path(str(args.out) + ".json").write_text(json.dumps(meta, indent=1) + "\n")
    elif args.format == "json":
        _emit(json.dumps({"config": meta, "points": batch.points.tolist()}) + "\n", args.out)
    else:
        _emit(pointio.format_csv(batch.points, meta), args.out)
    return EXIT_OK


def cmd_disc(args):
    if args.points:
        pts, meta = pointio.read_points(args.points)
        config = {"points": args.points, **meta}
    else:
        _resolve_seed(args)
        batch = _sample(args, args.n)
        pts = batch.points
        config = _batch_meta(args, batch)
    params = DiscrepancyParams(args.alpha, args.gamma)
    threads = args.threads if args.threads is not None else 0
    rep = squared_discrepancy(pts, params, per_order=args.per_order, threads=threads)
    doc = rep.to_dict()
    doc["config"] = {**config, "alpha": args.alpha, "gamma": args.gamma, "threads": threads}
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def cmd_tvalue(args):
    gms = load_matrices(args.matrices)
    out = []
    if args.exact is not None:
        out.append(f"t={exact_t(gms, args.exact)}\n")
    if args.table is not None:
        m_max, s_max = args.table
        if m_max > gms.m_max or s_max > gms.s:
            raise UsageError(f"--table {m_max} {s_max} exceeds the matrix file ({gms.m_max} x {gms.s})")
        tab = t_table(gms, m_max, s_max)
        out.append(tab.to_csv() if args.format == "csv" else tab.to_text())
    if args.compare is not None:
        other = load_matrices(args.compare)
        m_max = min(gms.m_max, other.m_max)
        s_max = min(gms.s, other.s)
        grid = compare_tables(t_table(gms, m_max, s_max), t_table(other, m_max, s_max), tuple(args.initials))
        out.append(format_comparison(grid, args.format))
    if args.proj is not None:
        st = projection_stats(gms, args.proj, args.m)
        out.append(f"r={st.r} m={st.m} subsets={st.count} avg_t={st.avg:.6g} max_t={st.max}\n")
    if not out:
        raise UsageError("choose at least one of --exact, --table, --compare, --proj")
    _emit("".join(out), args.out)
    return EXIT_OK


def _typed_config(cls, raw):
    kinds = {f.name: f.type for f in fields(cls)}
    out = {}
    for k, v in raw.items():
        key = k.replace("-", "_")
        if key not in kinds:
            raise UsageError(f"unknown config key {k!r}; valid keys: {', '.join(kinds)}")
        typ = kinds[key] if isinstance(kinds[key], str) else kinds[key].__name__
        if typ == "bool":
            out[key] = str(v).lower() in ("1", "true", "yes", "on")
        elif typ == "int":
            out[key] = int(v)
        elif typ == "float":
            out[key] = float(v)
        else:
            out[key] = v
    return out


def cmd_evolve(args):
    if args.resume:
        state, config = load_checkpoint(args.resume)
    else:
        raw = load_params(args.config) if args.config else {}
        for k in ("seed", "u", "s_max", "m_max", "max_generations"):
            v = getattr(args, k, None)
            if v is not None:
                raw[k] = v
        if "seed" not in raw:
            raw["seed"] = fresh_seed()
        config = EAConfig(**_typed_config(EAConfig, raw))
        state = None
    seed_set = load_matrices(args.seed_matrices) if args.seed_matrices else None
    best, history, state = run(config, seed_set, state, checkpoint=args.checkpoint)
    text = f"# objective={state.best_objective}\n# config={json.dumps(asdict(config))}\n" + format_matrices(best)
    _emit(text, args.out)
    if args.history:
        Path(args.history).write_text(
            "generation,best_objective\n" + "".join(f"{g},{v}\n" for g, v in enumerate(history))
        )
    return EXIT_OK


def _read_samples(path, column):
    pts, _ = pointio.read_csv(path)
    return pts[:, column]


def cmd_fit(args):
    z = _read_samples(args.samples, args.column)
    M = z.size
    Lsamp = args.lsamp if args.lsamp is not None else 11 * M
    config = QuantileFitConfig(M=M, Lsamp=Lsamp, n=args.n, seed=args.seed)
    res = fit(z, config)
    doc = res.to_dict()
    doc["config"] = {**asdict(config), "samples": args.samples, "column": args.column}
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    if args.qq:
        rows = qq_pairs(res.model, z, config)
        np.savetxt(args.qq, rows, fmt="%.17g", delimiter=",", header="p,empirical,model", comments="")
    return EXIT_OK


def cmd_bench(args):
    _resolve_seed(args)
    params = load_params(args.config) if args.config else {}
    if args.integrand:
        params["name"] = args.integrand
    if args.s is not None:
        params["s"] = args.s
    if "s" not in params:
        raise UsageError("integrand dimension s missing (use --s or the config file)")
    f = integrand_from_params(params, np.random.default_rng(args.seed))
    n_list = [int(x) for x in args.n_list.split(",")]
    results = []
    for fam in args.family.split(","):
        ns = argparse.Namespace(**vars(args))
        ns.family, ns.s, ns.replicate = fam, f.s, 0
        if fam not in FAMILIES:
            raise UsageError(f"unknown family {fam!r}")

        def sampler(N, r, ns=ns):
            ns.replicate = r
            return _sample(ns, N)

        results.append(benchmark(f, sampler, n_list, args.reps, family=fam))
    config = {"integrand": params, "seed": args.seed, "reps": args.reps, "n_list": n_list,
              "scramble": args.scramble, "digits": args.digits}
    if args.format == "json":
        doc = {"config": config, "results": [json.loads(r.to_json()) for r in results]}
        _emit(json.dumps(doc, indent=1) + "\n", args.out)
    else:
        lines = [f"# config={json.dumps(config)}\n", "family,N,R,mean,rms_rel_err,std_err\n"]
        for r in results:
            for row in r.to_csv().splitlines()[1:]:
                lines.append(f"{r.family},{row}\n")
        _emit("".join(lines), args.out)
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="qmcnets", description="Scrambled digital nets and quasi-Monte Carlo experiments")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a point set")
    _add_sampler_args(g)
    g.add_argument("--format", choices=("csv", "json", "bin"), default="csv")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    d = sub.add_parser("disc", help="squared kernel discrepancy")
    _add_sampler_args(d)
    d.add_argument("--points", default=None, help="read points from a CSV or binary file")
    d.add_argument("--alpha", type=int, default=2, choices=(1, 2))
    d.add_argument("--gamma", type=float, default=1.0)
    d.add_argument("--per-order", action="store_true")
    d.add_argument("--threads", type=int, default=None)
    d.add_argument("--out", default=None)
    d.set_defaults(func=cmd_disc)

    t = sub.add_parser("tvalue", help="t-values of a generator matrix file")
    t.add_argument("matrices")
    t.add_argument("--exact", type=int, default=None, metavar="M")
    t.add_argument("--table", type=int, nargs=2, default=None, metavar=("M_MAX", "S_MAX"))
    t.add_argument("--compare", default=None, metavar="OTHER")
    t.add_argument("--initials", nargs=2, default=("A", "B"))
    t.add_argument("--proj", type=int, default=None, metavar="R")
    t.add_argument("--m", type=int, default=None, help="m for --proj (default: full)")
    t.add_argument("--format", choices=("text", "csv"), default="text")
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_tvalue)

    e = sub.add_parser("evolve", help="evolutionary search for binary generator matrices")
    e.add_argument("--config", default=None)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--u", type=int, default=None)
    e.add_argument("--s-max", dest="s_max", type=int, default=None)
    e.add_argument("--m-max", dest="m_max", type=int, default=None)
    e.add_argument("--generations", dest="max_generations", type=int, default=None)
    e.add_argument("--seed-matrices", default=None)
    e.add_argument("--checkpoint", default=None)
    e.add_argument("--resume", default=None)
    e.add_argument("--history", default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_evolve)

    f = sub.add_parser("fit", help="fit a chi-square mixture to discrepancy samples")
    f.add_argument("samples")
    f.add_argument("--column", type=int, default=-1)
    f.add_argument("--n", type=int, default=3)
    f.add_argument("--lsamp", type=int, default=None)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--qq", default=None)
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_fit)

    b = sub.add_parser("bench", help="RMS-error quadrature benchmark")
    _add_sampler_args(b, need_n=False)
    b.set_defaults(family="faure,mc")
    b.add_argument("--config", default=None, help="integrand parameter file")
    b.add_argument("--integrand", default=None)
    b.add_argument("--n-list", default="64,256,1024")
    b.add_argument("--reps", type=int, default=100)
    b.add_argument("--format", choices=("csv", "json"), default="csv")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bench)
    # bench accepts a comma-separated family list, so drop the single-choice check
    for action in b._actions:
        if action.dest == "family":
            action.choices = None
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", None) is not None and args.threads < 0:
        parser.error("--threads must be >= 0")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qmcnets {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _RUNTIME_ERRORS as exc:
        print(f"qmcnets {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (QMCError, ValueError, OSError) as exc:
        print(f"qmcnets {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
