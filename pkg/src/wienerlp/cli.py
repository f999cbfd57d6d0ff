"""Command-line interface: ``wienerlp <subcommand> [options]``.

Experiment subcommands print one JSON report on stdout and exit 0 iff every
verdict passes.  ``construct`` writes a polynomial file plus a ``.meta.json``
sidecar; ``norm`` evaluates one L^p integral of a polynomial file.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import constructions as C
from . import experiments as X
from .norms import QuadratureOptions, lp_integral
from .serialize import dumps
from .spectrum import TrigPoly, classify, min_coefficient, read_poly, write_poly
from .torus import parse_set

GLOBAL_DEFAULTS = {"seed": 0, "oversample": None, "threads": None, "csv": None, "timing": False}


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _set(text: str):
    try:
        return parse_set(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _global_flags(default) -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=int, default=default, help="RNG seed (default 0)")
    g.add_argument("--oversample", type=int, default=default,
                   help="quadrature oversampling factor (default: per experiment, 16 for most)")
    g.add_argument("--threads", type=int, default=default,
                   help="worker threads; affects speed only, never results")
    g.add_argument("--csv", default=default, help="also write (label, value) rows to this path")
    g.add_argument("--timing", action="store_true", default=default,
                   help="include runtime_ms in the JSON report")
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="wienerlp", parents=[common],
                                     description="Positive definite counterexamples on the torus.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("verify-shapiro", parents=[common], help="inequality on a random corpus + sharpness sweep")
    s.add_argument("--p", type=int, default=2)
    s.add_argument("--a", type=float, default=0.25)
    s.add_argument("--corpus-size", type=int, default=500)
    s.add_argument("--degree-cap", type=int, default=64)
    s.add_argument("--k", type=int, default=4)
    s.add_argument("--sweep", type=_ints, default=[256, 512, 1024, 2048, 4096])
    s.add_argument("--sharp-a", type=float, default=None)

    s = sub.add_parser("demo-diophantine", parents=[common], help="idempotent share on a diophantine set")
    s.add_argument("--L", type=int, default=4)
    s.add_argument("--l-max", type=int, default=32)
    s.add_argument("--exponent", type=int, default=3)
    s.add_argument("--n", type=int, default=4096)
    s.add_argument("--l", type=int, default=5)
    s.add_argument("--p", type=float, default=2)
    s.add_argument("--tolerance", type=float, default=0.03)

    s = sub.add_parser("demo-majorant", parents=[common], help="majorant pair norm comparison")
    s.add_argument("--j", type=int, default=3)
    s.add_argument("--p", type=float, default=3)

    s = sub.add_parser("demo-signs", parents=[common], help="random sign search")
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--p", type=float, default=1)
    s.add_argument("--q", type=float, default=2)
    s.add_argument("--eps", type=float, default=0.5)
    s.add_argument("--budget", type=int, default=64)

    s = sub.add_parser("demo-conc", parents=[common], help="strong concentration outside a set")
    s.add_argument("--mode", choices=["lowp", "highp"], default="lowp")
    s.add_argument("--set", type=_set, default=None, help="e.g. '0.3,0.4;-0.4,-0.3'")
    s.add_argument("--p", type=float, default=1.5)
    s.add_argument("--q", type=float, default=1.2)
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--n-values", type=_ints, default=[1024, 4096, 16384])
    s.add_argument("--N", type=int, default=None)
    s.add_argument("--a", type=float, default=None)
    s.add_argument("--sign-eps", type=float, default=1.0)
    s.add_argument("--budget", type=int, default=64)
    s.add_argument("--j", type=int, default=3)
    s.add_argument("--K-values", type=_ints, default=[0, 1, 2])
    s.add_argument("--growth", type=int, default=8)
    s.add_argument("--tail-budget", type=float, default=0.05)

    s = sub.add_parser("demo-wiener", parents=[common], help="truncated gap series")
    s.add_argument("--p", type=float, default=2.5)
    s.add_argument("--q", type=float, default=2.0)
    s.add_argument("--set", type=_set, default=None)
    s.add_argument("--K", type=int, default=6)
    s.add_argument("--alpha", type=int, default=None)
    _builder_flags(s)
    s.add_argument("--r-grid", type=_floats, default=[0.9, 0.99, 1.0])
    s.add_argument("--complement-bound", type=float, default=2.0)

    s = sub.add_parser("construct", help="build a polynomial and write it to a file")
    kinds = s.add_subparsers(dest="kind", required=True)
    c = kinds.add_parser("shapiro", parents=[common])
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    c = kinds.add_parser("lowp", parents=[common])
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--N", type=int, required=True)
    c.add_argument("--a", type=float, required=True)
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--q", type=float, required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--budget", type=int, default=64)
    c.add_argument("--tail-budget", type=float, default=0.05)
    c = kinds.add_parser("ms", parents=[common])
    c.add_argument("--j", type=int, required=True)
    c = kinds.add_parser("riesz", parents=[common])
    c.add_argument("--j", type=int, required=True)
    c.add_argument("--K", type=int, required=True)
    c.add_argument("--growth", type=int, default=3)
    c = kinds.add_parser("gapseries", parents=[common])
    c.add_argument("--set", type=_set, required=True)
    c.add_argument("--K", type=int, required=True)
    c.add_argument("--p", type=float, required=True)
    c.add_argument("--q", type=float, required=True)
    c.add_argument("--alpha", type=int, default=None)
    _builder_flags(c)
    for name in ("shapiro", "lowp", "ms", "riesz", "gapseries"):
        kinds.choices[name].add_argument("--out", required=True, help="polynomial file to write")

    s = sub.add_parser("norm", parents=[common], help="integral of |f|^p over a set")
    s.add_argument("--poly", required=True)
    s.add_argument("--p", type=float, required=True)
    s.add_argument("--set", type=_set, default=None)
    return parser


def _builder_flags(s: argparse.ArgumentParser) -> None:
    s.add_argument("--builder", choices=["auto", "lowp", "highp"], default="auto")
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--sign-eps", type=float, default=1.0)
    s.add_argument("--j", type=int, default=None)
    s.add_argument("--riesz-K", type=int, default=0)
    s.add_argument("--growth", type=int, default=3)
    s.add_argument("--tail-budget", type=float, default=0.05)


def _builder(args) -> C.BuilderOptions:
    return C.BuilderOptions(kind=args.builder, n=args.n, sign_eps=args.sign_eps, j=args.j,
                            riesz_K=args.riesz_K, growth=args.growth, tail_budget=args.tail_budget)


def _with_oversample(kwargs: dict, args) -> dict:
    if args.oversample is not None:
        kwargs["oversample"] = args.oversample
    return kwargs


def run_experiment(args) -> X.ExperimentReport:
    cmd = args.command
    if cmd == "verify-shapiro":
        kw = dict(p=args.p, a=args.a, corpus_size=args.corpus_size, degree_cap=args.degree_cap,
                  seed=args.seed, k=args.k, sweep=tuple(args.sweep), sharp_a=args.sharp_a,
                  threads=args.threads)
        return X.verify_shapiro(**_with_oversample(kw, args))
    if cmd == "demo-diophantine":
        kw = dict(L=args.L, l_max=args.l_max, exponent=args.exponent, n=args.n, l=args.l,
                  p=args.p, tolerance=args.tolerance)
        return X.demo_diophantine(**_with_oversample(kw, args))
    if cmd == "demo-majorant":
        return X.demo_majorant(**_with_oversample(dict(j=args.j, p=args.p), args))
    if cmd == "demo-signs":
        kw = dict(n=args.n, p=args.p, q=args.q, eps=args.eps, budget=args.budget, seed=args.seed)
        return X.demo_signs(**_with_oversample(kw, args))
    if cmd == "demo-conc":
        kw = dict(mode=args.mode, E=args.set, p=args.p, q=args.q, eps=args.eps,
                  n_values=tuple(args.n_values), N=args.N, a=args.a, sign_eps=args.sign_eps,
                  budget=args.budget, j=args.j, K_values=tuple(args.K_values), growth=args.growth,
                  tail_budget=args.tail_budget, seed=args.seed)
        return X.demo_strong_concentration(**_with_oversample(kw, args))
    if cmd == "demo-wiener":
        kw = dict(p=args.p, q=args.q, E=args.set, K=args.K, alpha=args.alpha, seed=args.seed,
                  builder=_builder(args), r_grid=tuple(args.r_grid),
                  complement_bound=args.complement_bound)
        return X.demo_wiener_failure(**_with_oversample(kw, args))
    raise ValueError(f"unknown experiment {cmd!r}")


def _poly_meta(f: TrigPoly) -> dict:
    spec = classify(f)
    return {"degree": spec.degree, "support_size": spec.support_size,
            "positive_definite": spec.is_positive_definite, "idempotent": spec.is_idempotent,
            "min_gap": spec.min_gap, "min_coefficient": min_coefficient(f) if not f.is_zero else 0.0}


def _sibling(path: Path, tag: str) -> Path:
    return path.with_name(f"{path.stem}.{tag}{path.suffix}")


def construct(args) -> int:
    out = Path(args.out)
    opts = QuadratureOptions(oversample=args.oversample or 16)
    params = {k: (str(v) if k == "set" else v) for k, v in vars(args).items()
              if k not in ("command", "kind", "out", "csv", "timing", "threads")}
    written: dict[str, TrigPoly] = {}
    extra: dict = {}
    if args.kind == "shapiro":
        written[str(out)] = C.shapiro_counterexample(args.n, args.k)
    elif args.kind == "lowp":
        cp = C.ConcentratorParams(args.n, args.N, args.a, args.p, args.q, args.eps)
        try:
            sv = C.sign_search(args.n, args.p, args.q, args.eps, args.budget, args.seed, opts)
        except C.SignSearchError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        written[str(out)] = C.lowp_concentrator(cp, sv, args.tail_budget)
        extra = {"sign_ratio": sv.ratio, "trials_used": sv.trials_used}
    elif args.kind in ("ms", "riesz"):
        g, G = C.ms_pair(args.j) if args.kind == "ms" else C.riesz_pair(args.j, args.K, args.growth)
        written[str(out)] = g
        written[str(_sibling(out, "majorant"))] = G
    elif args.kind == "gapseries":
        gs = C.gap_series(args.set, args.K, args.p, args.q, args.alpha, _builder(args), args.seed, opts)
        written[str(out)] = gs.assembled
        extra = {"alpha": gs.alpha, "modulations": [b.m for b in gs.blocks],
                 "block_gaps": gs.block_gaps(), "dilations": [b.dilation for b in gs.blocks],
                 "E_k": [str(b.E) for b in gs.blocks]}
    for path, f in written.items():
        write_poly(path, f)
    meta = {"kind": args.kind, "parameters": params, **extra,
            "files": {path: _poly_meta(f) for path, f in written.items()}}
    meta_path = out.with_name(out.name + ".meta.json")
    meta_path.write_text(dumps(meta) + "\n")
    print(dumps(meta))
    return 0


def norm(args) -> int:
    f = read_poly(args.poly)
    opts = QuadratureOptions(oversample=args.oversample or 16)
    E = args.set if args.set is not None else parse_set("torus")
    print(dumps(lp_integral(f, args.p, E, opts).to_dict()))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        if args.command == "construct":
            return construct(args)
        if args.command == "norm":
            return norm(args)
        report = run_experiment(args)
    except (ValueError, OverflowError, C.AssemblyError, C.SignSearchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.to_json(include_runtime=args.timing))
    if args.csv:
        report.write_csv(args.csv)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
