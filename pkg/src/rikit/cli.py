"""Command-line front end.

    rikit eval-op        --op H --profile power:1/2 --m 2 --fn indicator:1/4 [--out f.json] [--csv f.csv]
    rikit eval-norm      --family lorentz:2,1 --fn indicator:1/4
    rikit optimal-target --base lorentz:4/3,1 --profile power:3/4 --m 2
    rikit check          ID [ID ...] [--out reports.jsonl]
    rikit suite          --all | ID ... [--out reports.jsonl] [--csv summary.csv] [--jobs N]
    rikit sweep          --base 'lorentz:{p},1' --profile 'power:{alpha}' --m '{m}' --param p=4/3,2 ...

Exit status: 0 pass, 1 a check failed, 2 a check was unstable under grid
refinement, 3 bad input.  RSK_GRID_K and RSK_TMIN set the default grid.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
from fractions import Fraction

import numpy as np

from .gridfn import GridFunction, ParameterError, make_grid, power_log_integrals
from .norms import eval_norm, norm_from_spec, render
from .operators import KernelOp, apply_op
from .profiles import LPhiProfile, profile_from_spec
from .targets import TargetNorm, UnsupportedBase, resolve_target, target_norm_eval
from .verify import (
    SUITE,
    RegistryError,
    SuiteConfig,
    TestFamily,
    op_norm_lower,
    ratio_report,
    reports_csv,
    reports_jsonl,
    run_suite,
)

log = logging.getLogger("rikit")

EXIT = {"pass": 0, "fail": 1, "unstable": 2}
SPEC_ERROR = 3


class SpecError(Exception):
    pass


def _num(text):
    return float(Fraction(text.strip()))


def _grid(args):
    K = args.K if args.K is not None else int(os.environ.get("RSK_GRID_K", 16))
    t = args.t_min if args.t_min is not None else os.environ.get("RSK_TMIN")
    return make_grid(K, 2.0 ** -40 if t is None else _parse_tmin(str(t)))


def _parse_tmin(text):
    """``2^-40``, ``1e-12`` or ``1/1024``."""
    if "^" in text:
        base, _, ex = text.partition("^")
        return _num(base) ** _num(ex)
    return _num(text)


def parse_fn(spec: str, grid):
    """Test function from a short spec or a JSON file of cells."""
    if spec.endswith(".json") or spec.startswith("file:"):
        path = spec[5:] if spec.startswith("file:") else spec
        with open(path, encoding="utf-8") as fh:
            return GridFunction.from_json(json.load(fh))
    name, _, arg = spec.partition(":")
    args = [a for a in arg.split(",") if a.strip()]
    if name == "indicator":
        a, b = (0.0, _num(args[0])) if len(args) == 1 else (_num(args[0]), _num(args[1]))
        return GridFunction.indicator(grid, a, b)
    if name == "constant":
        return GridFunction.constant(grid, _num(args[0]) if args else 1.0)
    if name in ("power", "powerlog"):
        th = _num(args[0])
        gm = _num(args[1]) if len(args) > 1 else 0.0
        return GridFunction(grid, power_log_integrals(grid.edges, -th, gm) / grid.lengths)
    raise SpecError(f"cannot parse function {spec!r}")


def _op_from_args(args):
    if args.op_json:
        d = json.loads(args.op_json)
        kind, prof, m = d["op"], d["profile"], int(d.get("m", 1))
    else:
        kind, prof, m = args.op, args.profile, args.m
    I = profile_from_spec(prof)
    if kind == "P":
        if not isinstance(I, LPhiProfile):
            raise SpecError("the P operator needs a gauss or boltzmann profile")
        return KernelOp("P", None, m, I.phi)
    return KernelOp(kind, I, m)


def _log_config(args, grid, extra=None):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    cfg["grid"] = {"K": grid.K, "t_min": grid.t_min, "n_cells": grid.n_cells}
    if extra:
        cfg.update(extra)
    log.info("config %s", json.dumps(cfg, sort_keys=True, default=str))


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _fmt(x):
    return "inf" if np.isinf(x) else repr(float(x))


# ------------------------------------------------------------ subcommands

def cmd_eval_op(args):
    grid = _grid(args)
    _log_config(args, grid)
    T = _op_from_args(args)
    f = parse_fn(args.fn, grid)
    g = apply_op(T, f)
    _write(args.out, json.dumps(g.to_json()) + "\n")
    if args.csv:
        e = g.grid.edges
        rows = "".join(f"{repr(float(np.sqrt(e[i] * e[i + 1]) if e[i] > 0 else e[i + 1] / 2))},{_fmt(v)}\n" for i, v in enumerate(g.values))
        _write(args.csv, "s,value\n" + rows)
    return 0


def cmd_eval_norm(args):
    grid = _grid(args)
    _log_config(args, grid)
    X = norm_from_spec(args.family)
    f = parse_fn(args.fn, grid)
    print(_fmt(eval_norm(X, f)))
    return 0


def _target_band(X, I, m, cfg: SuiteConfig, variant="full", profile_name=None):
    T = TargetNorm(X, I, m, variant)
    sym = resolve_target(X, I, m)
    if sym.kind == "no-table":
        return sym, None
    Y = sym.target

    def fn(g):
        F = TestFamily.for_space(g, Y, cfg.seed, size=14, nonmonotone=False)
        out = []
        for mem in F:
            r = target_norm_eval(T, mem.f(g))
            if r.ratio is not None and np.isfinite(r.ratio):
                out.append((mem.id, float(r.ratio)))
        return out

    params = {"X": render(X), "I": profile_name or repr(I), "m": m}
    if variant != "full":
        params["variant"] = variant
    return sym, ratio_report("optimal-target", params, fn, cfg.grid(), cfg.band, detail={"target": str(sym)})


def _config(args):
    g = _grid(args)
    return SuiteConfig(K=g.K, t_min=g.t_min, seed=args.seed)


def cmd_optimal_target(args):
    cfg = _config(args)
    _log_config(args, cfg.grid(), {"suite_config": cfg.to_json()})
    X = norm_from_spec(args.base)
    I = profile_from_spec(args.profile)
    sym, rep = _target_band(X, I, args.m, cfg, args.variant, args.profile)
    print(str(sym))
    if rep is None:
        print("no table entry: numeric construction only")
        return 0
    j = rep.to_json()
    print(f"band [{j['min']:.4g}, {j['max']:.4g}] within [{cfg.band[0]:.4g}, {cfg.band[1]:.4g}], drift {j['drift']:.3g}: {j['verdict']}")
    if args.out:
        _write(args.out, reports_jsonl([j]))
    return EXIT[rep.verdict]


def _worst(reports):
    v = [r["verdict"] for r in reports]
    if "fail" in v:
        return EXIT["fail"]
    if "unstable" in v:
        return EXIT["unstable"]
    return 0


def _run_reports(args, names):
    cfg = _config(args)
    _log_config(args, cfg.grid(), {"suite_config": cfg.to_json(), "checks": names})
    reps = run_suite(names, cfg, jobs=args.jobs)
    _write(args.out, reports_jsonl(reps))
    if args.csv:
        _write(args.csv, reports_csv(reps))
    for r in reps:
        if r["verdict"] != "pass":
            log.warning("%s: %s (min %s, max %s, drift %s)", r["id"], r["verdict"], r["min"], r["max"], r["drift"])
    return _worst(reps)


def cmd_check(args):
    return _run_reports(args, args.ids)


def cmd_suite(args):
    if args.list:
        for name in sorted(SUITE):
            print(name)
        return 0
    if not args.all and not args.ids:
        raise SpecError("give check ids or --all")
    return _run_reports(args, None if args.all else args.ids)


def _sweep_params(items):
    keys, values = [], []
    for it in items:
        k, _, v = it.partition("=")
        if not v:
            raise SpecError(f"bad --param {it!r}; expected name=v1,v2")
        keys.append(k.strip())
        values.append([x.strip() for x in v.split(",")])
    return keys, list(itertools.product(*values))


def cmd_sweep(args):
    cfg = _config(args)
    keys, combos = _sweep_params(args.param)
    _log_config(args, cfg.grid(), {"suite_config": cfg.to_json(), "combinations": len(combos)})
    rows = []
    for combo in combos:
        sub = dict(zip(keys, combo))
        X = norm_from_spec(args.base.format(**sub))
        I = profile_from_spec(args.profile.format(**sub))
        m = int(args.m.format(**sub))
        sym, rep = _target_band(X, I, m, cfg, profile_name=args.profile.format(**sub))
        if rep is None:
            rows.append(list(combo) + [str(sym), "", "", "", "", "no-table"])
            continue
        F = TestFamily.for_space(cfg.grid(), X, cfg.seed, cfg.family_size)
        value = op_norm_lower(KernelOp("H", I, m), X, sym.target, F)
        rows.append(list(combo) + [str(sym), repr(value), repr(rep.min), repr(rep.max), repr(rep.drift), rep.verdict])
    rows.sort()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(keys + ["target", "value", "band_lo", "band_hi", "drift", "verdict"])
    w.writerows(rows)
    _write(args.out, buf.getvalue())
    v = [r[-1] for r in rows]
    return EXIT["fail"] if "fail" in v else EXIT["unstable"] if "unstable" in v else 0


# ------------------------------------------------------------------ parser

def build_parser():
    p = argparse.ArgumentParser(prog="rikit", description="Hardy-type operators, r.i. norms and optimal targets on (0, 1).")
    p.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--K", type=int, default=None, help="grid points per octave (env RSK_GRID_K, default 16)")
        sp.add_argument("--t-min", default=None, help="smallest breakpoint, e.g. 2^-40 (env RSK_TMIN)")
        if seed:
            sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("eval-op", help="apply an operator to a function")
    common(sp)
    sp.add_argument("--op", choices=["H", "R", "G", "P"], default="H")
    sp.add_argument("--op-json", default=None, help='operator as JSON: {"op":"H","profile":{...},"m":2}')
    sp.add_argument("--profile", default="power:1/2")
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--fn", required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--csv", default=None, help="also write (s, value) pairs for plotting")
    sp.set_defaults(func=cmd_eval_op)

    sp = sub.add_parser("eval-norm", help="norm of a function")
    common(sp)
    sp.add_argument("--family", required=True)
    sp.add_argument("--fn", required=True)
    sp.set_defaults(func=cmd_eval_norm)

    sp = sub.add_parser("optimal-target", help="table target plus a numeric band check")
    common(sp, seed=True)
    sp.add_argument("--base", required=True)
    sp.add_argument("--profile", required=True)
    sp.add_argument("--m", type=int, default=1)
    sp.add_argument("--variant", default="full", choices=["full", "sharp", "iterated"])
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_optimal_target)

    sp = sub.add_parser("check", help="run named checks")
    common(sp, seed=True)
    sp.add_argument("ids", nargs="+")
    sp.add_argument("--out", default=None)
    sp.add_argument("--csv", default=None)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("suite", help="run the check registry")
    common(sp, seed=True)
    sp.add_argument("ids", nargs="*")
    sp.add_argument("--all", action="store_true")
    sp.add_argument("--list", action="store_true")
    sp.add_argument("--out", default=None)
    sp.add_argument("--csv", default=None)
    sp.add_argument("--jobs", type=int, default=1)
    sp.set_defaults(func=cmd_suite)

    sp = sub.add_parser("sweep", help="optimal-target band checks over a parameter grid, as CSV")
    common(sp, seed=True)
    sp.add_argument("--base", required=True, help="norm spec with {name} placeholders")
    sp.add_argument("--profile", required=True)
    sp.add_argument("--m", default="1")
    sp.add_argument("--param", action="append", default=[], help="name=v1,v2,...")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return SPEC_ERROR if e.code not in (0, None) else 0
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (SpecError, ParameterError, UnsupportedBase, RegistryError, KeyError, ValueError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return SPEC_ERROR


if __name__ == "__main__":
    sys.exit(main())
