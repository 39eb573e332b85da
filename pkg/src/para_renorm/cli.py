"""Command-line interface: ``para-renorm <group> <command> ...``.

Exit codes: 0 when the run passes, 1 when a check fails or a computation
raises a library error, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config

SCHEMA = "para-renorm/1"
CSV_HEADER = ("z_re", "z_im", "phi_re", "phi_im", "residual")


def _library_errors() -> tuple:
    from .fatou import FatouError
    from .gauss_dynamics import GaussError
    from .maps import MapError
    from .mcf import MCFError
    from .numerics_core import NumericsError
    from .renorm import RenormError
    from .tower import TowerError
    return (FatouError, GaussError, MapError, MCFError, NumericsError, RenormError, TowerError,
            ZeroDivisionError)


def _input_errors() -> tuple:
    from .mcf import InvalidCF, OutOfRange
    from .tower import ModeMismatch
    return (InvalidCF, OutOfRange, ModeMismatch)


# --- report emission --------------------------------------------------------

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(x.real), _jsonable(x.imag)]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    return x


def render_json(report) -> str:
    # non-object results sit under "result" so every report carries the schema tag
    body = _jsonable(report) if isinstance(report, dict) else {"result": _jsonable(report)}
    body = {"schema": SCHEMA, **body}
    return json.dumps(body, sort_keys=True, indent=2) + "\n"


def render_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def emit_report(report, cfg: RunConfig, out=None) -> None:
    """Write a JSON report (dict) or CSV rows (list of 5-tuples)."""
    text = render_csv(report) if cfg.format == "csv" else render_json(report)
    if cfg.path:
        with open(cfg.path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        (out or sys.stdout).write(text)


# --- parsing helpers ---------------------------------------------------------

def _complex(text: str) -> complex:
    try:
        return complex(text.replace("i", "j").replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _cf_or_rational(text: str):
    from .mcf import expand, parse_cf
    text = text.strip()
    return parse_cf(text) if text.startswith("(") else expand(_rational(text))


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _seq(text: str):
    from .mcf import parse_seq
    return parse_seq(text)


# --- commands ------------------------------------------------------------------

def cmd_cf(args, cfg):
    from .mcf import convergents, evaluate, expand, kappa_type, qg_check
    if args.cmd == "expand":
        return expand(_rational(args.x)).to_json(), True
    if args.cmd == "evaluate":
        return {"value": str(evaluate(_cf_or_rational(args.cf)))}, True
    if args.cmd == "convergents":
        cv = convergents(_cf_or_rational(args.cf))
        return {"p": list(cv.p), "q": list(cv.q), "product_ok": cv.product_ok}, cv.product_ok
    if args.cmd == "qg-check":
        seq = _seq(args.seq)
        rep = qg_check(seq, args.N if args.N is not None else cfg.const("N"))
        out = rep.to_json()
        if rep.ok:
            word, ls = kappa_type(seq, sum(seq.ms))
            out["kappa"] = "".join(word)
            out["sub_levels"] = ls
        return out, rep.ok
    raise AssertionError(args.cmd)


def cmd_gauss(args, cfg):
    from .gauss_dynamics import cone_check, cylinder_ball, gauss_orbit, qg_disk_check
    if args.cmd == "orbit":
        try:
            z = _rational(args.z)
        except argparse.ArgumentTypeError:
            z = _complex(args.z)
        return gauss_orbit(z, args.n).to_json(), True
    if args.cmd == "ball":
        d = cylinder_ball(_cf_or_rational(args.cf))
        return {"center": d.center, "radius": d.radius}, True
    if args.cmd == "cone-check":
        rep = cone_check(_cf_or_rational(args.cf), args.samples, raise_on_fail=False)
        return rep.to_json(), rep.ok
    if args.cmd == "qg-disk-check":
        rep = qg_disk_check(_seq(args.seq), args.block, args.r, samples=args.samples,
                            N=args.N, raise_on_fail=False)
        return rep.to_json(), rep.ok
    raise AssertionError(args.cmd)


def cmd_maps(args, cfg):
    from .maps import MapSpec, fixed_point_data, periodic_points, ply_disk
    if args.cmd == "fixed-data":
        fp = fixed_point_data(_map(args))
        ok = fp.index_residual <= cfg.tol("index")
        return fp.to_json(), ok
    if args.cmd == "cycles":
        cycles = periodic_points(_map(args), args.period)
        return {"period": args.period, "cycles": [c.to_json() for c in cycles]}, True
    if args.cmd == "ply":
        d = ply_disk(_rational(args.pq), args.k)
        return {"pq": args.pq, "k": args.k, "center": d.center, "radius": d.radius}, True
    raise AssertionError(args.cmd)


def _map(args):
    from .maps import MapSpec
    alpha = _complex(args.alpha)
    c = getattr(args, "c", None)
    return MapSpec.moebius(_complex(c), alpha) if c else MapSpec.quadratic(alpha)


def _fatou(args, cfg, end="top"):
    from .fatou import build_fatou
    return build_fatou(_map(args), mode=args.mode, end=end, eps_imag=cfg.const("eps_imag"),
                       inner_radius=cfg.const("D5_proxy"))


def cmd_fatou(args, cfg):
    from .fatou import grid_residual, petal_width_probe, spiral_probe
    fa = _fatou(args, cfg)
    if args.cmd == "grid":
        g = grid_residual(fa, args.n)
        ok = fa.mode == "model" or g.max <= cfg.tol("fatou_residual")
        if cfg.format == "csv":
            rows = [(z.real, z.imag, p.real, p.imag, r) for z, p, r in zip(g.z, g.phi, g.residual)]
            return rows, ok
        return {"alpha": fa.alpha, "mode": fa.mode, "max_residual": g.max, "mean_residual": g.mean,
                "points": [[z.real, z.imag, p.real, p.imag, r]
                           for z, p, r in zip(g.z, g.phi, g.residual)]}, ok
    if args.cmd == "spiral":
        rep = spiral_probe(fa, xi1=args.xi1, k_prime=cfg.const("k_prime_proxy"))
        return rep.to_json(), rep.ok
    if args.cmd == "width":
        W = petal_width_probe(fa, k_bar=cfg.const("k_bar_proxy"))
        return {"alpha": fa.alpha, "width": W, "expected": (1 / fa.alpha).real}, True
    raise AssertionError(args.cmd)


def cmd_renorm(args, cfg):
    from .renorm import renorm_sample
    fa = _fatou(args, cfg, end=args.end)
    rs = renorm_sample(fa, end=args.end, cap=cfg.const("iteration_cap"),
                       wd_tol=cfg.tol("well_defined"), rel_tol=cfg.tol("renorm_rel"))
    return rs.to_json(), rs.ok


def cmd_tower(args, cfg):
    from .tower import ALPHA_STAR, cantor_bisect, parse_seed, qg_inclusion_check, tower_run
    r = args.r if getattr(args, "r", None) is not None else cfg.const("r3_proxy")
    if args.cmd == "run":
        seed = _seq(args.seed) if args.mode == "ply-disk" else parse_seed(args.seed)
        st = tower_run(seed, args.kappa, args.depth, args.mode, r)
        return {"seed": args.seed, **st.to_json()}, st.status != "exited_sector"
    if args.cmd == "cantor":
        seed = parse_seed(args.seed) if args.seed else ALPHA_STAR
        levels = cantor_bisect(None, args.depth, args.r if args.r is not None else 0.15, seed,
                               mu_proxy=cfg.const("mu_proxy"))
        d = [float(lv.diameter) for lv in levels]
        return {"seed": str(seed), "levels": [lv.to_json() for lv in levels],
                "ratios": [b / a for a, b in zip(d, d[1:])]}, True
    if args.cmd == "qg-check":
        rep = qg_inclusion_check(_seq(args.seq), args.N if args.N is not None else cfg.const("N"),
                                 args.depth, cfg.const("r3_proxy"), cfg.const("r5_proxy"))
        return rep.to_json(), rep.ok
    raise AssertionError(args.cmd)


def _sweep_cell(task):
    seq_text, N, depth, r3, r5 = task
    from .tower import qg_inclusion_check
    rep = qg_inclusion_check(_seq(seq_text), N, depth, r3, r5)
    return {"r3": r3, "r5": r5, "ok": rep.ok, "rejected": rep.rejected,
            "blocks_ok": [b["ok"] for b in rep.blocks]}


def cmd_sweep(args, cfg):
    N = args.N if args.N is not None else cfg.const("N")
    tasks = [(args.seq, N, args.depth, r3, r5) for r3 in _floats(args.r3) for r5 in _floats(args.r5)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            cells = list(pool.map(_sweep_cell, tasks))
    else:
        cells = [_sweep_cell(t) for t in tasks]
    return {"seq": args.seq, "N": N, "cells": cells}, True


def cmd_config(args, cfg):
    return cfg.to_json(), True


def cmd_selftest(args, cfg):
    from .selftest import run_selftest
    rep = run_selftest(cfg)
    return rep, rep["ok"]


COMMANDS = {"cf": cmd_cf, "gauss": cmd_gauss, "maps": cmd_maps, "fatou": cmd_fatou,
            "renorm": cmd_renorm, "tower": cmd_tower, "sweep": cmd_sweep,
            "config": cmd_config, "selftest": cmd_selftest}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="para-renorm", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="key=value config file (default: $PARA_RENORM_CONFIG)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry; repeatable")
    p.add_argument("--out", choices=("json", "csv"), help="output format")
    p.add_argument("--output", help="write the report to this path instead of stdout")
    p.add_argument("--workers", type=int, help="worker processes for sweeps")
    sub = p.add_subparsers(dest="group", required=True)

    cf = sub.add_parser("cf", help="signed continued fractions").add_subparsers(dest="cmd", required=True)
    cf.add_parser("expand").add_argument("x", help="rational p/q with 0 < |p/q| <= 1/2")
    cf.add_parser("evaluate").add_argument("cf", help='"(3,+)(2,-)(2,+)" or p/q')
    cf.add_parser("convergents").add_argument("cf")
    q = cf.add_parser("qg-check")
    q.add_argument("--seq", required=True, help='blocks separated by ";", e.g. "(20,+);(400,+)"')
    q.add_argument("--N", type=int)

    g = sub.add_parser("gauss", help="the Gauss map G").add_subparsers(dest="cmd", required=True)
    o = g.add_parser("orbit")
    o.add_argument("z")
    o.add_argument("--n", type=int, default=64)
    g.add_parser("ball").add_argument("cf")
    c = g.add_parser("cone-check")
    c.add_argument("cf")
    c.add_argument("--samples", type=int, default=256)
    d = g.add_parser("qg-disk-check")
    d.add_argument("--seq", required=True)
    d.add_argument("--block", type=int, default=1)
    d.add_argument("--r", type=float, default=0.2)
    d.add_argument("--samples", type=int, default=128)
    d.add_argument("--N", type=int)

    m = sub.add_parser("maps", help="quadratic and Moebius maps").add_subparsers(dest="cmd", required=True)
    fd = m.add_parser("fixed-data")
    fd.add_argument("--alpha", required=True)
    fd.add_argument("--c", help="Moebius parameter (quadratic family if absent)")
    cy = m.add_parser("cycles")
    cy.add_argument("--alpha", required=True)
    cy.add_argument("--period", type=int, required=True)
    pl = m.add_parser("ply")
    pl.add_argument("--pq", required=True)
    pl.add_argument("--k", type=int, default=1)

    f = sub.add_parser("fatou", help="Fatou coordinates").add_subparsers(dest="cmd", required=True)
    for name in ("grid", "spiral", "width"):
        s = f.add_parser(name)
        s.add_argument("--alpha", required=True)
        s.add_argument("--mode", choices=("refined", "model"), default="refined")
        if name == "grid":
            s.add_argument("--n", type=int, default=20)
        if name == "spiral":
            s.add_argument("--xi1", type=float, default=1.0)

    r = sub.add_parser("renorm", help="sampled renormalizations").add_subparsers(dest="cmd", required=True)
    rs = r.add_parser("sample")
    rs.add_argument("--alpha", required=True)
    rs.add_argument("--end", choices=("top", "bottom"), default="top")
    rs.add_argument("--mode", choices=("refined",), default="refined")

    t = sub.add_parser("tower", help="renormalization towers").add_subparsers(dest="cmd", required=True)
    tr = t.add_parser("run")
    tr.add_argument("--seed", required=True, help="rotation (1/7, (sqrt(45)-7)/2, 0.1+0.05i) or block sequence")
    tr.add_argument("--kappa", help='type sequence, e.g. "t^50" or "btt"')
    tr.add_argument("--mode", choices=("exact", "ply-disk", "analytic"), default="exact")
    tr.add_argument("--depth", type=int, default=10)
    tr.add_argument("--r", type=float)
    tc = t.add_parser("cantor")
    tc.add_argument("--seed")
    tc.add_argument("--depth", type=int, default=4)
    tc.add_argument("--r", type=float)
    tq = t.add_parser("qg-check")
    tq.add_argument("--seq", required=True)
    tq.add_argument("--N", type=int)
    tq.add_argument("--depth", type=int)

    sw = sub.add_parser("sweep", help="inclusion pipeline over a grid of (r3, r5)")
    sw.add_argument("--seq", required=True)
    sw.add_argument("--N", type=int)
    sw.add_argument("--depth", type=int)
    sw.add_argument("--r3", default="0.05,0.1,0.2")
    sw.add_argument("--r5", default="0.025,0.05,0.1,0.2")

    sub.add_parser("config", help="configuration").add_subparsers(dest="cmd", required=True).add_parser("show")
    sub.add_parser("selftest", help="deterministic invariant suite")
    return p


def dispatch(argv=None, out=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        overrides = dict(kv.split("=", 1) for kv in args.set)
    except ValueError:
        parser.print_usage(sys.stderr)
        print("--set expects KEY=VALUE", file=sys.stderr)
        return 2
    for key, val in (("format", args.out), ("path", args.output), ("workers", args.workers)):
        if val is not None:
            overrides[key] = val
    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    if cfg.format == "csv" and (args.group, getattr(args, "cmd", None)) != ("fatou", "grid"):
        print("csv output is only available for 'fatou grid'", file=sys.stderr)
        return 2
    try:
        report, ok = COMMANDS[args.group](args, cfg)
    except (argparse.ArgumentTypeError,) + _input_errors() as e:
        print(f"usage error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    except (_library_errors() + (AssertionError, ValueError)) as e:
        report, ok = {"ok": False, "error": type(e).__name__, "message": str(e)}, False
        if cfg.format == "csv":
            print(f"{type(e).__name__}: {e}", file=sys.stderr)
            return 1
    try:
        emit_report(report, cfg, out)
    except OSError as e:
        print(f"cannot write report: {e}", file=sys.stderr)
        return 1
    return 0 if ok else 1


def main() -> None:
    sys.exit(dispatch())
