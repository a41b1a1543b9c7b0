"""Command-line front end.

Each command evaluates one or more grid points and writes one flat record
per point, as a JSON array or as CSV with a header.  Floats are written in
shortest round-trip form, so a file parses back to the exact values.

Exit status: 0 ok, 2 bad configuration, 3 not admissible, 4 regime
violation, 5 numerical failure.  On error nothing is written to the output
and a one-line JSON diagnostic goes to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

from . import montecarlo as mc
from . import sld
from .errors import InvalidParameter, LpSldError
from .gengauss import PqParams
from .legendre import rate_norm

SEED_ENV = "LPSLD_SEED"
COMMANDS = ("sld-cone", "sld-ball", "intersect", "project", "rate-curve", "mc", "compare", "constants")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidParameter(message)


# --- argument types -----------------------------------------------------------


def _real(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("NaN is not allowed")
    return v


def _real_list(text):
    return [_real(t) for t in text.split(",") if t.strip()]


def _int_list(text):
    out = []
    for t in text.split(","):
        try:
            out.append(int(t))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {t!r}") from None
        if out[-1] < 1:
            raise argparse.ArgumentTypeError(f"must be positive: {t!r}")
    return out


def parse_grid(text):
    """``lo:hi:steps``, both endpoints included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must look like lo:hi:steps, got {text!r}")
    lo, hi = _real(parts[0]), _real(parts[1])
    try:
        steps = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid step count must be an integer, got {parts[2]!r}") from None
    if steps < 1 or (steps == 1 and lo != hi):
        raise argparse.ArgumentTypeError(f"grid needs at least 2 steps unless lo == hi, got {text!r}")
    if steps == 1:
        return [lo]
    return [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise InvalidParameter(f"{SEED_ENV}={raw!r} is not an integer") from None
    if seed < 0:
        raise InvalidParameter(f"{SEED_ENV} must be non-negative, got {seed}")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lpsld", description="Sharp large deviations for q-norms on l_p^n spheres and balls.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, pq=True):
        if pq:
            sp.add_argument("--p", type=_real, required=True)
            sp.add_argument("--q", type=_real, required=True)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", help="write here instead of stdout")

    def zs(sp, required=True):
        g = sp.add_mutually_exclusive_group(required=required)
        g.add_argument("--z", type=_real_list, help="level or comma-separated levels")
        g.add_argument("--z-grid", type=parse_grid, help="lo:hi:steps, inclusive")

    def sampling(sp, method):
        sp.add_argument("--samples", type=int, default=100_000)
        sp.add_argument("--seed", type=int, default=None, help=f"default from ${SEED_ENV}, else 0")
        sp.add_argument("--method", choices=mc.METHODS, default=method)

    for name in ("sld-cone", "sld-ball"):
        sp = sub.add_parser(name, help=f"leading-order tail under the {'cone' if name == 'sld-cone' else 'uniform'} measure")
        common(sp)
        sp.add_argument("--n", type=_int_list, required=True)
        zs(sp)

    sp = sub.add_parser("intersect", help="volume of D_p^n cap t D_q^n")
    common(sp)
    sp.add_argument("--n", type=_int_list, required=True)
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--t", type=_real_list)
    g.add_argument("--At", type=_real_list, help="values of A_(p,q) t instead of t")
    sp.add_argument("--samples", type=int, default=0, help="add a Monte Carlo estimate when > 0")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--method", choices=mc.METHODS, default="plain")

    sp = sub.add_parser("project", help="tail of the projection length of B_q^n onto a random direction")
    common(sp, pq=False)
    sp.add_argument("--n", type=_int_list, required=True)
    sp.add_argument("--q-proj", type=_real, required=True, help="exponent in (2, inf]")
    zs(sp)

    sp = sub.add_parser("rate-curve", help="rate, tilt and covariance along a z grid")
    common(sp)
    zs(sp)

    sp = sub.add_parser("mc", help="Monte Carlo estimate")
    common(sp, pq=False)
    sp.add_argument("--p", type=_real)
    sp.add_argument("--q", type=_real)
    sp.add_argument("--measure", choices=("cone", "ball", "intersect", "project"), default="cone")
    sp.add_argument("--n", type=_int_list, required=True)
    zs(sp, required=False)
    sp.add_argument("--t", type=_real_list)
    sp.add_argument("--q-proj", type=_real)
    sampling(sp, "plain")

    sp = sub.add_parser("compare", help="analytic tails next to Monte Carlo")
    common(sp)
    sp.add_argument("--n", type=_int_list, required=True)
    zs(sp)
    sampling(sp, "tilted")

    sp = sub.add_parser("constants", help="ball volumes and normalizing constants")
    common(sp)
    sp.add_argument("--n", type=_int_list, required=True)
    return parser


# --- records ------------------------------------------------------------------


def _zlist(args):
    return args.z if args.z is not None else args.z_grid


def _seed(args):
    seed = args.seed if args.seed is not None else _default_seed()
    if seed < 0:
        raise InvalidParameter(f"--seed must be non-negative, got {seed}")
    return seed


def _sld_record(est: sld.SldEstimate):
    rec = {"n": est.n, "z": est.z, "rate": est.rate}
    rec.update({k: float(v) for k, v in est.terms.items()})
    rec.update({"prefactor": est.prefactor, "probability": est.probability, "regime": est.regime})
    return rec


def _mc_record(e: mc.McEstimate, prefix="mc_"):
    return {
        prefix + "p_hat": e.p_hat,
        prefix + "stderr": e.stderr,
        prefix + "ci95_lo": e.ci95_lo,
        prefix + "ci95_hi": e.ci95_hi,
        prefix + "hits": e.hits,
    }


def _cmd_sld(args):
    params = PqParams(args.p, args.q)
    fn = sld.tail_cone if args.command == "sld-cone" else sld.tail_ball
    out = []
    for n in args.n:
        for z in _zlist(args):
            out.append({"p": params.p, "q": params.q, "measure": "cone" if args.command == "sld-cone" else "uniform",
                        **_sld_record(fn(n, z, params))})
    return out


def _t_values(args, params, n):
    if args.t is not None:
        return list(args.t)
    a = sld.ball_constants(n, params).A_pq
    return [v / a for v in args.At]


def _cmd_intersect(args):
    params = PqParams(args.p, args.q)
    seed = _seed(args)
    out = []
    for n in args.n:
        for t in _t_values(args, params, n):
            est = sld.intersection_volume(n, t, params)
            rec = {"p": params.p, "q": params.q, "n": n, "t": est.t, "A_t": est.A_t, "z_eff": est.z_eff,
                   "rate": est.tail.rate, "gamma": est.tail.terms["gamma"], "tail_probability": est.tail.probability,
                   "volume": est.volume, "regime": est.tail.regime}
            if args.samples:
                e = mc.mc_intersection(n, t, params, args.samples, seed, args.method)
                rec.update({"seed": seed, "samples": args.samples, "method": args.method, **_mc_record(e)})
            out.append(rec)
    return out


def _cmd_project(args):
    out = []
    for n in args.n:
        for z in _zlist(args):
            est = sld.projection_tail(n, args.q_proj, z)
            out.append({"p": 2.0, "q_proj": args.q_proj, **_sld_record(est)})
    return out


def _cmd_rate_curve(args):
    params = PqParams(args.p, args.q)
    out = []
    tau0 = None
    for z in _zlist(args):
        rp = rate_norm(z, params, tau0)
        tau0 = (rp.tau.tau1, rp.tau.tau2)
        out.append({"p": params.p, "q": params.q, "z": float(z), "rate": rp.rate, "tau1": rp.tau.tau1,
                    "tau2": rp.tau.tau2, "det_hess": rp.det_hess, "iterations": rp.iterations})
    return out


def _cmd_mc(args):
    seed = _seed(args)
    out = []
    if args.measure == "project":
        if args.q_proj is None or _zlist(args) is None:
            raise InvalidParameter("--measure project needs --q-proj and --z/--z-grid")
    elif args.p is None or args.q is None:
        raise InvalidParameter(f"--measure {args.measure} needs --p and --q")
    if args.measure == "intersect":
        if args.t is None:
            raise InvalidParameter("--measure intersect needs --t")
        levels = args.t
    else:
        levels = _zlist(args)
        if levels is None:
            raise InvalidParameter(f"--measure {args.measure} needs --z or --z-grid")
    for n in args.n:
        for v in levels:
            base = {"measure": args.measure, "n": n, "seed": seed, "samples": args.samples, "method": args.method}
            if args.measure == "project":
                e = mc.mc_projection(n, args.q_proj, v, args.samples, seed, args.method)
                rec = {"q_proj": args.q_proj, "z": v, **base}
            else:
                params = PqParams(args.p, args.q)
                fn = {"cone": mc.mc_tail_cone, "ball": mc.mc_tail_ball, "intersect": mc.mc_intersection}[args.measure]
                e = fn(n, v, params, args.samples, seed, args.method)
                rec = {"p": params.p, "q": params.q, ("t" if args.measure == "intersect" else "z"): v, **base}
            rec.update(_mc_record(e))
            out.append(rec)
    return out


def _cmd_compare(args):
    params = PqParams(args.p, args.q)
    seed = _seed(args)
    out = []
    for n in args.n:
        for z in _zlist(args):
            r = mc.compare(n, z, params, args.samples, seed, args.method)
            sc, sb = r["sld_cone"], r["sld_ball"]
            out.append({
                "p": params.p, "q": params.q, "n": n, "z": float(z), "seed": seed, "samples": args.samples,
                "method": args.method, "rate": sc.rate, "xi": sc.terms["xi"], "kappa": sc.terms["kappa"],
                "gamma": sb.terms["gamma"], "sld_cone": sc.probability, "sld_ball": sb.probability,
                "regime_cone": sc.regime, "regime_ball": sb.regime,
                **_mc_record(r["mc_cone"], "mc_cone_"), **_mc_record(r["mc_ball"], "mc_ball_"),
                "ratio_cone": r["ratio_cone"], "ratio_ball": r["ratio_ball"],
                "mc_cone_over_ball": r["mc_cone_over_ball"],
                "mc_cone_over_ball_stderr": r["mc_cone_over_ball_stderr"],
                "prefactor_ratio": r["prefactor_ratio"],
            })
    return out


def _cmd_constants(args):
    params = PqParams(args.p, args.q)
    out = []
    for n in args.n:
        bc = sld.ball_constants(n, params)
        out.append({"p": bc.p, "q": bc.q, "n": bc.n, "log_vol": bc.log_vol, "c_np": bc.c_np, "c_p": bc.c_p,
                    "c_nq": bc.c_nq, "c_q": bc.c_q, "c_npq": bc.c_npq, "A_npq": bc.A_npq, "A_pq": bc.A_pq,
                    "m_pq": params.m})
    return out


_HANDLERS = {
    "sld-cone": _cmd_sld,
    "sld-ball": _cmd_sld,
    "intersect": _cmd_intersect,
    "project": _cmd_project,
    "rate-curve": _cmd_rate_curve,
    "mc": _cmd_mc,
    "compare": _cmd_compare,
    "constants": _cmd_constants,
}


# --- serialization ------------------------------------------------------------


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_json(records) -> str:
    return json.dumps(records, indent=1) + "\n"


def to_csv(records) -> str:
    buf = io.StringIO()
    if records:
        w = csv.writer(buf, lineterminator="\n")
        header = list(records[0])
        w.writerow(header)
        for r in records:
            w.writerow([_cell(r[k]) for k in header])
    return buf.getvalue()


def _execute(argv):
    try:
        args = build_parser().parse_args(argv)
        records = _HANDLERS[args.command](args)
        text = to_json(records) if args.format == "json" else to_csv(records)
        return 0, text, args.output
    except LpSldError as exc:
        return exc.exit_status, json.dumps({"error": exc.code, "exit_status": exc.exit_status, "message": str(exc)}), None
    except (ArithmeticError, ValueError) as exc:
        return 5, json.dumps({"error": type(exc).__name__, "exit_status": 5, "message": str(exc)}), None


def run(argv=None) -> tuple[int, str]:
    """Parse and execute; returns ``(exit status, serialized report)``.

    The report is the error diagnostic on failure.
    """
    status, text, _ = _execute(argv)
    return status, text


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if any(a in ("-h", "--help") for a in argv):
        build_parser().parse_args(argv)  # prints help and exits 0
    status, text, out = _execute(argv)
    if status != 0:
        sys.stderr.write(text + "\n")
        return status
    try:
        if out:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        sys.stderr.write(json.dumps({"error": "OutputError", "exit_status": 2, "message": str(exc)}) + "\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
