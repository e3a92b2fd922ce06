"""Command-line entry point.

Exit codes: 0 all checks pass, 1 at least one check fails, 2 usage or configuration
error, 3 input/output failure.
"""

import argparse
import ast
import configparser
import json
import os
import sys

import numpy as np

from . import appendix_oracle as apx
from .bubble import BubbleTrace, W_closed_form, build_profile, extension_jet
from .constants import ParamPoint, constants
from .errors import DomainError, NumericError
from .minimizer import INITS, bubble_match, minimize
from .plots import write_plots
from .quad import Boundary, HalfBall, HalfSpace, QuadratureSpec, integrate_radial, mc_oracle
from .report import Status, emit
from .suites import SUITES, run_suite

OK, FAILED, USAGE, IO_ERROR = 0, 1, 2, 3

SUITE_COMMANDS = {
    "constants": "constants",
    "verify-bubble": "bubble",
    "verify-extension": "extension",
    "verify-appendix": "appendix",
    "interaction": "interaction",
    "landscape": "landscape",
    "self-action": "energy",
    "all": "all",
}


class UsageError(Exception):
    pass


def load_config(path):
    """Sections name suites; values are Python literals (numbers, lists, strings)."""
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise UsageError(f"config parse error: {exc}") from exc
    out = {}
    for section in parser.sections():
        if section not in SUITES:
            raise UsageError(f"config section [{section}] is not a suite; choose from {', '.join(SUITES)}")
        vals = {}
        for key, raw in parser.items(section):
            try:
                vals[key] = ast.literal_eval(raw)
            except (ValueError, SyntaxError):
                vals[key] = raw
            if isinstance(vals[key], list):
                vals[key] = tuple(tuple(v) if isinstance(v, list) else v for v in vals[key])
        out[section] = vals
    return out


def _common(parser):
    parser.add_argument("--config", help="key-value config file with one section per suite")
    parser.add_argument("--out", help="output path (default: standard output)")
    parser.add_argument("--format", choices=("json", "csv", "text"), default="json")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--fast", action="store_true", help="reduced grids; every check still runs")
    parser.add_argument("--plots", action="store_true", help="write SVG plots of sweeps next to --out")


def _point(parser, n=3, gamma=0.5):
    parser.add_argument("--n", type=int, default=n)
    parser.add_argument("--gamma", type=float, default=gamma)


def build_parser():
    top = argparse.ArgumentParser(prog="fracyam", description="Numerical checks for the flat fractional "
                                                              "Yamabe model.")
    sub = top.add_subparsers(dest="command", required=True)
    for name in SUITE_COMMANDS:
        label = "every suite" if name == "all" else f"the {SUITE_COMMANDS[name]} checks"
        _common(sub.add_parser(name, help=f"run {label}"))
    sub.choices["constants"].add_argument("--n", type=int, help="print the constant set for this point instead")
    sub.choices["constants"].add_argument("--gamma", type=float)
    c4 = sub.add_parser("c4-scan", help="sign scan of the Weyl coefficient")
    _common(c4)
    c4.add_argument("--steps", type=int, default=40)
    mn = sub.add_parser("minimize", help="minimize the trace energy from a chosen start")
    _common(mn)
    _point(mn)
    mn.add_argument("--init", choices=sorted(INITS), default="gaussian")
    mn.add_argument("--tol", type=float, default=1e-6)
    mn.add_argument("--max-iter", type=int, default=200)
    mn.add_argument("--profile-csv", help="also write the final trace as r,value rows")
    it = sub.add_parser("integrate", help="weighted integral of a named radial integrand")
    _common(it)
    _point(it)
    it.add_argument("--integrand", choices=("one", "bubble-mass", "bubble-square"), default="bubble-mass")
    it.add_argument("--region", choices=("half-ball", "half-space", "boundary"), default="boundary")
    it.add_argument("--radius", type=float, help="half-ball or boundary-disc radius (boundary default: all)")
    it.add_argument("--weight-exp", type=float, default=0.0)
    it.add_argument("--mc-samples", type=int, default=0, help="also run the Monte-Carlo oracle")
    dp = sub.add_parser("dump-profile", help="write the extended bubble on a grid as CSV")
    _common(dp)
    _point(dp)
    dp.add_argument("--eps", type=float, default=1.0)
    dp.add_argument("--closed-form", action="store_true", help="use the explicit formula (n=7, gamma=1.5 only)")
    dp.add_argument("--nr", type=int, default=60)
    dp.add_argument("--nx", type=int, default=40)
    return top


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _status_code(reports):
    return FAILED if any(r.status is Status.FAIL for r in reports) else OK


def _emit_reports(reports, args):
    text = emit(reports, args.format, None)
    _write(text, args.out)
    if args.plots:
        write_plots(reports, os.path.dirname(os.path.abspath(args.out)) if args.out else os.getcwd())
    return _status_code(reports)


def _cmd_suite(args):
    if args.command == "constants" and args.n is not None:
        cs = constants(ParamPoint(args.n, 0.5 if args.gamma is None else args.gamma))
        _write(json.dumps(cs.as_dict(), indent=2) + "\n", args.out)
        return OK
    reports = run_suite(SUITE_COMMANDS[args.command], load_config(args.config), args.seed, args.fast)
    return _emit_reports(reports, args)


def _cmd_c4(args):
    reports, rows = apx.C4_sign_scan(steps=args.steps)
    if args.format == "csv":
        _write(apx.scan_csv(rows), args.out)
        return _status_code(reports)
    return _emit_reports(reports, args)


def _cmd_minimize(args):
    p = ParamPoint(args.n, args.gamma)
    st = minimize(p, args.init, max_iter=args.max_iter, tol=args.tol, K=4 if args.fast else 5)
    Y = constants(p).Y_sphere
    dev, eps = bubble_match(st)
    result = {"n": p.n, "gamma": p.gamma, "init": args.init, "final_energy": st.energy, "Y_sphere": Y,
              "rel_gap": st.energy / Y - 1, "iterations": st.iteration, "grad_norm": st.grad_norm,
              "flags": st.flags, "bubble_fit_eps": eps, "bubble_fit_deviation": dev}
    _write(json.dumps(result, indent=2) + "\n", args.out)
    if args.profile_csv:
        rows = ["r,value"] + [f"{r!r},{v!r}" for r, v in zip(st.r_grid.tolist(), st.trace.tolist())]
        _write("\n".join(rows) + "\n", args.profile_csv)
    return OK


def _cmd_integrate(args):
    p = ParamPoint(args.n, args.gamma)
    bubble = BubbleTrace(p)
    region = {"half-ball": HalfBall(1.0 if args.radius is None else args.radius), "half-space": HalfSpace(),
              "boundary": Boundary(args.radius)}[args.region]
    if args.integrand == "one":
        f = lambda r, x: np.ones_like(r)
    elif args.integrand == "bubble-mass":
        f = lambda r, x: bubble(r) ** p.crit_exp
    else:
        f = lambda r, x: extension_jet(p, bubble, r, np.maximum(x, 1e-300))["W"] ** 2
    spec = QuadratureSpec(region, args.weight_exp, p.n)
    res = integrate_radial(f, spec)
    out = {"n": p.n, "gamma": p.gamma, "integrand": args.integrand, "region": args.region,
           "value": res.value, "err_estimate": res.err_estimate, "evaluations": res.evaluations,
           "converged": res.converged}
    if args.mc_samples:
        mc = mc_oracle(f, spec, args.mc_samples, args.seed)
        out.update(mc_value=mc.value, mc_std_error=mc.err_estimate, seed=args.seed)
    _write(json.dumps(out, indent=2) + "\n", args.out)
    return OK


def _cmd_dump(args):
    p = ParamPoint(args.n, args.gamma)
    r = np.concatenate([[0.0], np.geomspace(1e-2, 1e2, args.nr - 1)])
    x = np.concatenate([[0.0], np.geomspace(1e-2, 1e2, args.nx - 1)])
    if args.closed_form:
        if (p.n, p.gamma) != (7, 1.5):
            raise UsageError("--closed-form needs n=7, gamma=1.5")
        prof = build_profile(p, None, r, x, closed_form=lambda rr, xx: W_closed_form(args.eps, rr, xx))
    else:
        prof = build_profile(p, BubbleTrace(p, args.eps), r, x)
    _write(prof.to_csv(), args.out)
    return OK


HANDLERS = {"c4-scan": _cmd_c4, "minimize": _cmd_minimize, "integrate": _cmd_integrate,
            "dump-profile": _cmd_dump}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code not in (0, None) else OK
    handler = HANDLERS.get(args.command, _cmd_suite)
    try:
        return handler(args)
    except (UsageError, DomainError) as exc:
        print(f"fracyam: error: {exc}", file=sys.stderr)
        return USAGE
    except NumericError as exc:
        print(f"fracyam: numerical failure: {exc}", file=sys.stderr)
        return FAILED
    except OSError as exc:
        print(f"fracyam: I/O failure: {exc}", file=sys.stderr)
        return IO_ERROR


if __name__ == "__main__":
    sys.exit(main())
