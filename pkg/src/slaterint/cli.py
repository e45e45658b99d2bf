"""Command-line front end.

    slaterint eval     --kind s3 --route closed --etas 1,1,1
    slaterint verify   --suite identities --seed 7
    slaterint converge --kind s2 --route new-transform --etas 1,2 --x2 1 --budget 1000,10000,100000

Exit codes: 0 success, 1 usage or precondition error, 2 non-convergence or
failed checks.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import amplitudes as amp
from .errors import DomainError
from .quadrature import eval_budget
from .verify import SUITES, run_suites

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
REPORT_KEYS = ("command", "params", "route", "value", "err_estimate", "n_evals",
               "converged", "wall_ms", "checks")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text):
    try:
        return tuple(float(t) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return tuple(int(float(t)) for t in str(text).split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="slaterint", description="Slater-orbital amplitudes and integral identities.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--format", choices=("json", "csv", "human"), default="human")
        sp.add_argument("--config", help="JSON file with the same fields as the flags")
        sp.add_argument("--tol", type=float, help="tolerance override")
        sp.add_argument("--seed", type=int, default=0)

    def amplitude(sp):
        # --kind and --etas may come from --config, so they are checked after merging
        sp.add_argument("--kind", help="s2, s2-coulomb-limit, s3 or s4")
        sp.add_argument("--route", default="closed-form")
        sp.add_argument("--etas", type=_floats)
        sp.add_argument("--x2", type=float)

    e = sub.add_parser("eval", help="evaluate an amplitude along one route")
    amplitude(e)
    common(e)
    v = sub.add_parser("verify", help="run verification suites")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--m", type=int, help="restrict the kernels suite to M orbitals")
    common(v)
    c = sub.add_parser("converge", help="error against evaluation budget for one route")
    amplitude(c)
    c.add_argument("--budget", type=_ints, default=(100, 1000, 10_000, 100_000))
    common(c)
    return p


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        # flags given on the command line win over the file
        explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
        for key, val in cfg.items():
            key = key.replace("-", "_")
            if key in explicit or key in ("command", "config"):
                continue
            if key in ("etas",) and not isinstance(val, str):
                val = ",".join(str(x) for x in val)
            if key == "budget" and not isinstance(val, str):
                val = ",".join(str(x) for x in val)
            if key == "etas":
                val = _floats(val)
            elif key == "budget":
                val = _ints(val)
            if not hasattr(args, key):
                raise UsageError(f"unknown config field {key!r}")
            setattr(args, key, val)
    if args.command in ("eval", "converge"):
        missing = [f"--{k}" for k in ("kind", "etas") if getattr(args, k) is None]
        if missing:
            raise UsageError("the following arguments are required: " + ", ".join(missing))
    return args


def _spec(args) -> amp.AmplitudeSpec:
    return amp.AmplitudeSpec(args.kind, args.etas, args.x2)


def _report(command, params, route=None, value=None, err=None, n=None, converged=None,
            wall_ms=0.0, checks=()):
    return dict(zip(REPORT_KEYS, (command, params, route, value, err, n, converged,
                                  round(wall_ms, 3), list(checks))))


def _fmt(x):
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def _emit(report, fmt, rows=None, columns=None, out=None):
    out = sys.stdout if out is None else out
    if fmt == "json":
        out.write(json.dumps(report, ensure_ascii=False, sort_keys=False) + "\n")
        return
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        if rows is None:
            cols = [k for k in REPORT_KEYS if k not in ("checks", "params")]
            w.writerow(cols)
            w.writerow([json.dumps(report[k]) if isinstance(report[k], (dict, list)) else report[k]
                        for k in cols])
        else:
            w.writerow(columns)
            for r in rows:
                w.writerow([r[c] for c in columns])
        out.write(buf.getvalue())
        return
    lines = [f"{report['command']}: " + ", ".join(f"{k}={_fmt(v)}" for k, v in report["params"].items())]
    for k in ("route", "value", "err_estimate", "n_evals", "converged", "wall_ms"):
        if report[k] is not None:
            lines.append(f"  {k:13s}{_fmt(report[k])}")
    if rows is not None:
        lines.append("  " + "  ".join(f"{c:>14s}" for c in columns))
        for r in rows:
            lines.append("  " + "  ".join(f"{_fmt(r[c]):>14s}" for c in columns))
    out.write("\n".join(lines) + "\n")


def cmd_eval(args) -> int:
    spec = _spec(args)
    route = amp.PipelineRoute(args.route)
    t0 = time.perf_counter()
    res = amp.evaluate(spec, route, rel_tol=args.tol)
    wall = (time.perf_counter() - t0) * 1e3
    checks = []
    if route.route != "closed-form":
        truth = amp.closed_value(spec)
        checks.append({"name": "closed_form_agreement", "measured": res.rel_err(truth),
                       "tol": max(args.tol or 0.0, 1e-6), "n": 1,
                       "passed": res.rel_err(truth) <= max(args.tol or 0.0, 1e-6)})
    params = {"kind": spec.kind, "etas": list(spec.etas), "x2": spec.x2, "tol": args.tol}
    rep = _report("eval", params, route.route, res.value, res.err_estimate, res.n_evals,
                  res.converged, wall, checks)
    _emit(rep, args.format)
    return EXIT_OK if res.converged else EXIT_FAIL


def cmd_verify(args) -> int:
    t0 = time.perf_counter()
    checks = run_suites(args.suite, seed=args.seed, tol=args.tol, m=args.m)
    wall = (time.perf_counter() - t0) * 1e3
    rows = [c.as_dict() for c in checks]
    ok = all(c.passed for c in checks)
    n_pass = sum(c.passed for c in checks)
    params = {"suite": args.suite, "seed": args.seed, "tol": args.tol, "m": args.m}
    rep = _report("verify", params, None, n_pass / len(checks) if checks else 1.0, None,
                  len(checks), ok, wall, rows)
    if args.format == "human":
        _emit(rep, "human", [dict(r, passed="PASS" if r["passed"] else "FAIL") for r in rows],
              ["passed", "measured", "tol", "name"])
    else:
        _emit(rep, args.format, rows if args.format == "csv" else None,
              ["name", "measured", "tol", "n", "passed"])
    return EXIT_OK if ok else EXIT_FAIL


def cmd_converge(args) -> int:
    spec = _spec(args)
    route = amp.PipelineRoute(args.route)
    if route.route == "closed-form":
        raise UsageError("nothing to converge: the closed-form route has no evaluation budget")
    if not route.valid_for(spec.kind):
        raise UsageError(f"route {route.route!r} is not available for {spec.kind}")
    if not args.budget or min(args.budget) < 15:
        raise UsageError("--budget entries must be >= 15")
    truth = amp.closed_value(spec)
    t0 = time.perf_counter()
    rows = []
    for b in sorted(args.budget):
        with eval_budget(b):
            res = amp.evaluate(spec, route, rel_tol=args.tol)
        rows.append({"budget": b, "n_evals": res.n_evals, "value": res.value,
                     "err_estimate": res.err_estimate, "rel_err": res.rel_err(truth),
                     "converged": res.converged})
    wall = (time.perf_counter() - t0) * 1e3
    last = rows[-1]
    params = {"kind": spec.kind, "etas": list(spec.etas), "x2": spec.x2, "tol": args.tol,
              "budget": sorted(args.budget), "truth": truth}
    rep = _report("converge", params, route.route, last["value"], last["err_estimate"],
                  last["n_evals"], last["converged"], wall, rows)
    cols = ["budget", "n_evals", "value", "err_estimate", "rel_err", "converged"]
    _emit(rep, args.format, rows if args.format != "json" else None, cols)
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        return {"eval": cmd_eval, "verify": cmd_verify, "converge": cmd_converge}[args.command](args)
    except UsageError as exc:
        print(f"slaterint: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"slaterint: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
