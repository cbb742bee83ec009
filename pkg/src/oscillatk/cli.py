"""Batch front-end: compute functionals, run verification suites, probe
sharpness, emit plot-ready tables.

Exit codes: 0 success; 2 parse error or unknown name; 3 divergent or
invalid functional request; 4 verification failure (summary still
written).  Results go to --out as JSON (CSV for ``report``), or stdout
when no --out is given; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import lab, norms
from .grid import GridFunction, bmo_seminorm, gradient_magnitude, sharp_function, to_step
from .kfunc import ThetaQ, gagliardo1_norm, gagliardo2_norm, interp_norm, k_curve_l1_linf
from .steps import DecreasingStep, Divergent, StepFunction, double_star, oscillation, rearrange
from ._quad import ToleranceNotMet

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_FAILED = 4


def _load_input(path: str):
    """Parse an input file into a StepFunction, DecreasingStep or GridFunction."""
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    if not isinstance(obj, dict):
        raise ValueError("input must be a JSON object")
    if "atoms" in obj:
        return StepFunction.from_json(obj)
    if "dim" in obj and "values" in obj:
        return GridFunction.from_json(obj)
    if "breakpoints" in obj:
        return DecreasingStep.from_json(obj)
    raise ValueError("unrecognized input schema (need atoms / dim+values / breakpoints)")


def _as_pair(obj):
    """(StepFunction, DecreasingStep) view of any input object."""
    if isinstance(obj, StepFunction):
        return obj, rearrange(obj)
    if isinstance(obj, DecreasingStep):
        return obj.as_step(), obj
    return to_step(obj), rearrange(to_step(obj))


def _log_grid(g: DecreasingStep, n: int = 512) -> np.ndarray:
    hi = g.support_measure
    if hi <= 0:
        return np.empty(0)
    lo = min(float(g.breaks[0]) / 2.0, hi * 1e-6)
    return np.geomspace(max(lo, hi * 1e-15), hi, n)


def _compute_one(op: str, obj, args) -> object:
    f, g = _as_pair(obj)
    if op.startswith("{"):
        return norms.norm_from_request(g, json.loads(op))
    if op == "rearrange":
        return g.to_json()
    if op == "oscillation-curve":
        ts = _log_grid(g)
        return {
            "t": [float(t) for t in ts],
            "fstar": [float(v) for v in g.value_at(ts)] if ts.size else [],
            "fstarstar": [float(v) for v in double_star(g, ts)] if ts.size else [],
            "oscillation": [float(v) for v in oscillation(g, ts)] if ts.size else [],
        }
    if op == "linf-inf":
        return norms.linf_inf(g)
    if op == "lorentz":
        return norms.lorentz_norm(g, norms.LorentzParams(
            args.p if args.p is not None else 2.0, args.q))
    if op == "lorentz-inf":
        return norms.lorentz_inf_q(g, args.q)
    if op == "expL":
        return norms.luxemburg_expL(f, f.total_mass or 1.0)
    if op == "delta":
        return norms.delta_extrapolation(g)
    if op == "k-curve":
        return k_curve_l1_linf(g).to_json()
    if op == "interp":
        return interp_norm(k_curve_l1_linf(g), ThetaQ(args.theta, args.q))
    if op == "gagliardo1":
        return gagliardo1_norm(k_curve_l1_linf(g), ThetaQ(args.theta, args.q))
    if op == "gagliardo2":
        return gagliardo2_norm(k_curve_l1_linf(g), ThetaQ(args.theta, args.q))
    if op == "sharp":
        if not isinstance(obj, GridFunction):
            raise Divergent("sharp", "requires a grid input")
        return sharp_function(obj, args.p if args.p is not None else 1.0).to_json()
    if op == "bmo":
        if not isinstance(obj, GridFunction):
            raise Divergent("bmo", "requires a grid input")
        return bmo_seminorm(obj, args.p if args.p is not None else 1.0)
    if op == "gradient":
        if not isinstance(obj, GridFunction):
            raise Divergent("gradient", "requires a grid input")
        return gradient_magnitude(obj).to_json()
    raise KeyError(op)


_KNOWN_OPS = ("rearrange", "oscillation-curve", "linf-inf", "lorentz", "lorentz-inf",
              "expL", "delta", "k-curve", "interp", "gagliardo1", "gagliardo2",
              "sharp", "bmo", "gradient")


def _split_ops(spec: str) -> list[str]:
    """Split a comma-separated op list, keeping inline JSON objects whole."""
    ops, depth, cur = [], 0, []
    for ch in spec:
        if ch == "," and depth == 0:
            if "".join(cur).strip():
                ops.append("".join(cur).strip())
            cur = []
            continue
        depth += ch == "{"
        depth -= ch == "}"
        cur.append(ch)
    if "".join(cur).strip():
        ops.append("".join(cur).strip())
    return ops


def _emit(payload: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")


def cmd_compute(args) -> int:
    try:
        obj = _load_input(args.input)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"compute: cannot parse input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    ops = _split_ops(args.ops)
    for op in ops:
        if not op.startswith("{") and op not in _KNOWN_OPS:
            print(f"compute: unknown op {op!r} (known: {', '.join(_KNOWN_OPS)})",
                  file=sys.stderr)
            return EXIT_PARSE
    results = {}
    for op in ops:
        try:
            key = op if not op.startswith("{") else json.loads(op).get("space", op)
            results[key.replace("-", "_")] = _compute_one(op, obj, args)
        except (Divergent, ToleranceNotMet) as exc:
            print(f"compute: {exc}", file=sys.stderr)
            return EXIT_INVALID
        except (ValueError, json.JSONDecodeError) as exc:
            print(f"compute: invalid request for op {op!r}: {exc}", file=sys.stderr)
            return EXIT_INVALID
    _emit(json.dumps(results, indent=2), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    suite = args.suite_flag or args.suite
    if not suite:
        print("verify: missing suite (names or \"all\")", file=sys.stderr)
        return EXIT_PARSE
    names = lab.registry_names() if suite == "all" else \
        [s.strip() for s in suite.split(",") if s.strip()]
    for name in names:
        if name not in lab.registry_names():
            print(f"verify: unknown check {name!r}", file=sys.stderr)
            return EXIT_PARSE
    reports = []
    for name in names:
        spec = lab.CheckSpec.for_check(name, trials=args.trials, seed=args.seed)
        if args.tolerance is not None:
            spec = lab.CheckSpec(**{**spec.__dict__, "tolerance": args.tolerance})
        report = lab.run_check(spec)
        reports.append(report)
        status = "pass" if report.passed else "FAIL"
        print(f"{name:16s} {status}  max_ratio={report.max_ratio:.6g}  "
              f"({report.runtime_ms:.0f} ms)", file=sys.stderr)
    summary = {
        "suite": suite,
        "trials": args.trials,
        "seed": args.seed,
        "all_pass": all(r.passed for r in reports),
        "reports": [r.to_json() for r in reports],
    }
    _emit(json.dumps(summary, indent=2), args.out)
    return EXIT_OK if summary["all_pass"] else EXIT_FAILED


def cmd_probe(args) -> int:
    if args.name not in lab.registry_names():
        print(f"probe: unknown check {args.name!r}", file=sys.stderr)
        return EXIT_PARSE
    params = {}
    if args.q is not None:
        params["qs"] = [args.q]
    if args.theta is not None:
        params["thetas"] = [args.theta]
    if args.p is not None:
        params["ps"] = [args.p]
    report = lab.probe_sharpness(args.name, params or None, budget=args.budget,
                                 seed=args.seed)
    print(f"{args.name}: best ratio {report.max_ratio:.9g} after {report.trials} "
          f"evaluations", file=sys.stderr)
    _emit(json.dumps(report.to_json(), indent=2), args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        obj = _load_input(args.input)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"report: cannot parse input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    _, g = _as_pair(obj)
    ts = _log_grid(g)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["t", "fstar", "fstarstar", "oscillation"])
    if ts.size:
        fstar = g.value_at(ts)
        dstar = double_star(g, ts)
        for t, a, b in zip(ts, fstar, dstar):
            writer.writerow([repr(float(t)), repr(float(a)), repr(float(b)),
                             repr(float(max(b - a, 0.0)))])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscillatk",
        description="rearrangement calculus, inequality verification and sharpness probes")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_compute = sub.add_parser("compute", help="evaluate functionals on an input function")
    p_compute.add_argument("--input", required=True, help="StepFunction/DecreasingStep/GridFunction JSON")
    p_compute.add_argument("--ops", required=True,
                           help="comma-separated op names or inline norm-request JSON objects")
    p_compute.add_argument("--out", default=None)
    p_compute.add_argument("--p", type=float, default=None,
                           help="index for lorentz (default 2) / sharp / bmo (default 1)")
    p_compute.add_argument("--q", type=float, default=2.0)
    p_compute.add_argument("--theta", type=float, default=0.5)
    p_compute.set_defaults(fn=cmd_compute)

    p_verify = sub.add_parser("verify", help="run registered inequality checks")
    p_verify.add_argument("suite", nargs="?", default=None,
                          help='check names (comma separated) or "all"')
    p_verify.add_argument("--suite", dest="suite_flag", default=None,
                          help="alternative to the positional suite")
    p_verify.add_argument("--trials", type=int, default=50)
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--out", default=None)
    p_verify.add_argument("--tolerance", type=float, default=None,
                          help="override the per-check pass tolerance")
    p_verify.set_defaults(fn=cmd_verify)

    p_probe = sub.add_parser("probe", help="hill-climb for extremal ratios of a check")
    p_probe.add_argument("name")
    p_probe.add_argument("--budget", type=int, default=1000)
    p_probe.add_argument("--seed", type=int, default=0)
    p_probe.add_argument("--q", type=float, default=None)
    p_probe.add_argument("--theta", type=float, default=None)
    p_probe.add_argument("--p", type=float, default=None)
    p_probe.add_argument("--out", default=None)
    p_probe.set_defaults(fn=cmd_probe)

    p_report = sub.add_parser("report", help="plot-ready CSV of t, f*, f**, f**-f*")
    p_report.add_argument("--input", required=True)
    p_report.add_argument("--out", default=None)
    p_report.set_defaults(fn=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
