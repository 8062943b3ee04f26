"""Command-line front end.

Exit status: 0 when every reported criterion passes, 1 when a criterion
fails, 2 on bad input or a solver error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness
from .asymptotics import TraceBundle, slope_matrix, slope_simple
from .coupling import Coupling
from .errors import LeakyLayersError
from .geometry import PointSurface, Sphere, curve_from_dict

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def _parse_eps(text):
    if text is None:
        return None
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ValueError(f"--eps expects a comma-separated list of numbers: {text!r}") from exc
    if not values:
        raise ValueError("--eps is empty")
    return values


def _load_spec(path):
    with open(path) as fh:
        return json.load(fh)


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _format_for(args):
    if args.format:
        return args.format
    if args.out and args.out.endswith(".json"):
        return "json"
    return "csv"


def _with_overrides(spec, args, kind=None):
    spec = dict(spec)
    if kind is not None:
        if spec.get("kind", kind) != kind:
            raise ValueError(f"spec kind {spec.get('kind')!r} does not match subcommand {kind!r}")
        spec["kind"] = kind
    if getattr(args, "nodes", None):
        spec["nodes"] = args.nodes
    if getattr(args, "tol_slope", None) is not None:
        spec.setdefault("thresholds", {})
        spec["thresholds"] = {**spec["thresholds"], "slope": args.tol_slope}
    return spec


# --- subcommands ---------------------------------------------------------

def _solve(args, kind):
    spec = _with_overrides(_load_spec(args.spec), args, kind)
    problem = harness.Problem(spec)
    eps = _parse_eps(args.eps) or [0.0]
    rows = harness.solve_rows(problem, eps)
    if _format_for(args) == "json":
        text = json.dumps({"problem": spec, "rows": [r.as_dict() for r in rows]},
                          indent=2, sort_keys=True)
    else:
        text = harness.rows_to_csv(rows, [("pass", str(all(r.ok for r in rows)).lower())])
    _emit(text, args.out)
    return EXIT_OK if all(r.ok for r in rows) else EXIT_ERROR


def cmd_sweep(args):
    spec = _with_overrides(_load_spec(args.spec), args)
    report = harness.run_sweep(spec, _parse_eps(args.eps))
    _emit(report.to_json() if _format_for(args) == "json" else report.to_csv(), args.out)
    if not all(r.ok for r in report.rows):
        return EXIT_ERROR
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_crosscheck(args):
    spec = _load_spec(args.spec)
    eps = _parse_eps(args.eps)
    reports = [harness.run_crosscheck(spec, args.nodes or 256, e)
               for e in (eps or [spec.get("epsilon", 0.0)])]
    if _format_for(args) == "json":
        text = "[" + ",\n".join(r.to_json() for r in reports) + "]"
    else:
        text = "\n".join(r.to_csv() for r in reports)
    _emit(text, args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_uniform(args):
    spec = _with_overrides(_load_spec(args.spec), args)
    report = harness.run_uniform_check(spec, _parse_eps(args.eps))
    _emit(report.to_json() if _format_for(args) == "json" else report.to_csv(), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def _array(values):
    out = []
    for v in values:
        out.append(complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v))
    return np.array(out)


def _surface(desc, size):
    kind = desc.get("kind")
    if kind == "point":
        return PointSurface()
    if kind == "sphere":
        return Sphere(float(desc["R"]), int(desc.get("n_theta", 24)), int(desc.get("n_phi", 48)))
    return curve_from_dict(desc, size)


def bundle_from_dict(desc):
    """TraceBundle from JSON: arrays of numbers or [re, im] pairs."""
    psi0 = _array(desc["psi0"])
    surface = _surface(desc.get("surface", {"kind": "point"}), psi0.size)
    K1 = desc.get("K1")
    K1 = np.zeros(psi0.size) if K1 is None else np.asarray(K1, dtype=float)
    norm = desc.get("norm_sq", 1.0)
    norm = complex(*norm) if isinstance(norm, (list, tuple)) else complex(norm)
    return TraceBundle(surface, psi0, _array(desc["dn_plus"]), _array(desc["dn_minus"]), K1,
                       int(desc.get("dimension", 1)), norm)


def cmd_asymptotics(args):
    spec = _load_spec(args.spec)
    c = Coupling.from_pairs(spec["alpha_plus"], spec["alpha_minus"])
    if "bundles" in spec:
        bundles = [bundle_from_dict(b) for b in spec["bundles"]]
        gram = spec.get("gram")
        if gram is not None:
            gram = [[complex(*g) if isinstance(g, (list, tuple)) else complex(g) for g in row]
                    for row in gram]
        result = slope_matrix(bundles, c, gram)
        slopes = [complex(s) for s in result.slopes]
    else:
        slopes = [complex(slope_simple(bundle_from_dict(spec), c))]
    if _format_for(args) == "json":
        text = json.dumps({"slopes": [[s.real, s.imag] for s in slopes]}, indent=2)
    else:
        text = "index,slope_re,slope_im\n" + "".join(
            f"{i},{harness._fmt(s.real)},{harness._fmt(s.imag)}\n" for i, s in enumerate(slopes))
    _emit(text, args.out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="leakylayers",
        description="Eigenvalues of two colliding delta interactions and their first-order asymptotics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps=True, nodes=False, tol=False):
        p.add_argument("--spec", required=True, help="problem JSON file")
        if eps:
            p.add_argument("--eps", help="comma-separated separations")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"))
        if nodes:
            p.add_argument("--nodes", type=int, help="Nystrom nodes per curve")
        if tol:
            p.add_argument("--tol-slope", type=float, dest="tol_slope",
                           help="relative slope tolerance")
        return p

    for kind, helptext in (("onedim", "two point interactions on the line"),
                           ("radial", "concentric shells, one angular sector"),
                           ("curve", "parallel curves via boundary integrals")):
        p = common(sub.add_parser(kind, help=helptext), nodes=(kind == "curve"))
        p.set_defaults(func=lambda a, k=kind: _solve(a, k))
    common(sub.add_parser("sweep", help="eps sweep against the predicted slope"),
           nodes=True, tol=True).set_defaults(func=cmd_sweep)
    common(sub.add_parser("crosscheck", help="radial vs boundary-integral on a circle"),
           nodes=True).set_defaults(func=cmd_crosscheck)
    common(sub.add_parser("uniform", help="O(eps) rates of traces and eigenvalues"),
           tol=False).set_defaults(func=cmd_uniform)
    common(sub.add_parser("asymptotics", help="slope formula on serialized traces"),
           eps=False).set_defaults(func=cmd_asymptotics)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (LeakyLayersError, ArithmeticError, ValueError, KeyError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
