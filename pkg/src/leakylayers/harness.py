"""Epsilon sweeps, solver cross-checks and convergence-rate reports.

A problem is a plain dict (usually read from JSON)::

    {"kind": "onedim" | "radial" | "curve",
     "alpha_plus": [re, im], "alpha_minus": [re, im],
     "d": 2, "R": 1.0, "m": 0,                     # radial
     "geometry": {"kind": "ellipse", "a": 1.5, "b": 1.0},
     "nodes": 256, "seed": [re, im]}               # curve

Thresholds may be overridden by a ``"thresholds"`` entry with keys
``slope`` (relative), ``order`` ([lo, hi] for the remainder exponent),
``rate`` ([lo, hi] for the O(eps) checks) and ``crosscheck``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import bs_integral, one_dim, radial
from .asymptotics import slope_simple
from .coupling import Coupling
from .errors import DomainError, LeakyLayersError
from .geometry import Circle, curve_from_dict, max_parallel_range
from .numerics import FitResult, fit_expansion, loglog_slope

__all__ = [
    "DEFAULT_THRESHOLDS",
    "Problem",
    "Row",
    "SweepReport",
    "CrosscheckReport",
    "UniformReport",
    "load_problem",
    "default_epsilons",
    "run_sweep",
    "run_crosscheck",
    "run_uniform_check",
    "solve_rows",
]

DEFAULT_THRESHOLDS = {
    "slope": 0.01,
    "order": [1.9, 2.1],
    "rate": [0.9, 1.1],
    "crosscheck": 1e-6,
}
FIT_DEGREE = 2
CSV_COLUMNS = ["epsilon", "lambda_re", "lambda_im", "kappa_re", "kappa_im", "residual", "solver"]


def _complex(value, default=0.0):
    if value is None:
        return complex(default)
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise DomainError(f"complex values are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def _fmt(x):
    return "%.16e" % (x + 0.0)  # no negative zeros


@dataclass(frozen=True)
class Row:
    epsilon: float
    lam: complex
    kappa: complex
    residual: float
    solver: str
    error: str = ""

    @property
    def ok(self):
        return not self.error

    def csv_fields(self):
        if not self.ok:
            nan = "nan"
            return [_fmt(self.epsilon), nan, nan, nan, nan, nan, f"{self.solver}:error"]
        return [_fmt(self.epsilon), _fmt(self.lam.real), _fmt(self.lam.imag),
                _fmt(self.kappa.real), _fmt(self.kappa.imag), _fmt(self.residual), self.solver]

    def as_dict(self):
        out = {"epsilon": self.epsilon, "solver": self.solver}
        if self.ok:
            out.update(lambda_=[self.lam.real, self.lam.imag],
                       kappa=[self.kappa.real, self.kappa.imag], residual=self.residual)
            out["lambda"] = out.pop("lambda_")
        else:
            out["error"] = self.error
        return out


class Problem:
    """Uniform front over the three solvers."""

    def __init__(self, spec):
        self.spec = dict(spec)
        self.kind = spec.get("kind")
        if self.kind not in ("onedim", "radial", "curve"):
            raise DomainError(f"unknown problem kind {self.kind!r}")
        self.coupling = Coupling(_complex(spec.get("alpha_plus")), _complex(spec.get("alpha_minus")))
        self.thresholds = {**DEFAULT_THRESHOLDS, **spec.get("thresholds", {})}
        self.degenerate = False
        if self.kind == "radial":
            self.radial = radial.RadialProblem(int(spec.get("d", 2)), float(spec.get("R", 1.0)), 0.0,
                                               self.coupling, int(spec.get("m", 0)))
            self.degenerate = self.radial.m >= 1
            self._limit_data = None
        elif self.kind == "curve":
            geom = spec.get("geometry", {"kind": "circle", "R": 1.0})
            self.nodes = int(spec.get("nodes", 256))
            self.curve = curve_from_dict(geom, self.nodes)
            self._kappa0 = None
            self._slope = None

    @property
    def solver_id(self):
        return {"onedim": "one_dim", "radial": "radial", "curve": "bs_integral"}[self.kind]

    def max_epsilon(self):
        if self.kind == "onedim":
            return one_dim.max_epsilon(self.coupling)
        if self.kind == "radial":
            return 0.9 * self.radial.R
        return max_parallel_range(self.curve)

    # limit problem ---------------------------------------------------
    def limit_kappa(self):
        if self.kind == "onedim":
            return -self.coupling.total / 2.0
        if self.kind == "radial":
            return self.limit_data().kappa
        if self._kappa0 is None:
            seed = self.spec.get("seed")
            if seed is not None:
                self._kappa0, _ = bs_integral.locate_kernel(self.curve, 0.0, self.coupling,
                                                            _complex(seed), self.nodes)
            elif isinstance(self.curve, Circle):
                rp = radial.RadialProblem(2, self.curve.R, 0.0, self.coupling, 0)
                self._kappa0 = radial.solve_eigenvalue(rp).kappa
            else:
                self._kappa0 = bs_integral.ground_state_kappa(self.curve, self.coupling, self.nodes)
        return self._kappa0

    def limit_data(self):
        if self._limit_data is None:
            self._limit_data = radial.solve_eigenvalue(self.radial)
        return self._limit_data

    def limit_eigenvalue(self):
        return -self.limit_kappa() ** 2

    def predicted_slope(self):
        if self.kind == "onedim":
            return one_dim.first_order_coefficient(self.coupling)
        if self.kind == "radial":
            if self.degenerate:
                return complex(radial.degenerate_slopes(self.radial).slopes[0])
            return slope_simple(radial.trace_bundle(self.limit_data()), self.coupling)
        if self._slope is None:
            traces = bs_integral.eigen_traces(self.curve, self.coupling, self.limit_kappa(), self.nodes)
            self._slope = slope_simple(traces.bundle(), self.coupling)
        return self._slope

    # eps problem -----------------------------------------------------
    def solve(self, epsilon):
        """(lambda, kappa, residual) at separation 2 eps."""
        c = self.coupling
        if self.kind == "onedim":
            if epsilon == 0:
                k = self.limit_kappa()
                return -k * k, k, 0.0
            k = one_dim.solve_kappa(epsilon, c)
            return -k * k, k, abs(one_dim.secular_residual(k, epsilon, c))
        if self.kind == "radial":
            if epsilon == 0:
                data = self.limit_data()
            else:
                data = radial.solve_eigenvalue(self.radial.at(epsilon), seed=self.limit_kappa())
            return data.lam, data.kappa, data.interface_residual()
        if epsilon == 0:
            k = self.limit_kappa()
            return -k * k, k, bs_integral.locate_kernel(self.curve, 0.0, c, k, self.nodes)[1]
        lam_guess = self.limit_eigenvalue() + self.predicted_slope() * epsilon
        seed = np.sqrt(-complex(lam_guess))
        k, cert = bs_integral.locate_kernel(self.curve, epsilon, c, seed, self.nodes)
        return -k * k, k, cert

    def echo(self):
        return self.spec


def load_problem(spec):
    return spec if isinstance(spec, Problem) else Problem(spec)


def default_epsilons(problem, count=4):
    """Geometric ladder, ratio 1/2, starting at min(1e-2, 0.1 * admissible range)."""
    p = load_problem(problem)
    start = min(1e-2, 0.1 * p.max_epsilon())
    return [start / 2**k for k in range(count)]


def solve_rows(problem, epsilons):
    p = load_problem(problem)
    rows = []
    for eps in sorted(set(float(e) for e in epsilons), reverse=True):
        try:
            lam, kappa, res = p.solve(eps)
            rows.append(Row(eps, complex(lam), complex(kappa), float(res), p.solver_id))
        except (LeakyLayersError, ArithmeticError, ValueError) as exc:
            rows.append(Row(eps, complex("nan"), complex("nan"), float("nan"), p.solver_id,
                            f"{type(exc).__name__}: {exc}"))
    return rows


def rows_to_csv(rows, summary):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.csv_fields())
    for key, value in summary:
        buf.write(f"# {key}: {value}\n")
    return buf.getvalue()


def _rel(a, b):
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


def _cfmt(z):
    z = complex(z)
    return f"{_fmt(z.real)} {_fmt(z.imag)}"


@dataclass
class SweepReport:
    problem: dict
    rows: list
    fitted: FitResult | None
    lambda0: complex
    predicted_slope: complex
    slope_rel_error: float
    remainder_order: float
    thresholds: dict
    passes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return bool(self.passes) and all(self.passes.values())

    def summary(self):
        lo, hi = self.thresholds["order"]
        items = [
            ("lambda0", _cfmt(self.lambda0)),
            ("predicted_slope", _cfmt(self.predicted_slope)),
            ("fitted_slope", _cfmt(self.fitted.coefficients[1]) if self.fitted else "nan"),
            ("fit_degree", FIT_DEGREE),
            ("slope_rel_error", _fmt(self.slope_rel_error)),
            ("remainder_order", _fmt(self.remainder_order)),
            ("threshold_slope_rel", _fmt(self.thresholds["slope"])),
            ("threshold_remainder_order", f"[{lo}, {hi}]"),
        ]
        items += [(f"pass_{k}", str(v).lower()) for k, v in self.passes.items()]
        items.append(("pass", str(self.passed).lower()))
        return items

    def to_csv(self):
        return rows_to_csv(self.rows, self.summary())

    def to_json(self):
        return json.dumps({
            "problem": self.problem,
            "rows": [r.as_dict() for r in self.rows],
            "fitted_coefficients": ([[c.real, c.imag] for c in self.fitted.coefficients]
                                    if self.fitted else None),
            "lambda0": [self.lambda0.real, self.lambda0.imag],
            "predicted_slope": [self.predicted_slope.real, self.predicted_slope.imag],
            "slope_rel_error": self.slope_rel_error,
            "remainder_order": self.remainder_order,
            "thresholds": self.thresholds,
            "passes": self.passes,
            "pass": self.passed,
        }, indent=2, sort_keys=True)


def run_sweep(spec, epsilons=None, tol_slope=None):
    """Eigenvalues over an eps ladder, fitted against the first-order prediction.

    The slope is the linear coefficient of a degree-2 least-squares fit.
    The remainder order is the log-log slope of
    ``lambda_eps - lambda_0 - lambda_0' eps`` with the predicted values; it
    is not tested for degenerate levels, whose remainder is only o(eps).
    """
    p = load_problem(spec)
    thresholds = dict(p.thresholds)
    if tol_slope is not None:
        thresholds["slope"] = float(tol_slope)
    eps = list(epsilons) if epsilons is not None else default_epsilons(p)
    if len(eps) < 4:
        raise DomainError("a sweep needs at least 4 eps values")
    if min(eps) <= 0:
        raise DomainError("sweep eps values must be positive")
    lam0 = complex(p.limit_eigenvalue())
    pred = complex(p.predicted_slope())
    rows = solve_rows(p, eps)
    good = [r for r in rows if r.ok]
    fitted, slope_err, order = None, float("nan"), float("nan")
    passes = {"rows": len(good) == len(rows)}
    if len(good) >= FIT_DEGREE + 2:
        fitted = fit_expansion([(r.epsilon, r.lam) for r in good], FIT_DEGREE)
        slope_err = float(_rel(fitted.coefficients[1], pred))
        remainder = [r.lam - lam0 - pred * r.epsilon for r in good]
        order = loglog_slope([r.epsilon for r in good], remainder)
    passes["slope"] = bool(slope_err <= thresholds["slope"])
    if not p.degenerate:
        lo, hi = thresholds["order"]
        passes["remainder_order"] = bool(lo <= order <= hi)
    return SweepReport(p.echo(), rows, fitted, lam0, pred, slope_err, order, thresholds, passes)


@dataclass
class CrosscheckReport:
    problem: dict
    N: int
    epsilon: float
    lambda_radial: complex
    lambda_bs: complex
    eigenvalue_discrepancy: float
    trace_discrepancy: float
    threshold: float

    @property
    def discrepancy(self):
        return max(self.eigenvalue_discrepancy, self.trace_discrepancy)

    @property
    def passed(self):
        return bool(self.discrepancy < self.threshold)

    def summary(self):
        return [
            ("N", self.N),
            ("epsilon", _fmt(self.epsilon)),
            ("lambda_radial", _cfmt(self.lambda_radial)),
            ("lambda_bs", _cfmt(self.lambda_bs)),
            ("eigenvalue_rel_discrepancy", _fmt(self.eigenvalue_discrepancy)),
            ("trace_rel_discrepancy", _fmt(self.trace_discrepancy)),
            ("threshold", _fmt(self.threshold)),
            ("pass", str(self.passed).lower()),
        ]

    def to_csv(self):
        buf = io.StringIO()
        for key, value in self.summary():
            buf.write(f"{key},{value}\n")
        return buf.getvalue()

    def to_json(self):
        return json.dumps({k: v for k, v in self.summary()} | {"problem": self.problem},
                          indent=2, sort_keys=True)


def _align(a, b):
    """Relative sup-difference of two trace arrays after fixing the sign."""
    a, b = np.atleast_1d(a), np.atleast_1d(b)
    scale = np.max(np.abs(b))
    return float(min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) / scale)


def run_crosscheck(spec, N=256, epsilon=None):
    """Radial vs boundary-integral eigenvalue and traces for a circle (m = 0)."""
    c = Coupling(_complex(spec.get("alpha_plus")), _complex(spec.get("alpha_minus")))
    geom = spec.get("geometry", {"kind": "circle", "R": spec.get("R", 1.0)})
    if geom.get("kind") != "circle":
        raise DomainError("cross-checks need a circle")
    R = float(geom["R"])
    eps = float(spec.get("epsilon", 0.0) if epsilon is None else epsilon)
    threshold = float(spec.get("thresholds", {}).get("crosscheck", DEFAULT_THRESHOLDS["crosscheck"]))
    rp = radial.RadialProblem(2, R, eps, c, 0)
    data = radial.solve_eigenvalue(rp)
    curve = Circle(R, N)
    kappa, _ = bs_integral.locate_kernel(curve, eps, c, data.kappa, N)
    s = 1.0 / np.sqrt(complex(data.norm_sq))
    if eps == 0:
        tr = bs_integral.eigen_traces(curve, c, kappa, N)
        got = tr.normalized()
        want = [s * data.trace_psi0, s * data.trace_dn_plus, s * data.trace_dn_minus]
    else:
        sh = bs_integral.shell_traces(curve, eps, c, kappa, N)
        got = sh.normalized()
        want = [s * data.u(R + eps), s * data.u(R - eps)]
    # one common sign for all arrays
    sign = 1.0 if abs(got[0][0] - want[0]) <= abs(got[0][0] + want[0]) else -1.0
    trace_err = max(float(np.max(np.abs(sign * g - w)) / abs(w)) for g, w in zip(got, want))
    lam_r, lam_b = data.lam, -kappa**2
    return CrosscheckReport(dict(spec), N, eps, lam_r, lam_b, float(_rel(lam_b, lam_r)),
                            trace_err, threshold)


@dataclass
class UniformReport:
    problem: dict
    epsilons: list
    trace_differences: list
    eigen_differences: list
    trace_order: float
    eigen_order: float
    thresholds: dict

    @property
    def passes(self):
        lo, hi = self.thresholds["rate"]
        return {"trace_order": bool(lo <= self.trace_order <= hi),
                "eigen_order": bool(lo <= self.eigen_order <= hi)}

    @property
    def passed(self):
        return all(self.passes.values())

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["epsilon", "trace_sup_difference", "eigen_difference"])
        for e, t, d in zip(self.epsilons, self.trace_differences, self.eigen_differences):
            w.writerow([_fmt(e), _fmt(t), _fmt(d)])
        lo, hi = self.thresholds["rate"]
        buf.write(f"# trace_order: {_fmt(self.trace_order)}\n")
        buf.write(f"# eigen_order: {_fmt(self.eigen_order)}\n")
        buf.write(f"# threshold_rate: [{lo}, {hi}]\n")
        for k, v in self.passes.items():
            buf.write(f"# pass_{k}: {str(v).lower()}\n")
        buf.write(f"# pass: {str(self.passed).lower()}\n")
        return buf.getvalue()

    def to_json(self):
        return json.dumps({
            "problem": self.problem,
            "epsilons": self.epsilons,
            "trace_differences": self.trace_differences,
            "eigen_differences": self.eigen_differences,
            "trace_order": self.trace_order,
            "eigen_order": self.eigen_order,
            "thresholds": self.thresholds,
            "passes": self.passes,
            "pass": self.passed,
        }, indent=2, sort_keys=True)


def _radial_trace_difference(p0, eps):
    """Largest |psi_eps - psi_0| on the two shells, both bilinearly normalized.

    Only the radial factors enter; the angular factor has sup 1 whenever
    it is cos(m theta) or the constant.
    """
    lim = radial.solve_eigenvalue(p0)
    cur = radial.solve_eigenvalue(p0.at(eps), seed=lim.kappa)
    s0 = 1.0 / np.sqrt(complex(lim.norm_sq))
    se = 1.0 / np.sqrt(complex(cur.norm_sq))
    diffs = [abs(se * cur.u(r) - s0 * lim.u(r)) for r in (p0.R + eps, p0.R - eps)]
    return max(diffs), abs(cur.lam - lim.lam)


def run_uniform_check(spec, epsilons=None):
    """O(eps) rates of trace sup-differences and of |lambda_eps - lambda_0|."""
    p = load_problem(spec)
    if p.kind == "curve":
        raise DomainError("trace differences are available for onedim and radial problems")
    eps = sorted((float(e) for e in (epsilons or default_epsilons(p))), reverse=True)
    positive = [e for e in eps if e > 0]
    traces, eigs = [], []
    lam0 = p.limit_eigenvalue()
    for e in eps:
        if e == 0:
            traces.append(0.0)
            eigs.append(0.0)
        elif p.kind == "onedim":
            traces.append(one_dim.uniform_difference(e, p.coupling))
            eigs.append(abs(one_dim.eigenvalue(e, p.coupling) - lam0))
        else:
            t, d = _radial_trace_difference(p.radial, e)
            traces.append(float(t))
            eigs.append(float(d))
    pos_t = [t for e, t in zip(eps, traces) if e > 0]
    pos_d = [d for e, d in zip(eps, eigs) if e > 0]
    if len(positive) < 2:
        raise DomainError("rate fits need at least two positive eps values")
    return UniformReport(p.echo(), eps, traces, eigs, loglog_slope(positive, pos_t),
                         loglog_slope(positive, pos_d), dict(p.thresholds))

