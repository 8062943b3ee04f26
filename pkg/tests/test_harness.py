import json

import pytest

from leakylayers import harness
from leakylayers.errors import DomainError

ONEDIM_EQ = {"kind": "onedim", "alpha_plus": [-1, 0], "alpha_minus": [-1, 0]}
ONEDIM = {"kind": "onedim", "alpha_plus": [-1, 0], "alpha_minus": [-3, 0]}
RADIAL = {"kind": "radial", "d": 2, "R": 1.0, "m": 0, "alpha_plus": [-3, 0], "alpha_minus": [-2, 0]}
CIRCLE = {"geometry": {"kind": "circle", "R": 1.0}, "alpha_plus": [-3, 0], "alpha_minus": [-2, 0]}
SWEEP = [1e-2, 5e-3, 2.5e-3, 1.25e-3]


def test_onedim_sweep_equal():
    rep = harness.run_sweep(ONEDIM_EQ, SWEEP)
    assert abs(rep.fitted.coefficients[0] + 1) < 1e-5
    assert abs(rep.fitted.coefficients[1] - 2) < 2e-3
    assert rep.passed


def test_onedim_sweep_unequal():
    rep = harness.run_sweep(ONEDIM, SWEEP)
    assert abs(rep.fitted.coefficients[0] + 4) < 1e-4
    assert abs(rep.fitted.coefficients[1] - 12) / 12 < 1e-2
    assert rep.passed
    assert 1.9 <= rep.remainder_order <= 2.1


def test_radial_sweep():
    rep = harness.run_sweep(RADIAL, SWEEP)
    assert rep.slope_rel_error < 5e-3
    assert rep.passed


def test_rows_sorted_and_slope_error_definition():
    rep = harness.run_sweep(ONEDIM, [1.25e-3, 1e-2, 2.5e-3, 5e-3])
    eps = [r.epsilon for r in rep.rows]
    assert eps == sorted(eps, reverse=True)
    want = abs(rep.fitted.coefficients[1] - rep.predicted_slope) / abs(rep.predicted_slope)
    assert rep.slope_rel_error == pytest.approx(want, rel=1e-14)


def test_tight_tolerance_fails():
    rep = harness.run_sweep(ONEDIM, SWEEP, tol_slope=1e-6)
    assert not rep.passed
    assert rep.passes["slope"] is False


def test_thresholds_appear_in_report():
    text = harness.run_sweep(ONEDIM, SWEEP).to_csv()
    for key in ("threshold_slope_rel", "threshold_remainder_order"):
        assert key in text
    data = json.loads(harness.run_sweep(ONEDIM, SWEEP).to_json())
    assert data["thresholds"]["slope"] == 0.01


def test_sweep_is_deterministic():
    a = harness.run_sweep(RADIAL, SWEEP).to_csv()
    b = harness.run_sweep(RADIAL, SWEEP).to_csv()
    assert a == b


def test_solver_failure_is_recorded_per_row():
    rep = harness.run_sweep(ONEDIM, [0.5, 1e-2, 5e-3, 2.5e-3, 1.25e-3])
    bad = [r for r in rep.rows if not r.ok]
    assert len(bad) == 1 and bad[0].epsilon == 0.5
    assert "DomainError" in bad[0].error
    assert not rep.passed


def test_sweep_needs_four_points():
    with pytest.raises(DomainError):
        harness.run_sweep(ONEDIM, [1e-2, 5e-3, 2.5e-3])


def test_default_ladder():
    eps = harness.default_epsilons(harness.Problem(ONEDIM))
    # 0.1 * admissible range = 0.1 * (0.1 * 2 / 3) < 1e-2
    assert eps[0] == pytest.approx(0.02 / 3)
    assert eps[1] == pytest.approx(eps[0] / 2)
    assert harness.default_epsilons(harness.Problem(RADIAL))[0] == 1e-2


def test_degenerate_sweep_skips_order():
    spec = dict(RADIAL, m=1)
    rep = harness.run_sweep(spec, SWEEP)
    assert "remainder_order" not in rep.passes
    assert rep.passed


def test_crosscheck_passes():
    for eps in (0.0, 1e-2):
        rep = harness.run_crosscheck(CIRCLE, 256, eps)
        assert rep.discrepancy < 1e-6
        assert rep.passed


def test_crosscheck_refinement_is_floor_aware():
    # circles are resolved to rounding level already at N = 64, so the
    # refinement check compares against max(coarse / 10, rounding floor)
    coarse = harness.run_crosscheck(CIRCLE, 64, 1e-2).discrepancy
    fine = harness.run_crosscheck(CIRCLE, 256, 1e-2).discrepancy
    assert fine <= max(coarse / 10, 1e-12)


def test_crosscheck_requires_circle():
    spec = dict(CIRCLE, geometry={"kind": "ellipse", "a": 2.0, "b": 1.0})
    with pytest.raises(DomainError):
        harness.run_crosscheck(spec, 64)


@pytest.mark.parametrize("spec", [ONEDIM, RADIAL])
def test_uniform_rates(spec):
    rep = harness.run_uniform_check(spec, [0.0] + SWEEP)
    assert rep.trace_differences[-1] == 0.0 and rep.epsilons[-1] == 0.0
    assert 0.9 <= rep.trace_order <= 1.1
    assert 0.9 <= rep.eigen_order <= 1.1
    assert rep.passed


def test_uniform_rejects_curves():
    with pytest.raises(DomainError):
        harness.run_uniform_check({"kind": "curve", "alpha_plus": [-3, 0],
                                   "alpha_minus": [-2, 0]}, SWEEP)


def test_unknown_kind():
    with pytest.raises(DomainError):
        harness.Problem({"kind": "torus"})


def test_csv_number_format_round_trips():
    rows = harness.solve_rows(harness.Problem(ONEDIM_EQ), [1e-2])
    text = harness.rows_to_csv(rows, [])
    header, line = text.strip().splitlines()
    assert header.split(",") == harness.CSV_COLUMNS
    fields = line.split(",")
    assert float(fields[1]) == rows[0].lam.real
    assert "-0.0" not in fields[2]


def test_curve_problem_with_circle_uses_radial_seed():
    spec = {"kind": "curve", "geometry": {"kind": "circle", "R": 1.0}, "nodes": 64,
            "alpha_plus": [-3, 0], "alpha_minus": [-2, 0]}
    p = harness.Problem(spec)
    lam, kappa, cert = p.solve(1e-2)
    want = harness.Problem(RADIAL).solve(1e-2)[0]
    assert abs(lam - want) / abs(want) < 1e-10
    assert cert < 1e-7
