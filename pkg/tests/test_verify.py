import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from isocap import flow
from isocap import metricspace as ms
from isocap import potential as pot
from isocap import specfun as sf
from isocap import verify as vf
from isocap.errors import GridTooCoarse, InsufficientRange, MissingSobolevConstant, NoHorizon

FLAT = ms.flat()
SCH = ms.schwarzschild_area(1.0)
ISO = ms.schwarzschild_isotropic(1.0)
NEGATIVE = ms.conformal_perturbation([1.0, 0.2])


@pytest.fixture(scope="module")
def sch2():
    sol = pot.solve_radial(SCH, 2.0, 2.0)
    return sol, flow.mass_series(sol)


@given(st.floats(allow_nan=False, min_value=-1e3, max_value=1e3), st.floats(min_value=0.0, max_value=1e3))
def test_report_status_invariant(margin, tol):
    rep = vf._report("penrose_p", margin, tol, [{"metric": "x", "radii": []}])
    assert (rep.status == vf.PASS) == (margin >= -tol)


def test_report_json_shape(sch2):
    sol, series = sch2
    rep = vf.check_monotonicity(sol, "p_hawking", series)
    payload = json.loads(json.dumps(rep.to_dict()))
    assert set(payload) == {"check", "paper_ref", "status", "margin", "tolerance", "samples", "diagnostics"}
    assert payload["samples"] and payload["status"] in ("pass", "fail", "skipped")


def test_monotonicity_examples(sch2):
    sol, series = sch2
    rep = vf.check_monotonicity(sol, "p_hawking", series)
    assert rep.status == vf.PASS and rep.diagnostics["strictly_increasing"]
    assert rep.diagnostics["start"] == pytest.approx(5 / 8, rel=1e-10)
    rep = vf.check_monotonicity(sol, "ordering", series)
    assert rep.status == vf.PASS
    assert rep.diagnostics["start"] == pytest.approx((5 / 8, 3 / 4), rel=1e-10)
    assert rep.diagnostics["limit_gap"] < 1e-3
    for p in (1.2, 2.5):
        flat_sol = pot.solve_radial(FLAT, p, 1.0)
        for which in ("p_hawking", "p_hawking_modified", "ordering"):
            rep = vf.check_monotonicity(flat_sol, which)
            assert rep.status == vf.PASS and abs(rep.margin) < 1e-9


def test_curvature_checks_skipped_on_negative_scalar_curvature():
    sol = pot.solve_radial(NEGATIVE, 2.0, vf.default_r0(NEGATIVE))
    for which in ("p_hawking", "ordering"):
        rep = vf.check_monotonicity(sol, which)
        assert rep.status == vf.SKIPPED and "negative scalar curvature" in rep.diagnostics["reason"]
    assert vf.check_derivative(sol, "geroch").status == vf.SKIPPED
    assert vf.check_inequality(NEGATIVE, 2.0, "penrose_p").status == vf.SKIPPED


@pytest.mark.parametrize("p", (1.5, 2.0, 2.5))
def test_geroch_derivative_schwarzschild(p):
    sol = pot.solve_radial(SCH, p, 2.0)
    rep = vf.check_derivative(sol, "geroch")
    assert rep.status == vf.PASS and rep.diagnostics["max_relative_mismatch"] <= 1e-4


def test_cclt_derivative_schwarzschild(sch2):
    sol, series = sch2
    rep = vf.check_derivative(sol, "cclt", series)
    assert rep.status == vf.PASS and rep.diagnostics["max_relative_mismatch"] <= 1e-4


def test_flat_derivatives_vanish():
    sol = pot.solve_radial(FLAT, 2.0, 1.0)
    for which in ("geroch", "cclt"):
        assert vf.check_derivative(sol, which).status == vf.PASS


def test_grid_too_coarse(sch2):
    sol, series = sch2
    with pytest.raises(GridTooCoarse):
        vf.check_derivative(sol, "geroch", series, delta=0.5)


def test_penrose_p_example():
    rep = vf.check_inequality(SCH, 2.0, "penrose_p")
    assert rep.status == vf.PASS
    assert rep.diagnostics["lhs"] == pytest.approx(1.0, abs=1e-12)
    assert rep.margin == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("p", (1.2, 1.5, 2.0, 2.5))
def test_capacity_penrose_gamma_equality(p):
    for metric in (SCH, ISO):
        rep = vf.check_inequality(metric, p, "capacity_penrose_gamma")
        assert rep.status == vf.PASS and abs(rep.margin) <= 1e-6


def test_penrose_limit_ladder():
    rep = vf.check_inequality(SCH, 2.0, "penrose_limit")
    assert rep.status == vf.PASS and rep.diagnostics["monotone_toward_one"]
    for d, g in zip(rep.diagnostics["deficits"], rep.diagnostics["gauss_deficits"]):
        assert d == pytest.approx(g, rel=1e-8)


def test_bray_miao_equality_on_schwarzschild():
    rep = vf.check_inequality(SCH, 1.5, "bray_miao")
    assert rep.status == vf.PASS and abs(rep.margin) < 1e-8


def test_sharp_isocap_ratio():
    rep = vf.check_inequality(SCH, 1.5, "sharp_isocap")
    assert rep.status == vf.PASS
    ratios = rep.diagnostics["ratios"]
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1) and abs(ratios[-1] - 1) < 0.05


def test_inequality_errors():
    with pytest.raises(NoHorizon):
        vf.check_inequality(FLAT, 2.0, "penrose_p")
    with pytest.raises(MissingSobolevConstant):
        vf.check_inequality(SCH, 2.0, "hawking_vs_p_hawking")
    with pytest.raises(ValueError):
        vf.check_inequality(SCH, 2.0, "bogus")


def test_hawking_vs_p_hawking():
    rep = vf.check_inequality(FLAT, 2.0, "hawking_vs_p_hawking")
    assert rep.status == vf.PASS and rep.diagnostics["kappa_s"] == vf.EUCLIDEAN_SOBOLEV
    rep = vf.check_inequality(SCH, 2.0, "hawking_vs_p_hawking", kappa_s=vf.EUCLIDEAN_SOBOLEV)
    assert rep.status in (vf.PASS, vf.FAIL) and math.isfinite(rep.margin)


def test_iso_upper_range():
    assert vf.check_inequality(SCH, 2.5, "iso_upper").status == vf.SKIPPED
    assert vf.check_inequality(SCH, 1.5, "iso_upper").status == vf.PASS


@pytest.mark.parametrize("which", ["potential_log", "gradient", "cross_capacity", "area", "gradient_decay",
                                   "two_sided", "energy_dagger", "fan_shi_tam", "comparison"])
def test_asymptotic_checks_schwarzschild(which, sch2):
    sol, series = sch2
    rep = vf.check_asymptotics(sol, which, series)
    assert rep.status == vf.PASS, rep.diagnostics


def test_fan_shi_tam_isotropic():
    sol = pot.solve_radial(ISO, 2.0, 0.5)
    rep = vf.check_asymptotics(sol, "fan_shi_tam")
    assert abs(rep.diagnostics["fitted_mass"] - 1.0) <= 1e-3


def test_insufficient_range():
    sol = pot.solve_radial(SCH, 2.0, 2.0, pot.SolverOptions(far_factor=1e3))
    with pytest.raises(InsufficientRange):
        vf.check_asymptotics(sol, "area")


def test_oracle_consistency_examples():
    rep = vf.check_oracle_consistency(FLAT, 1.5, 2.0)
    assert rep.status == vf.PASS
    assert rep.diagnostics["closed_form"] == pytest.approx(2 ** 1.5, rel=1e-15)
    rep = vf.check_oracle_consistency(SCH, 2.0, 3.0)
    assert rep.diagnostics["pairs"]["quadrature_vs_closed_form"]["difference"] <= 1e-8
    rep = vf.check_oracle_consistency(SCH, 1.2, 2.0)
    assert rep.status == vf.PASS
    assert rep.diagnostics["pairs"]["quadrature_vs_closed_form"]["difference"] <= 1e-6
    assert rep.diagnostics["closed_form"] == pytest.approx(sf.schwarzschild_capacity(1.0, 2.0, 1.2))


def test_mass_equivalence(sch2):
    sol, series = sch2
    rep = vf.check_mass_equivalence(series, SCH)
    assert rep.status == vf.PASS and rep.diagnostics["relative_spread"] < 1e-3


def test_run_checks_deterministic():
    checks = ("p_hawking", "geroch", "penrose_p", "area")
    a = [r.to_dict() for r in vf.run_checks(ISO, 1.5, checks)]
    b = [r.to_dict() for r in vf.run_checks(ISO, 1.5, checks)]
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_run_checks_reports_skips_for_flat():
    reps = {r.check: r for r in vf.run_checks(FLAT, 2.0, ("penrose_p", "sharp_isocap", "hawking_vs_p_hawking"))}
    assert reps["penrose_p"].status == vf.SKIPPED
    assert reps["sharp_isocap"].status == vf.SKIPPED
    assert reps["hawking_vs_p_hawking"].status == vf.PASS
