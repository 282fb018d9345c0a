"""Acceptance criteria, one test per criterion at the stated tolerances."""

import numpy as np
import pytest

from isocap import cli, flow
from isocap import metricspace as ms
from isocap import potential as pot
from isocap import specfun as sf
from isocap import variational as va
from isocap import verify as vf

P_GRID = (1.2, 1.5, 2.0, 2.5)
SCH = ms.schwarzschild_area(1.0)
ISO = ms.schwarzschild_isotropic(1.0)
PERTURBED = ms.conformal_perturbation([0.5, -0.01])


def _report(lines):
    for line in lines:
        print(line)


def test_criterion_01_capacity_oracle_agreement():
    flat = ms.flat()
    worst_q, worst_v = 0.0, 0.0
    for p in P_GRID:
        for R in (0.5, 1.0, 2.0):
            exact = R ** (3 - p)
            worst_q = max(worst_q, abs(pot.solve_radial(flat, p, R).cap / exact - 1))
            worst_v = max(worst_v, abs(va.ladder_capacity(flat, p, R)[2].capacity / exact - 1))
    _report([f"quadrature {worst_q:.2e} (<= 1e-8), variational {worst_v:.2e} (<= 1e-3)"])
    assert worst_q <= 1e-8
    assert worst_v <= 1e-3


def test_criterion_02_schwarzschild_capacity():
    worst = 0.0
    for p in P_GRID:
        for x in (1.0, 1.5, 5.0):
            r0 = 2.0 * x
            exact = sf.schwarzschild_capacity(1.0, r0, p)
            worst = max(worst, abs(pot.solve_radial(SCH, p, r0).cap / exact - 1))
    horizon = pot.solve_radial(SCH, 2.0, 2.0).cap
    _report([f"max rel {worst:.2e} (<= 1e-8); p=2 horizon cap - 1 = {horizon - 1:.2e}"])
    assert worst <= 1e-8
    assert abs(horizon - 1.0) <= 1e-12
    assert abs(sf.schwarzschild_capacity(1.0, 2.0, 2.0) - 1.0) <= 1e-12


def test_criterion_03_hawking_identity():
    worst = 0.0
    for m in (0.5, 1.0, 3.0):
        metric = ms.schwarzschild_area(m)
        for r in 2 * m * np.geomspace(1.0 + 1e-9, 1e5, 40):
            area = ms.area(metric, r)
            willmore = area * ms.mean_curvature(metric, r) ** 2
            worst = max(worst, abs(flow.hawking_mass(area, willmore) / m - 1))
    flat = ms.flat()
    flat_worst = 0.0
    for r in np.geomspace(1e-2, 1e4, 40):
        area = ms.area(flat, r)
        flat_worst = max(flat_worst, abs(flow.hawking_mass(area, area * ms.mean_curvature(flat, r) ** 2)))
    _report([f"Schwarzschild max rel {worst:.2e} (<= 1e-10); flat max abs {flat_worst:.2e} (<= 1e-12)"])
    assert worst <= 1e-10
    assert flat_worst <= 1e-12


def test_criterion_04_monotonicity():
    assert vf.validated(PERTURBED).passed
    for metric in (SCH, PERTURBED):
        for p in P_GRID:
            sol = pot.solve_radial(metric, p, vf.default_r0(metric))
            rep = vf.check_monotonicity(sol, "p_hawking")
            assert rep.status == vf.PASS and rep.margin >= -1e-9, (metric.name, p, rep.margin)
    sol = pot.solve_radial(SCH, 2.0, 2.0)
    series = flow.mass_series(sol)
    mp = series.column("m_p_hawking")
    at_1e4 = flow.level_record(sol, pot.evaluate(sol, 1e4).w, r=1e4, volume=float("nan")).m_p_hawking
    _report([f"m_p(0) = {mp[0]:.15f}, m_p(r=1e4) = {at_1e4:.10f}"])
    assert 5 / 8 - 1e-12 <= mp.min() and mp.max() <= 1.0 + 1e-12
    assert mp[0] == pytest.approx(5 / 8, rel=1e-10)
    assert abs(at_1e4 - 1.0) <= 1e-3


@pytest.mark.parametrize("p", (1.5, 2.0, 2.5))
def test_criterion_05_derivative_formulas(p):
    sol = pot.solve_radial(SCH, p, 2.0)
    series = flow.mass_series(sol)
    for which in ("geroch", "cclt"):
        rep = vf.check_derivative(sol, which, series, tolerance=1e-4)
        _report([f"{which} p={p}: max mismatch {rep.diagnostics['max_relative_mismatch']:.2e}"])
        assert rep.diagnostics["max_relative_mismatch"] <= 1e-4


def test_criterion_06_ordering_and_shared_limit():
    for metric in (SCH, ISO):
        for p in P_GRID:
            sol = pot.solve_radial(metric, p, vf.default_r0(metric))
            series = flow.mass_series(sol)
            rep = vf.check_monotonicity(sol, "ordering", series)
            assert rep.status == vf.PASS, (metric.name, p, rep.margin)
            r = 1e4
            rec = flow.level_record(sol, pot.evaluate(sol, r).w, r=r, volume=float("nan"))
            gap = rec.m_p_hawking_mod - rec.m_p_hawking
            assert -1e-9 <= gap <= 1e-3, (metric.name, p, gap)


def test_criterion_07_penrose_suite():
    for metric in (SCH, ISO):
        for p in P_GRID:
            rep = vf.check_inequality(metric, p, "penrose_p")
            assert rep.status == vf.PASS
            assert rep.diagnostics["deficit"] == pytest.approx(sf.penrose_deficit(p), abs=1e-6)
            gamma = vf.check_inequality(metric, p, "capacity_penrose_gamma")
            assert abs(gamma.margin) <= 1e-6
        lim = vf.check_inequality(metric, 2.0, "penrose_limit")
        _report([f"{metric.name}: deficits {np.round(lim.diagnostics['deficits'], 6).tolist()}"])
        assert lim.status == vf.PASS and lim.diagnostics["monotone_toward_one"]


def test_criterion_08_mass_equivalence():
    for metric in (SCH, ISO):
        for p in (1.5, 2.0):
            series = flow.mass_series(pot.solve_radial(metric, p, vf.default_r0(metric)))
            rep = vf.check_mass_equivalence(series, metric, tolerance=1e-3)
            _report([f"{metric.name} p={p}: spread {rep.diagnostics['relative_spread']:.2e}"])
            assert rep.status == vf.PASS
            alphas = {1 / 3, (3 - p) / 3, 1.0}
            assert len(rep.diagnostics["limits"]) == 3 + 2 * len(alphas)


def test_criterion_09_asymptotics():
    for p in P_GRID:
        sol = pot.solve_radial(SCH, p, 2.0)
        series = flow.mass_series(sol)
        for which in ("area", "cross_capacity", "energy_dagger"):
            rep = vf.check_asymptotics(sol, which, series, tolerance=1e-2)
            assert rep.status == vf.PASS, (p, which, rep.diagnostics)


def test_criterion_10_fan_shi_tam():
    sol = pot.solve_radial(ISO, 2.0, 0.5)
    rep = vf.check_asymptotics(sol, "fan_shi_tam", tolerance=1e-3)
    _report([f"fitted mass {rep.diagnostics['fitted_mass']:.12f}"])
    assert abs(rep.diagnostics["fitted_mass"] - 1.0) <= 1e-3


def test_criterion_11_sharp_isocapacitary():
    for p in (1.5, 2.0):
        rep = vf.check_inequality(SCH, p, "sharp_isocap", radii=[1e2, 1e3, 1e4], tolerance=0.05)
        ratio = rep.diagnostics["ratios"][-1]
        _report([f"p={p}: ratio at r=1e4 {ratio:.6f}"])
        assert abs(ratio - 1.0) <= 0.05


def test_criterion_12_cli_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["verify", "--out", str(a)]) == 0
    assert cli.main(["verify", "--out", str(b), "--strict-fp"]) == 0
    assert (a / "reports.json").read_bytes() == (b / "reports.json").read_bytes()
    cfg = tmp_path / "scan.json"
    cfg.write_text('{"metrics": [{"form": "schwarzschild_area", "m": 1.0}, {"form": "flat"}], "p": [1.5, 2.0]}')
    assert cli.main(["scan", "--config", str(cfg), "--out", str(a)]) == 0
    assert cli.main(["scan", "--config", str(cfg), "--out", str(b), "--strict-fp"]) == 0
    files = sorted(f.name for f in a.iterdir())
    assert files == sorted(f.name for f in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
