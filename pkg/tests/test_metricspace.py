import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isocap import metricspace as ms
from isocap.errors import NoHorizon, RadiusOutOfDomain

FLAT = ms.flat()
SCH = ms.schwarzschild_area(1.0)
ISO = ms.schwarzschild_isotropic(1.0)


def test_area_examples():
    assert ms.area(FLAT, 1.0) == pytest.approx(4 * math.pi, rel=1e-15)
    assert ms.area(ISO, 0.5) == pytest.approx(16 * math.pi, rel=1e-14)
    assert ms.area(SCH, 2.0) == pytest.approx(16 * math.pi, rel=1e-15)


def test_mean_curvature_examples():
    assert ms.mean_curvature(FLAT, 2.0) == pytest.approx(1.0, rel=1e-15)
    assert ms.mean_curvature(SCH, 2.0) == 0.0
    assert abs(ms.mean_curvature(SCH, 2.0 + 1e-12)) < 1e-5
    assert abs(ms.mean_curvature(ISO, 0.5)) < 1e-14


def test_radius_out_of_domain():
    with pytest.raises(RadiusOutOfDomain):
        ms.area(SCH, 1.5)
    with pytest.raises(RadiusOutOfDomain):
        ms.volume(SCH, 1.0, 3.0)


def test_volume_flat_ball():
    for R in (0.5, 1.0, 7.0):
        assert ms.volume(FLAT, 0.0, R) == pytest.approx(4 * math.pi * R ** 3 / 3, rel=1e-12)


def test_volume_schwarzschild_against_high_precision_oracle():
    with mpmath.workdps(30):
        ref = float(mpmath.quad(lambda r: 4 * mpmath.pi * r ** 2 / mpmath.sqrt(1 - 2 / r), [2, 4]))
    assert ms.volume(SCH, 2.0, 4.0) == pytest.approx(ref, rel=1e-10)


def test_isotropic_volume_expansion_in_area_radius():
    # 3|B|/4pi = r^3 + (3/2) r^2 + O(r) with r the area radius of the bounding sphere
    resid = []
    for S in (1e2, 1e3, 1e4):
        r = float(ISO.area_radius(S))
        v = 3 * ms.volume(ISO, 0.5, S, rtol=1e-13) / (4 * math.pi)
        resid.append(abs(v - r ** 3 - 1.5 * r ** 2) / r ** 2)
    assert resid[1] < resid[0] and resid[2] < resid[1]
    assert resid[2] < 1e-3


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.05, max_value=5.0), st.floats(min_value=1.0001, max_value=1e4))
def test_schwarzschild_vacuum_and_hawking_identity(m, x):
    metric = ms.schwarzschild_area(m)
    r = 2 * m * x
    assert ms.misner_sharp_mass(metric, r) == pytest.approx(m, rel=1e-10)
    assert abs(ms.scalar_curvature(metric, r)) <= 1e-9 / m ** 2


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.05, max_value=5.0), st.floats(min_value=0.5001, max_value=1e4))
def test_isotropic_scalar_curvature_vanishes(m, x):
    metric = ms.schwarzschild_isotropic(m)
    s = m * x
    assert abs(ms.scalar_curvature(metric, s)) <= 1e-8 / m ** 2


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=1e3))
def test_flat_hawking_mass_is_zero(r):
    assert abs(ms.misner_sharp_mass(FLAT, r)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=0.5)),
       st.one_of(st.just(0.0), st.floats(min_value=-0.05, max_value=-1e-6)),
       st.floats(min_value=1.0, max_value=100.0))
def test_conformal_area_and_warped_curvature_identities(c1, c2, s):
    metric = ms.conformal_perturbation([c1, c2])
    u = 1 + c1 / s + c2 / s ** 2
    assert ms.area(metric, s) == pytest.approx(4 * math.pi * s ** 2 * u ** 4, rel=1e-13)
    r = 2.0 + s
    f = 1 / math.sqrt(1 - 2 / r)
    assert ms.mean_curvature(SCH, r) == pytest.approx(2 / (f * r), rel=1e-13)


def test_conformal_scalar_curvature_against_finite_difference():
    coeffs = [1.0, 0.1]
    metric = ms.conformal_perturbation(coeffs)

    def U(s):
        return 1 + 1 / s + 0.1 / s ** 2

    s, h = 2.0, 1e-3
    lap = (U(s + h) - 2 * U(s) + U(s - h)) / h ** 2 + (2 / s) * (U(s + h) - U(s - h)) / (2 * h)
    oracle = -8 * lap / U(s) ** 5
    assert oracle < 0
    assert ms.scalar_curvature(metric, s) == pytest.approx(oracle, rel=1e-6)


def test_adm_mass_examples():
    assert abs(ms.adm_mass(FLAT)) < 1e-12
    assert ms.adm_mass(SCH) == pytest.approx(1.0, rel=1e-10)
    assert ms.adm_mass(ISO) == pytest.approx(1.0, rel=1e-10)
    assert ms.adm_mass(ms.conformal_perturbation([0.5, -0.01])) == pytest.approx(1.0, rel=1e-8)


def test_horizon_radius_examples():
    assert ms.horizon_radius(SCH) == pytest.approx(2.0, rel=1e-14)
    assert ms.horizon_radius(ISO) == pytest.approx(0.5, rel=1e-12)
    with pytest.raises(NoHorizon):
        ms.horizon_radius(FLAT)


def test_validate_examples():
    assert ms.validate(SCH).passed
    assert ms.validate(ISO).passed
    assert ms.validate(FLAT).passed
    good = ms.validate(ms.conformal_perturbation([1.0, -0.2]))
    assert good.passed
    bad = ms.validate(ms.conformal_perturbation([1.0, 0.2]))
    assert not bad.passed
    assert bad.worst_scalar_curvature < 0 and math.isfinite(bad.worst_location)
    assert any("negative scalar curvature" in f for f in bad.failures)


def test_decay_exponent_schwarzschild():
    assert ms.decay_exponent(SCH) == pytest.approx(1.0, abs=0.05)


def test_richardson_limit_polynomial():
    xs = np.array([0.4, 0.2, 0.1, 0.05])
    ys = 3.0 + 2.0 * xs - xs ** 2
    est, resid = ms.richardson_limit(xs, ys)
    assert est == pytest.approx(3.0, abs=1e-13)


def test_from_spec_roundtrip():
    for spec in ({"form": "flat"}, {"form": "schwarzschild_area", "m": 2.0},
                 {"form": "schwarzschild_isotropic", "m": 0.5}, {"form": "conformal", "coeffs": [0.5, -0.01]}):
        metric = ms.from_spec(spec)
        again = ms.from_spec(metric.to_spec())
        assert again.name == metric.name
        assert float(again.area_radius(10.0)) == float(metric.area_radius(10.0))
    with pytest.raises(ValueError):
        ms.from_spec({"form": "kerr"})
    with pytest.raises(ValueError):
        ms.conformal_perturbation([5e-324])
