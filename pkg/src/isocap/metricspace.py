"""Rotationally symmetric asymptotically flat 3-metrics and their centered spheres.

Two radial forms are supported:

* ``AREA_RADIUS_WARPED``: ``g = f(r)^2 dr^2 + r^2 g_S2`` where ``r`` is the area radius.
* ``CONFORMALLY_FLAT``: ``g = U(s)^4 (ds^2 + s^2 g_S2)`` in the coordinate radius ``s``.

Internally both are handled through a common chart ``rho`` with radial arc
factor ``a(rho)`` (so ``ds_g = a drho``) and area radius ``h(rho)``.  Every
sphere quantity is a closed expression in ``a``, ``h`` and ``h'``.

All lengths and masses are in geometric units (G = c = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .errors import (
    DerivativeUnavailable,
    LimitNonconvergent,
    NoHorizon,
    QuadratureError,
    RadiusOutOfDomain,
)

AREA_RADIUS_WARPED = "AreaRadiusWarped"
CONFORMALLY_FLAT = "ConformallyFlatRadial"

HORIZON_SEARCH_FACTOR = 1e6
CURVATURE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class MetricProfile:
    """A radial metric.

    ``fn`` is ``f`` for the warped form and ``U`` for the conformal form;
    ``d1``/``d2`` are its first and second derivatives when known.  For a
    warped metric whose ``f`` blows up at the inner radius, ``offset_fn(d)``
    evaluates ``f(inner + d)`` without cancellation.
    """

    form: str
    fn: Callable
    inner: float
    d1: Optional[Callable] = None
    d2: Optional[Callable] = None
    offset_fn: Optional[Callable] = None
    name: str = "custom"
    length_scale: float = 1.0
    spec: Optional[dict] = field(default=None, compare=False)

    def __post_init__(self):
        if self.form not in (AREA_RADIUS_WARPED, CONFORMALLY_FLAT):
            raise ValueError(f"unknown metric form {self.form!r}")
        if self.inner < 0:
            raise ValueError("inner radius must be nonnegative")

    @property
    def is_warped(self) -> bool:
        return self.form == AREA_RADIUS_WARPED

    # chart functions --------------------------------------------------

    def radial_factor(self, rho):
        if self.is_warped:
            return self.fn(rho)
        u = self.fn(rho)
        return u * u

    def radial_factor_offset(self, d):
        """``a(inner + d)``, accurate for small offsets at a warped horizon."""
        if self.is_warped and self.offset_fn is not None:
            return self.offset_fn(d)
        return self.radial_factor(self.inner + d)

    def area_radius(self, rho):
        if self.is_warped:
            return rho
        u = self.fn(rho)
        return rho * u * u

    def area_radius_derivative(self, rho):
        if self.is_warped:
            return np.ones_like(np.asarray(rho, dtype=float))[()]
        if self.d1 is None:
            raise DerivativeUnavailable(f"{self.name}: U' is required")
        u = self.fn(rho)
        return u * u + 2.0 * rho * u * self.d1(rho)

    def mean_curvature_factor(self, rho):
        """``h'/a``, the ratio ``H h / 2``; equals 1 on Euclidean spheres."""
        if self.is_warped:
            return 1.0 / self.fn(rho)
        if self.d1 is None:
            raise DerivativeUnavailable(f"{self.name}: U' is required")
        u = self.fn(rho)
        return 1.0 + 2.0 * rho * self.d1(rho) / u

    @property
    def has_singular_inner(self) -> bool:
        """True for a warped horizon, where ``f`` has an integrable pole."""
        if not self.is_warped or self.inner <= 0:
            return False
        d = 1e-14 * max(self.inner, self.length_scale)
        return float(1.0 / self.radial_factor_offset(d)) < 1e-5

    def to_spec(self) -> dict:
        if self.spec is None:
            raise ValueError(f"{self.name}: profile built from callables has no serializable spec")
        return dict(self.spec)


@dataclass(frozen=True)
class SphereGeometry:
    radius: float
    area: float
    mean_curvature: float
    intrinsic_curvature: float
    scalar_curvature: float
    volume: float
    traceless_second_fundamental_form: float = 0.0


# ---------------------------------------------------------------------------
# named constructors


def flat() -> MetricProfile:
    one = lambda r: np.ones_like(np.asarray(r, dtype=float))[()]
    zero = lambda r: np.zeros_like(np.asarray(r, dtype=float))[()]
    return MetricProfile(
        AREA_RADIUS_WARPED, one, 0.0, d1=zero, name="flat", length_scale=1.0,
        spec={"form": "flat"},
    )


def schwarzschild_area(m: float) -> MetricProfile:
    if m < 0:
        raise ValueError("mass must be nonnegative")
    if m == 0:
        return flat()

    def f(r):
        return 1.0 / np.sqrt(1.0 - 2.0 * m / r)

    def df(r):
        return -(m / (r * r)) * (1.0 - 2.0 * m / r) ** -1.5

    def f_offset(d):
        return np.sqrt((2.0 * m + d) / d)

    return MetricProfile(
        AREA_RADIUS_WARPED, f, 2.0 * m, d1=df, offset_fn=f_offset,
        name=f"schwarzschild_area_m{m:g}", length_scale=m,
        spec={"form": "schwarzschild_area", "m": m},
    )


def _power_series_profile(coeffs: Sequence[float]):
    coeffs = [float(c) for c in coeffs]

    def u(s):
        s = np.asarray(s, dtype=float)
        out = np.ones_like(s)
        for j, c in enumerate(coeffs, start=1):
            out = out + c * s ** -j
        return out[()]

    def du(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for j, c in enumerate(coeffs, start=1):
            out = out - j * c * s ** (-j - 1)
        return out[()]

    def ddu(s):
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for j, c in enumerate(coeffs, start=1):
            out = out + j * (j + 1) * c * s ** (-j - 2)
        return out[()]

    return u, du, ddu


def schwarzschild_isotropic(m: float) -> MetricProfile:
    if m < 0:
        raise ValueError("mass must be nonnegative")
    if m == 0:
        return flat()
    u, du, ddu = _power_series_profile([m / 2.0])
    return MetricProfile(
        CONFORMALLY_FLAT, u, m / 2.0, d1=du, d2=ddu,
        name=f"schwarzschild_isotropic_m{m:g}", length_scale=m,
        spec={"form": "schwarzschild_isotropic", "m": m},
    )


def conformal_perturbation(coeffs: Sequence[float], name: Optional[str] = None) -> MetricProfile:
    """``U = 1 + sum_j a_j s^-j``.

    The inner radius is the outermost horizon when there is one, otherwise
    the outermost zero of ``U``, otherwise 0.
    """
    coeffs = [float(c) for c in coeffs]
    if not coeffs or all(c == 0 for c in coeffs):
        return flat()
    scale = max(abs(c) ** (1.0 / j) for j, c in enumerate(coeffs, start=1) if c != 0)
    if not 1e-100 < scale < 1e100:
        raise ValueError(f"perturbation length scale {scale:g} is outside the representable range")
    u, du, ddu = _power_series_profile(coeffs)
    label = name or "conformal_" + "_".join(f"{c:g}" for c in coeffs)
    probe = MetricProfile(CONFORMALLY_FLAT, u, 0.0, d1=du, d2=ddu, length_scale=scale)
    lo = _outermost_root(u, 1e-9 * scale, HORIZON_SEARCH_FACTOR * scale)
    lo = 0.0 if lo is None else lo
    hor = _outermost_root(
        lambda s: probe.mean_curvature_factor(s),
        max(lo * (1 + 1e-12), 1e-9 * scale), HORIZON_SEARCH_FACTOR * scale,
    )
    inner = hor if hor is not None else lo
    return MetricProfile(
        CONFORMALLY_FLAT, u, inner, d1=du, d2=ddu, name=label, length_scale=scale,
        spec={"form": "conformal", "coeffs": coeffs},
    )


def from_spec(spec: dict) -> MetricProfile:
    """Build a profile from the JSON config block."""
    form = spec.get("form")
    if form == "flat":
        prof = flat()
    elif form == "schwarzschild_area":
        prof = schwarzschild_area(float(spec["m"]))
    elif form == "schwarzschild_isotropic":
        prof = schwarzschild_isotropic(float(spec["m"]))
    elif form == "conformal":
        prof = conformal_perturbation(spec["coeffs"])
    else:
        raise ValueError(f"unknown metric form {form!r}")
    if spec.get("name"):
        from dataclasses import replace
        prof = replace(prof, name=spec["name"])
    return prof


# ---------------------------------------------------------------------------
# sphere geometry


def _check_radius(metric: MetricProfile, r, allow_inner=False):
    r = float(r)
    if not math.isfinite(r) or r < metric.inner or (r == metric.inner and not allow_inner):
        raise RadiusOutOfDomain(f"{metric.name}: radius {r} not above inner radius {metric.inner}")
    if r == 0.0:
        raise RadiusOutOfDomain(f"{metric.name}: radius must be positive")
    return r


def area(metric: MetricProfile, r: float) -> float:
    r = _check_radius(metric, r, allow_inner=metric.inner > 0)
    h = float(metric.area_radius(r))
    return 4.0 * math.pi * h * h


def mean_curvature(metric: MetricProfile, r: float) -> float:
    """Outward mean curvature ``2 h' / (a h)`` of the centered sphere."""
    r = _check_radius(metric, r, allow_inner=metric.inner > 0)
    if r == metric.inner and metric.has_singular_inner:
        return 0.0
    h = float(metric.area_radius(r))
    return 2.0 * float(metric.mean_curvature_factor(r)) / h


def scalar_curvature(metric: MetricProfile, r: float) -> float:
    r = _check_radius(metric, r)
    if metric.d1 is None:
        raise DerivativeUnavailable(f"{metric.name}: first derivative not supplied")
    if metric.is_warped:
        f = float(metric.fn(r))
        df = float(metric.d1(r))
        return 2.0 / (r * r) * (1.0 - 1.0 / (f * f)) + 4.0 * df / (r * f ** 3)
    if metric.d2 is None:
        raise DerivativeUnavailable(f"{metric.name}: second derivative not supplied")
    u = float(metric.fn(r))
    return -8.0 * u ** -5 * (float(metric.d2(r)) + 2.0 * float(metric.d1(r)) / r)


def misner_sharp_mass(metric: MetricProfile, r):
    """``(h/2)(1 - (h'/a)^2)``; coincides with the Hawking mass of the sphere."""
    h = metric.area_radius(r)
    eta = metric.mean_curvature_factor(r)
    return 0.5 * h * (1.0 - eta * eta)


def volume(metric: MetricProfile, r_lo: float, r_hi: float, rtol: float = 1e-12) -> float:
    """Riemannian volume of the shell ``r_lo <= rho <= r_hi``."""
    if r_lo < metric.inner or not r_lo < r_hi:
        raise RadiusOutOfDomain(f"{metric.name}: bad volume range [{r_lo}, {r_hi}]")
    return 4.0 * math.pi * _radial_integral(
        metric, lambda rho: metric.radial_factor(rho) * metric.area_radius(rho) ** 2,
        r_lo, r_hi, rtol, singular_weight=1.0,
    )


def _radial_integral(metric, integrand, lo, hi, rtol, singular_weight):
    """Integrate ``integrand(rho) drho`` over ``[lo, hi]`` on a geometric split.

    At a warped horizon the integrand carries ``a**singular_weight``; the
    substitution ``rho = inner + xi^2`` removes the endpoint singularity.
    """
    total = 0.0
    pieces = []
    start = lo
    if lo == metric.inner and metric.has_singular_inner:
        first = min(hi, lo + max(lo, metric.length_scale))
        inner = metric.inner

        def sub(xi):
            d = xi * xi
            rho = inner + d
            a = metric.radial_factor_offset(d)
            return integrand(rho) / metric.radial_factor(rho) * a * 2.0 * xi if singular_weight else 0.0

        val, err = integrate.quad(sub, 0.0, math.sqrt(first - lo), epsabs=0.0, epsrel=rtol, limit=200)
        pieces.append((val, err))
        start = first
    elif lo == 0.0:
        first = min(hi, metric.length_scale)
        val, err = integrate.quad(integrand, 0.0, first, epsabs=0.0, epsrel=rtol, limit=200)
        pieces.append((val, err))
        start = first
    if start < hi:
        n = max(1, int(math.ceil(math.log2(hi / start))))
        edges = start * (hi / start) ** (np.arange(n + 1) / n)
        edges[-1] = hi
        for a, b in zip(edges[:-1], edges[1:]):
            val, err = integrate.quad(integrand, a, b, epsabs=0.0, epsrel=rtol, limit=200)
            pieces.append((val, err))
    for val, err in pieces:
        total += val
    err_total = sum(e for _, e in pieces)
    if not math.isfinite(total) or err_total > max(1e3 * rtol * abs(total), 1e-300):
        raise QuadratureError(f"radial quadrature did not converge: value {total}, error {err_total}")
    return total


def sphere(metric: MetricProfile, r: float) -> SphereGeometry:
    h = float(metric.area_radius(r))
    try:
        scal = scalar_curvature(metric, r)
    except (DerivativeUnavailable, RadiusOutOfDomain):
        scal = float("nan")
    lo = metric.inner
    return SphereGeometry(
        radius=r,
        area=area(metric, r),
        mean_curvature=mean_curvature(metric, r),
        intrinsic_curvature=2.0 / (h * h),
        scalar_curvature=scal,
        volume=volume(metric, lo, r) if r > lo else 0.0,
    )


# ---------------------------------------------------------------------------
# global quantities


def _outermost_root(fn, lo, hi, n=4000):
    """Largest root of ``fn`` in ``(lo, hi)`` found on a logarithmic scan."""
    grid = np.geomspace(lo, hi, n)
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(grid), dtype=float)
    for k in range(n - 1, 0, -1):
        a, b = vals[k - 1], vals[k]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            return float(grid[k - 1])
        if a * b < 0:
            return float(optimize.brentq(fn, grid[k - 1], grid[k], xtol=1e-300, rtol=1e-15, maxiter=200))
    return None


def horizon_radius(metric: MetricProfile, search_bound: Optional[float] = None) -> float:
    """Outermost radius with vanishing mean curvature."""
    bound = search_bound or HORIZON_SEARCH_FACTOR * metric.length_scale
    if metric.is_warped:
        if metric.has_singular_inner:
            return metric.inner
        raise NoHorizon(f"{metric.name}: mean curvature 2/(f r) never vanishes")
    lo = max(metric.inner * (1 - 1e-12), 1e-9 * metric.length_scale)
    root = _outermost_root(lambda s: metric.mean_curvature_factor(s), lo, bound)
    if root is None:
        raise NoHorizon(f"{metric.name}: no minimal sphere below {bound:g}")
    return root


def _neville_at_zero(xs, ys):
    """Value at x = 0 of the interpolating polynomial through (xs, ys)."""
    p = list(ys)
    n = len(xs)
    for k in range(1, n):
        for i in range(n - k):
            p[i] = (xs[i + k] * p[i] - xs[i] * p[i + 1]) / (xs[i + k] - xs[i])
    return p[0]


def richardson_limit(xs, ys):
    """Polynomial extrapolation to x -> 0 and the gap to the lower-order estimate."""
    xs = [float(x) for x in xs]
    ys = [float(y) for y in ys]
    full = _neville_at_zero(xs, ys)
    if len(xs) > 1:
        lower = _neville_at_zero(xs[1:], ys[1:])
    else:
        lower = ys[0]
    return full, abs(full - lower)


def decay_exponent(metric: MetricProfile, r_start: Optional[float] = None) -> float:
    """Fitted ``tau`` in ``|metric coefficient - 1| ~ r^-tau``."""
    r0 = r_start or 1e2 * max(metric.length_scale, metric.inner, 1.0)
    radii = r0 * 2.0 ** np.arange(8)
    dev = np.abs(np.asarray(metric.fn(radii), dtype=float) - 1.0)
    if np.all(dev == 0):
        return float("inf")
    mask = dev > 0
    if mask.sum() < 2:
        return float("inf")
    slope = np.polyfit(np.log(radii[mask]), np.log(dev[mask]), 1)[0]
    return float(-slope)


def adm_mass(metric: MetricProfile, ladder: int = 6) -> float:
    """ADM mass from the Misner-Sharp limit (warped) or the 1/s coefficient of U (conformal)."""
    r0 = 1e2 * max(metric.length_scale, metric.inner, 1.0)
    radii = r0 * 2.0 ** np.arange(ladder)
    if metric.is_warped:
        values = [float(misner_sharp_mass(metric, r)) for r in radii]
    else:
        values = [2.0 * r * (float(metric.fn(r)) - 1.0) for r in radii]
    xs = 1.0 / radii[::-1]
    ys = values[::-1]
    est, resid = richardson_limit(xs[:4], ys[:4])
    scale = max(abs(est), 1e-12 * metric.length_scale, 1e-300)
    if not math.isfinite(est) or resid > 1e-6 * max(scale, metric.length_scale):
        raise LimitNonconvergent(
            f"{metric.name}: ADM mass extrapolation unstable (residual {resid:g})",
            decay_rate=decay_exponent(metric),
        )
    return est


@dataclass
class ValidationReport:
    metric: str
    passed: bool
    worst_scalar_curvature: float
    worst_location: float
    asymptotically_flat: bool
    decay_exponent: float
    tolerance: float
    failures: list = field(default_factory=list)


def validate(metric: MetricProfile, grid: Optional[np.ndarray] = None,
             tolerance: float = CURVATURE_TOLERANCE) -> ValidationReport:
    """Sample ``R >= -tolerance`` and the asymptotic flatness decay."""
    scale = metric.length_scale
    lo = metric.inner * (1 + 1e-6) if metric.inner > 0 else 1e-3 * scale
    if grid is None:
        grid = np.geomspace(lo, HORIZON_SEARCH_FACTOR * scale, 600)
    failures = []
    worst, worst_at = float("inf"), float("nan")
    try:
        for r in grid:
            val = scalar_curvature(metric, float(r))
            if val < worst:
                worst, worst_at = val, float(r)
    except DerivativeUnavailable as exc:
        failures.append(f"scalar curvature unavailable: {exc}")
        worst = float("nan")
    if math.isfinite(worst) and worst < -tolerance:
        failures.append(f"negative scalar curvature {worst:.3e} at radius {worst_at:.6g}")

    far = np.geomspace(1e2 * scale, HORIZON_SEARCH_FACTOR * scale, 12)
    dev = np.abs(np.asarray(metric.fn(far), dtype=float) - 1.0)
    af = bool(dev[-1] < 1e-3 and np.all(np.diff(dev) <= 1e-15))
    if not metric.is_warped and metric.d1 is not None:
        su = np.abs(far * np.asarray(metric.d1(far), dtype=float))
        af = af and bool(su[-1] < 1e-3)
    if not af:
        failures.append("coefficients do not decay to the flat metric")
    return ValidationReport(
        metric=metric.name,
        passed=not failures,
        worst_scalar_curvature=worst,
        worst_location=worst_at,
        asymptotically_flat=af,
        decay_exponent=decay_exponent(metric),
        tolerance=tolerance,
        failures=failures,
    )
