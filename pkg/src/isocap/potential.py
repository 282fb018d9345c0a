"""Radial p-capacitary potentials by quadrature.

For a radial metric with arc factor ``a`` and area radius ``h`` the p-Laplace
equation has the first integral ``h^2 a^(1-p) |u'|^(p-1) = K``, so

    u(rho) = I(rho) / I(rho0),   I(rho) = int_rho^inf a h^(-beta),   beta = 2/(p-1).

All tail integrals are stored in log form and scaled by ``h(rho0)^beta`` so
that exponents like ``beta = 40`` (p = 1.05) neither underflow nor overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import metricspace as ms
from .errors import OutOfRange, QuadratureError, RadiusOutOfDomain
from .specfun import check_exponent


@dataclass(frozen=True)
class SolverOptions:
    quad_tol: float = 1e-10
    points_per_decade: int = 64
    far_factor: float = 1e6
    near_refine: int = 4

    def __post_init__(self):
        if not 0 < self.quad_tol < 1e-3:
            raise ValueError("quad_tol must lie in (0, 1e-3)")
        if self.points_per_decade < 4:
            raise ValueError("points_per_decade must be at least 4")
        if self.far_factor <= 10:
            raise ValueError("far_factor must exceed 10")


@dataclass(frozen=True)
class PotentialSolution:
    p: float
    metric: ms.MetricProfile
    r0: float
    K: float
    cap: float
    rho: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    log_I: np.ndarray = field(repr=False)
    dlogu_dq: np.ndarray = field(repr=False)
    tail_C: float = float("nan")
    options: SolverOptions = field(default_factory=SolverOptions)

    @property
    def beta(self) -> float:
        return 2.0 / (self.p - 1.0)

    @property
    def gamma(self) -> float:
        return (3.0 - self.p) / (self.p - 1.0)

    @property
    def r_far(self) -> float:
        return float(self.rho[-1])

    @property
    def h0(self) -> float:
        return float(self.metric.area_radius(self.r0))

    @property
    def singular_start(self) -> bool:
        return self.r0 == self.metric.inner and self.metric.has_singular_inner

    @property
    def u(self) -> np.ndarray:
        return np.exp(self.log_I - self.log_I[0])

    @property
    def w(self) -> np.ndarray:
        return -(self.p - 1.0) * (self.log_I - self.log_I[0])

    @property
    def t_max(self) -> float:
        return float(self.w[-1])

    def table(self):
        """Node table ``(r, u, du_dr, w, grad_w)``."""
        out = np.empty((len(self.rho), 5))
        for i, r in enumerate(self.rho):
            out[i] = (r, *evaluate(self, float(r)))
        return out


@dataclass(frozen=True)
class PointValue:
    u: float
    du: float
    w: float
    grad_w: float

    def __iter__(self):
        return iter((self.u, self.du, self.w, self.grad_w))


# ---------------------------------------------------------------------------
# quadrature helpers


def _quad(fun, lo, hi, tol):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, *rest = integrate.quad(fun, lo, hi, epsabs=0.0, epsrel=tol, limit=200, full_output=1)
    if not math.isfinite(val) or err > max(100.0 * tol * abs(val), 1e-290):
        raise QuadratureError(f"quadrature on [{lo:.17g}, {hi:.17g}] failed: value {val}, error {err}")
    return val


def _log_h(metric, rho):
    return math.log(float(metric.area_radius(rho)))


def _cell_log_integral(metric, beta, lo, hi, tol, singular=False):
    """``log int_lo^hi a h^-beta``, scaled by ``h(lo)^beta`` internally.

    Cells close to a horizon (relative to their width) use ``rho = inner + xi^2``,
    which removes the inverse square-root singularity of ``a``.
    """
    lh_lo = _log_h(metric, lo)
    inner = metric.inner
    if metric.has_singular_inner and (singular or lo - inner < 100.0 * (hi - lo)):

        def fun(xi):
            d = xi * xi
            rho = inner + d
            a = float(metric.radial_factor_offset(d))
            return a * math.exp(-beta * (_log_h(metric, rho) - lh_lo)) * 2.0 * xi

        val = _quad(fun, math.sqrt(max(lo - inner, 0.0)), math.sqrt(hi - inner), tol)
    else:

        def fun(rho):
            return float(metric.radial_factor(rho)) * math.exp(-beta * (_log_h(metric, rho) - lh_lo))

        val = _quad(fun, lo, hi, tol)
    if val <= 0:
        raise QuadratureError(f"nonpositive cell integral on [{lo}, {hi}]")
    return math.log(val) - beta * lh_lo


def _tail_log_integral(metric, beta, R, tol):
    """``log int_R^inf a h^-beta`` through ``rho = R / x`` and ``x = y^n``.

    With ``n = 1/(beta-1)`` the Euclidean integrand becomes constant in ``y``.
    """
    n = 1.0 / (beta - 1.0)
    lh_R = _log_h(metric, R)

    def fun(y):
        x = max(y ** n, 1e-200)
        rho = R / x
        a = float(metric.radial_factor(rho))
        # R x^-2 dx/dy (h/h_R)^-beta with dx/dy = n x / y
        log_val = math.log(R * n) - math.log(x) - math.log(y) - beta * (_log_h(metric, rho) - lh_R)
        return a * math.exp(log_val)

    val = _quad(fun, 0.0, 1.0, tol)
    return math.log(val) - beta * lh_R


# ---------------------------------------------------------------------------
# grid


def _grid(metric, r0, options, singular):
    r_far = options.far_factor * r0
    decades = math.log10(options.far_factor)
    if singular:
        # rho = r0 + r0 sinh^2 q: square-root grading at the horizon, geometric far out
        q_far = math.asinh(math.sqrt((r_far - r0) / r0))
        n = int(math.ceil(2.0 * q_far / math.log(10.0) * options.points_per_decade))
        q = np.linspace(0.0, q_far, n + 1)
        rho = r0 + r0 * np.sinh(q) ** 2
    else:
        n = int(math.ceil(decades * options.points_per_decade))
        q = np.linspace(math.log(r0), math.log(r_far), n + 1)
        rho = np.exp(q)
    # subdivide cells in the strong-field zone, where the metric still varies
    near = 30.0 * max(r0, metric.length_scale, metric.inner)
    cut = int(np.searchsorted(rho, near))
    if cut > 0 and options.near_refine > 1:
        fine = np.linspace(q[0], q[cut], cut * options.near_refine + 1)
        q = np.concatenate([fine, q[cut + 1:]])
        rho = r0 + r0 * np.sinh(q) ** 2 if singular else np.exp(q)
    rho[0] = r0
    rho[-1] = r_far
    return rho, q


def _coord(sol_or_r0, rho, singular):
    if singular:
        r0 = sol_or_r0
        return math.asinh(math.sqrt(max(rho - r0, 0.0) / r0))
    return math.log(rho)


def _log_drho_dq_times_a(metric, r0, q, singular):
    """``log(a(rho) drho/dq)``, finite at the horizon node."""
    if singular:
        q = max(q, 1e-100)
        s = math.sinh(q)
        d = r0 * s * s
        a = float(metric.radial_factor_offset(d))
        return math.log(a) + math.log(2.0 * r0 * s * math.cosh(q))
    rho = math.exp(q)
    return math.log(float(metric.radial_factor(rho))) + q


def _logaddexp_reverse_cumsum(logs):
    out = np.empty_like(logs)
    acc = -np.inf
    for i in range(len(logs) - 1, -1, -1):
        acc = np.logaddexp(acc, logs[i])
        out[i] = acc
    return out


# ---------------------------------------------------------------------------
# solver


def solve_radial(metric: ms.MetricProfile, p: float, r0: float, options: SolverOptions | None = None) -> PotentialSolution:
    """p-capacitary potential of ``{radius <= r0}``."""
    options = options or SolverOptions()
    p = check_exponent(p)
    r0 = float(r0)
    if r0 < metric.inner or r0 <= 0:
        raise RadiusOutOfDomain(f"{metric.name}: r0 = {r0} below inner radius {metric.inner}")
    if not float(metric.area_radius(r0)) > 0:
        raise RadiusOutOfDomain(f"{metric.name}: degenerate sphere at r0 = {r0}")
    beta = 2.0 / (p - 1.0)
    singular = r0 == metric.inner and metric.has_singular_inner
    rho, q = _grid(metric, r0, options, singular)
    tol = options.quad_tol

    logs = np.empty(len(rho))
    for k in range(len(rho) - 1):
        logs[k] = _cell_log_integral(metric, beta, rho[k], rho[k + 1], tol, singular=singular and k == 0)
    logs[-1] = _tail_log_integral(metric, beta, rho[-1], tol)
    log_I = _logaddexp_reverse_cumsum(logs)

    lh = np.array([_log_h(metric, r) for r in rho])
    lad = np.array([_log_drho_dq_times_a(metric, r0, qq, singular) for qq in q])
    dlogu_dq = -np.exp(lad - beta * lh - log_I)

    lh0 = lh[0]
    # K = h0^2 * (h0^-beta I)^-(p-1) with the scaled integral; done in logs
    log_K = 2.0 * lh0 - (p - 1.0) * (log_I[0] + beta * lh0)
    K = math.exp(log_K)
    cap = ((p - 1.0) / (3.0 - p)) ** (p - 1.0) * K

    gamma = (3.0 - p) / (p - 1.0)
    tail_C = math.exp(log_I[-1] - log_I[0] + gamma * math.log(rho[-1]))

    return PotentialSolution(
        p=p, metric=metric, r0=r0, K=K, cap=cap, rho=rho, q=q, log_I=log_I,
        dlogu_dq=dlogu_dq, tail_C=tail_C, options=options,
    )


def capacity(solution: PotentialSolution) -> float:
    return solution.cap


def _locate(solution, r):
    if not solution.r0 <= r <= solution.r_far:
        raise OutOfRange(f"radius {r} outside [{solution.r0}, {solution.r_far}]")
    k = int(np.searchsorted(solution.rho, r, side="right")) - 1
    return min(max(k, 0), len(solution.rho) - 2)


def log_tail(solution: PotentialSolution, r: float) -> float:
    """Exact ``log I(r)`` from the nearest node above plus a partial cell."""
    r = float(r)
    k = _locate(solution, r)
    hi = float(solution.rho[k + 1])
    if r == hi:
        return float(solution.log_I[k + 1])
    if r == solution.rho[k]:
        return float(solution.log_I[k])
    singular = solution.singular_start and r == solution.r0
    part = _cell_log_integral(solution.metric, solution.beta, r, hi, solution.options.quad_tol, singular=singular)
    return float(np.logaddexp(part, solution.log_I[k + 1]))


def evaluate(solution: PotentialSolution, r: float):
    """``(u, u', w, |grad w|)`` at radius ``r``; ``u'`` is the derivative in the chart coordinate."""
    r = float(r)
    metric = solution.metric
    beta = solution.beta
    lI = log_tail(solution, r)
    log_u = lI - float(solution.log_I[0])
    lh = _log_h(metric, r)
    grad_w = (solution.p - 1.0) * math.exp(-beta * lh - lI)
    if solution.singular_start and r == solution.r0:
        du = -math.inf
    else:
        a = float(metric.radial_factor(r))
        du = -a * math.exp(-beta * lh - float(solution.log_I[0]))
    return PointValue(math.exp(log_u), du, -(solution.p - 1.0) * log_u, grad_w)


def interpolate_log_u(solution: PotentialSolution, r: float) -> float:
    """Cubic Hermite interpolation of ``log u`` in the grid coordinate."""
    r = float(r)
    k = _locate(solution, r)
    qx = _coord(solution.r0, r, solution.singular_start)
    q0, q1 = solution.q[k], solution.q[k + 1]
    dq = q1 - q0
    s = (qx - q0) / dq
    y0 = solution.log_I[k] - solution.log_I[0]
    y1 = solution.log_I[k + 1] - solution.log_I[0]
    m0 = solution.dlogu_dq[k] * dq
    m1 = solution.dlogu_dq[k + 1] * dq
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return float(h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1)


def interpolate(solution: PotentialSolution, r: float) -> float:
    return math.exp(interpolate_log_u(solution, r))


def level_radius(solution: PotentialSolution, t: float, tol: float = 1e-12) -> float:
    """Radius of the level set ``{w = t}``."""
    t = float(t)
    w_nodes = solution.w
    if t < 0 or t > w_nodes[-1]:
        raise OutOfRange(f"level {t} beyond table range [0, {w_nodes[-1]}]")
    if t == 0:
        return solution.r0
    k = int(np.searchsorted(w_nodes, t, side="right")) - 1
    k = min(max(k, 0), len(w_nodes) - 2)
    lo, hi = float(solution.rho[k]), float(solution.rho[k + 1])
    if t == w_nodes[k + 1]:
        return hi
    # Hermite-in-q initial guess by linear inversion of the node segment
    frac = (t - w_nodes[k]) / (w_nodes[k + 1] - w_nodes[k])
    qg = solution.q[k] + frac * (solution.q[k + 1] - solution.q[k])
    if solution.singular_start:
        r = solution.r0 + solution.r0 * math.sinh(qg) ** 2
    else:
        r = math.exp(qg)
    r = min(max(r, lo), hi)
    metric = solution.metric
    beta = solution.beta
    for _ in range(60):
        if solution.singular_start and r == solution.r0:
            r = lo + 1e-3 * (hi - lo)
        lI = log_tail(solution, r)
        w = -(solution.p - 1.0) * (lI - float(solution.log_I[0]))
        resid = w - t
        if abs(resid) <= tol:
            return r
        if resid > 0:
            hi = r
        else:
            lo = r
        dw = (solution.p - 1.0) * float(metric.radial_factor(r)) * math.exp(-beta * _log_h(metric, r) - lI)
        step = r - resid / dw
        if not lo < step < hi:
            step = 0.5 * (lo + hi)
        if step == r or hi - lo <= 4e-16 * hi:
            return step
        r = step
    return r


def dirichlet_energy(solution: PotentialSolution, r_hi: float | None = None) -> float:
    """Normalized p-Dirichlet energy of ``u`` on ``[r0, r_hi]`` by direct quadrature."""
    metric = solution.metric
    p = solution.p
    r_hi = r_hi or solution.r_far
    lI0 = float(solution.log_I[0])
    beta = solution.beta

    def dens(rho):
        # 4 pi h^2 a^(1-p) |u'|^p with |u'| = a h^-beta / I0
        lh = _log_h(metric, rho)
        a = float(metric.radial_factor(rho))
        return 4.0 * math.pi * a * math.exp(2.0 * lh - p * (beta * lh + lI0))

    edges = solution.rho[solution.rho <= r_hi]
    total = 0.0
    start = 0
    if solution.singular_start:
        inner = metric.inner
        hi = float(edges[1])

        def sub(xi):
            d = xi * xi
            rho = inner + d
            lh = _log_h(metric, rho)
            a = float(metric.radial_factor_offset(d))
            return 4.0 * math.pi * a * math.exp(2.0 * lh - p * (beta * lh + lI0)) * 2.0 * xi

        total += _quad(sub, 0.0, math.sqrt(hi - inner), solution.options.quad_tol)
        start = 1
    for lo, hi in zip(edges[start:-1], edges[start + 1:]):
        total += _quad(dens, float(lo), float(hi), solution.options.quad_tol)
    if edges[-1] < r_hi:
        total += _quad(dens, float(edges[-1]), r_hi, solution.options.quad_tol)
    return ((p - 1.0) / (3.0 - p)) ** (p - 1.0) * total / (4.0 * math.pi)


def write_csv(solution: PotentialSolution, path) -> None:
    table = solution.table()
    np.savetxt(path, table, delimiter=",", fmt="%.17g", header="r,u,du_dr,w,grad_w", comments="", newline="\n")
