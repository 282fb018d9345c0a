"""Discrete p-Dirichlet energy minimization: an independent capacity oracle.

The test function ``v`` is piecewise linear in a computational coordinate
``sigma`` (``rho = r0 e^sigma``, or ``rho = r0 + r0 sinh^2 sigma`` at a warped
horizon), with ``v = 1`` at ``r0`` and ``v = 0`` at ``R_max``.  Each cell
contributes ``w_i |dv/dsigma|^p`` where the weight

    w_i = 4 pi int_cell h^2 (a drho/dsigma)^(1-p) dsigma

absorbs the metric, so the discrete energy is an exact integral of the
piecewise-linear competitor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from . import metricspace as ms
from .errors import FitDivergence, NewtonStall, RadiusOutOfDomain
from .specfun import check_exponent

GAUSS_POINTS = 8
SLOPE_FLOOR = 1e-14


@dataclass(frozen=True)
class DiscreteCondenser:
    p: float
    metric: ms.MetricProfile
    r0: float
    r_max: float
    sigma: np.ndarray = field(repr=False)
    radii: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    energy: float = float("nan")
    capacity: float = float("nan")
    iterations: int = 0
    method: str = "newton"
    energy_history: tuple = ()


def _sigma_map(metric, r0, singular):
    if singular:
        def rho(sig):
            return r0 + r0 * np.sinh(sig) ** 2

        def sigma_of(r):
            return math.asinh(math.sqrt((r - r0) / r0))
    else:
        def rho(sig):
            return r0 * np.exp(sig)

        def sigma_of(r):
            return math.log(r / r0)
    return rho, sigma_of


def _log_a_drho(metric, r0, sig, singular):
    """``log(a drho/dsigma)`` on an array, finite at a horizon."""
    sig = np.asarray(sig, dtype=float)
    if singular:
        sig = np.maximum(sig, 1e-100)
        s = np.sinh(sig)
        d = r0 * s * s
        a = np.asarray(metric.radial_factor_offset(d), dtype=float)
        return np.log(a) + np.log(2.0 * r0 * s * np.cosh(sig))
    rho = r0 * np.exp(sig)
    return np.log(np.asarray(metric.radial_factor(rho), dtype=float)) + np.log(rho)


def cell_weights(metric, p, r0, sigma, singular):
    """``4 pi int h^2 (a drho/dsigma)^(1-p) dsigma`` per cell, Gauss-Legendre."""
    nodes, gw = np.polynomial.legendre.leggauss(GAUSS_POINTS)
    lo = sigma[:-1, None]
    hi = sigma[1:, None]
    half = 0.5 * (hi - lo)
    pts = lo + half * (nodes[None, :] + 1.0)
    rho_of, _ = _sigma_map(metric, r0, singular)
    rho = rho_of(pts)
    h = np.asarray(metric.area_radius(rho), dtype=float)
    la = _log_a_drho(metric, r0, pts, singular)
    dens = h * h * np.exp((1.0 - p) * la)
    return 4.0 * math.pi * np.sum(dens * gw[None, :], axis=1) * half[:, 0]


def _energy(weights, v, dsig, p):
    s = np.diff(v) / dsig
    return float(np.sum(weights * np.abs(s) ** p))


def closed_form_minimizer(weights, dsig, p):
    """Exact discrete minimizer: constant flux ``w_i |s_i|^(p-1)`` across cells."""
    inv = weights ** (-1.0 / (p - 1.0))
    total = float(np.sum(inv))
    slopes = inv / (total * dsig)
    v = np.concatenate([[1.0], 1.0 - np.cumsum(slopes * dsig)])
    v[-1] = 0.0
    energy = total ** (1.0 - p) * dsig ** (-p)
    return v, energy


def _newton(weights, v, dsig, p, rtol=1e-12, max_iter=200):
    n = len(v)
    history = [_energy(weights, v, dsig, p)]

    def grad_hess(v):
        s = np.diff(v) / dsig
        abs_s = np.maximum(np.abs(s), SLOPE_FLOOR)
        flux = weights * abs_s ** (p - 2.0) * s
        g = p / dsig * (flux[:-1] - flux[1:])
        c = p * (p - 1.0) / dsig ** 2 * weights * abs_s ** (p - 2.0)
        diag = c[:-1] + c[1:]
        off = -c[1:-1]
        # the gradient is a difference of fluxes; below this it is pure roundoff
        noise = 64.0 * np.finfo(float).eps * p / dsig * float(np.max(np.abs(flux)))
        return g, diag, off, noise

    g, diag, off, noise = grad_hess(v)
    g0 = float(np.max(np.abs(g)))
    target = max(rtol * g0, noise)
    if g0 <= target:
        return v, history, 0
    for it in range(1, max_iter + 1):
        ab = np.zeros((2, n - 2))
        ab[0, 1:] = off
        ab[1, :] = diag
        step = linalg.solveh_banded(ab, -g, lower=False)
        e_old = history[-1]
        slope = float(np.dot(g, step))
        if -slope <= 1e3 * np.finfo(float).eps * e_old:
            # Newton decrement at the roundoff level of the energy
            return v, history, it - 1
        lam = 1.0
        while True:
            trial = v.copy()
            trial[1:-1] += lam * step
            e_new = _energy(weights, trial, dsig, p)
            if e_new <= e_old + 1e-4 * lam * slope or lam < 1e-12:
                break
            lam *= 0.5
        if lam < 1e-12:
            if float(np.max(np.abs(g))) <= 1e3 * noise:
                return v, history, it - 1
            raise NewtonStall(f"line search failed at iteration {it}")
        v = trial
        history.append(min(e_new, e_old))
        g, diag, off, noise = grad_hess(v)
        if float(np.max(np.abs(g))) <= max(target, noise):
            return v, history, it
    raise NewtonStall(f"no convergence after {max_iter} iterations")


def minimize_energy(metric: ms.MetricProfile, p: float, r0: float, r_max: float, n: int = 4096):
    """Minimize the discrete condenser energy; returns ``(DiscreteCondenser, normalized capacity)``."""
    p = check_exponent(p)
    if n < 16:
        raise ValueError("need at least 16 cells")
    if r0 < metric.inner or not r0 < r_max:
        raise RadiusOutOfDomain(f"bad condenser radii [{r0}, {r_max}]")
    singular = r0 == metric.inner and metric.has_singular_inner
    rho_of, sigma_of = _sigma_map(metric, r0, singular)
    sigma = np.linspace(0.0, sigma_of(r_max), n + 1)
    radii = rho_of(sigma)
    radii[0], radii[-1] = r0, r_max
    dsig = float(sigma[1] - sigma[0])
    weights = cell_weights(metric, p, r0, sigma, singular)

    # start linear in the Euclidean capacity coordinate (r/r0)^-gamma
    gamma = (3.0 - p) / (p - 1.0)
    z = (radii / r0) ** (-gamma)
    zR = (r_max / r0) ** (-gamma)
    v = (z - zR) / (1.0 - zR)
    v[0], v[-1] = 1.0, 0.0

    method = "newton"
    try:
        v, history, iters = _newton(weights, v, dsig, p)
        # maximum-principle projection; removes roundoff sign flips in the far tail
        # and cannot raise the energy
        v = np.minimum.accumulate(np.clip(v, 0.0, 1.0))
        energy = _energy(weights, v, dsig, p)
    except NewtonStall:
        v, energy = closed_form_minimizer(weights, dsig, p)
        history, iters, method = [energy], 0, "closed_form"
    cap = normalized_capacity(energy, p)
    cond = DiscreteCondenser(
        p=p, metric=metric, r0=r0, r_max=r_max, sigma=sigma, radii=radii,
        weights=weights, values=v, energy=energy, capacity=cap, iterations=iters,
        method=method, energy_history=tuple(history),
    )
    return cond, cap


def normalized_capacity(energy: float, p: float) -> float:
    return ((p - 1.0) / (3.0 - p)) ** (p - 1.0) * energy / (4.0 * math.pi)


@dataclass(frozen=True)
class Extrapolation:
    capacity: float
    residual: float
    coefficients: tuple


def extrapolate_capacity(r_values, capacities, p: float, r0: float = 1.0) -> Extrapolation:
    """Fit ``cap_R^(-1/(p-1)) = A + c1 R^-gamma (+ c2 R^-(gamma+1))`` and return ``A^-(p-1)``.

    The leading law is exact for Euclidean condensers; the second term absorbs
    the ``1/R`` metric correction when three or more points are supplied.
    """
    R = np.asarray(r_values, dtype=float) / r0
    caps = np.asarray(capacities, dtype=float)
    if len(R) < 2 or len(R) != len(caps):
        raise FitDivergence("need at least two matching ladder points")
    if np.any(caps <= 0):
        raise FitDivergence("capacities must be positive")
    gamma = (3.0 - p) / (p - 1.0)
    y = caps ** (-1.0 / (p - 1.0))
    cols = [np.ones_like(R), R ** -gamma]
    if len(R) >= 3:
        cols.append(R ** (-gamma - 1.0))
    A = np.vstack(cols).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    # residual diagnostic: change against the one-correction fit
    coef2, *_ = np.linalg.lstsq(A[:, :2], y, rcond=None)
    if not coef[0] > 0 or not np.isfinite(coef[0]):
        raise FitDivergence(f"extrapolated intercept {coef[0]} is not positive")
    cap = float(coef[0] ** (-(p - 1.0)))
    cap2 = float(coef2[0] ** (-(p - 1.0))) if coef2[0] > 0 else float("nan")
    resid = abs(cap - cap2) / cap if len(R) >= 3 else float(np.max(np.abs(A @ coef - y)) / abs(coef[0]))
    return Extrapolation(cap, float(resid), tuple(float(c) for c in coef))


def ladder_capacity(metric, p, r0, factors=(10.0, 100.0, 1000.0), n=4096):
    """Condenser capacities on a geometric ladder and the extrapolated value."""
    radii = [r0 * f for f in factors]
    caps = [minimize_energy(metric, p, r0, R, n)[1] for R in radii]
    return radii, caps, extrapolate_capacity(radii, caps, p, r0)
