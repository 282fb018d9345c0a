"""Mass functionals along the level sets ``{w_p = t}`` of a radial potential.

On centered spheres every integrand is constant, so each surface integral is
the integrand times the area.  The record keeps both the raw integrals (for
the literal formulas) and the dimensionless ratios

    eta = H h / 2,        psi = |grad w| h / (3 - p),

in which the masses take cancellation-free forms, e.g. the p-Hawking mass is
``cap_t^(1/(3-p)) / 2 * ((1 - eta^2) + (psi - eta)^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metricspace as ms
from . import potential as pot

ALPHA_DEFAULT = (1.0 / 3.0, None, 1.0)  # None stands for (3 - p)/3


# ---------------------------------------------------------------------------
# literal mass formulas


def hawking_mass(area: float, willmore: float) -> float:
    """Hawking mass from the area and the raw Willmore energy ``int H^2``."""
    return math.sqrt(area) / (16.0 * math.pi ** 1.5) * (4.0 * math.pi - willmore / 4.0)


def p_hawking_mass(cap_t: float, p: float, int_grad2: float, int_grad_h: float) -> float:
    """p-Hawking mass from ``int |grad w|^2`` and ``int |grad w| H``."""
    return cap_t ** (1.0 / (3.0 - p)) / (8.0 * math.pi) * (
        4.0 * math.pi + int_grad2 / (3.0 - p) ** 2 - int_grad_h / (3.0 - p)
    )


def p_hawking_modified(cap_t: float, p: float, int_grad2: float) -> float:
    return cap_t ** (1.0 / (3.0 - p)) / (4.0 * math.pi * (3.0 - p)) * (
        4.0 * math.pi - int_grad2 / (3.0 - p) ** 2
    )


def iso_p_quasilocal(volume: float, cap: float, p: float) -> float:
    """Quasi-local p-isocapacitary mass."""
    return (volume - 4.0 * math.pi / 3.0 * cap ** (3.0 / (3.0 - p))) / (2.0 * p * math.pi * cap ** (2.0 / (3.0 - p)))


def iso_quasilocal(volume: float, area: float) -> float:
    """Quasi-local isoperimetric mass."""
    return 2.0 / area * (volume - area ** 1.5 / (6.0 * math.sqrt(math.pi)))


def alpha_iso_p(volume: float, cap: float, p: float, alpha: float) -> float:
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    return 2.0 * cap ** ((1.0 - 3.0 * alpha) / (3.0 - p)) / (3.0 * p * alpha) * (
        (3.0 * volume / (4.0 * math.pi)) ** alpha - cap ** (3.0 * alpha / (3.0 - p))
    )


def alpha_iso(volume: float, area: float, alpha: float) -> float:
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    return area ** ((1.0 - 3.0 * alpha) / 2.0) / (3.0 * alpha * math.sqrt(math.pi)) * (
        (6.0 * math.sqrt(math.pi) * volume) ** alpha - area ** (1.5 * alpha)
    )


def _alphas(p, alphas):
    return tuple((3.0 - p) / 3.0 if a is None else float(a) for a in alphas)


# ---------------------------------------------------------------------------
# records


@dataclass(frozen=True)
class LevelSetRecord:
    t: float
    r: float
    area: float
    volume: float
    H: float
    grad_w: float
    cap: float
    eta: float
    psi: float
    m_hawking: float
    m_p_hawking: float
    m_p_hawking_mod: float
    m_iso_p: float
    m_iso: float
    rhs_geroch: float
    int_grad2: float
    int_grad_h: float
    willmore: float
    int_scalar_half: float
    deficit: float
    alpha_iso_p: dict = field(default_factory=dict)
    alpha_iso: dict = field(default_factory=dict)
    # identities of centered spheres
    int_intrinsic_half: float = 4.0 * math.pi
    traceless_norm2: float = 0.0
    tangential_grad: float = 0.0

    CSV_COLUMNS = (
        "t", "r", "area", "volume", "cap", "H", "grad_w", "m_hawking", "m_p_hawking",
        "m_p_hawking_mod", "m_iso_p", "m_iso", "rhs_geroch",
    )

    def row(self):
        return [getattr(self, "m_p_hawking_mod" if c == "m_p_hawking_mod" else c) for c in self.CSV_COLUMNS]


def _one_minus_sq(x):
    return (1.0 - x) * (1.0 + x)


def level_record(solution: pot.PotentialSolution, t: float, r: float | None = None,
                 volume: float | None = None, alphas=ALPHA_DEFAULT) -> LevelSetRecord:
    metric = solution.metric
    p = solution.p
    if r is None:
        r = pot.level_radius(solution, t)
    val = pot.evaluate(solution, r)
    h = float(metric.area_radius(r))
    area = 4.0 * math.pi * h * h
    if r == metric.inner and metric.has_singular_inner:
        eta = 0.0
    else:
        eta = float(metric.mean_curvature_factor(r))
    H = 2.0 * eta / h
    g = val.grad_w
    psi = g * h / (3.0 - p)
    cap_t = math.exp(t) * solution.cap
    scale = cap_t ** (1.0 / (3.0 - p))
    if volume is None:
        volume = ms.volume(metric, metric.inner, r, rtol=1e-13) if r > metric.inner else 0.0

    m_h = 0.5 * h * _one_minus_sq(eta)
    m_p = 0.5 * scale * (_one_minus_sq(eta) + (psi - eta) ** 2)
    m_mod = scale * _one_minus_sq(psi) / (3.0 - p)
    try:
        scal = ms.scalar_curvature(metric, r)
    except Exception:
        scal = 0.0 if metric.is_warped and metric.has_singular_inner and r == metric.inner else float("nan")
    int_scal = 0.5 * scal * area
    deficit = area * ((psi - eta) / h) ** 2
    rhs = scale / ((3.0 - p) * 8.0 * math.pi) * (int_scal + (5.0 - p) / (p - 1.0) * deficit)

    al = _alphas(p, alphas)
    return LevelSetRecord(
        t=float(t), r=float(r), area=area, volume=volume, H=H, grad_w=g, cap=cap_t,
        eta=eta, psi=psi, m_hawking=m_h, m_p_hawking=m_p, m_p_hawking_mod=m_mod,
        m_iso_p=iso_p_quasilocal(volume, cap_t, p), m_iso=iso_quasilocal(volume, area),
        rhs_geroch=rhs, int_grad2=area * g * g, int_grad_h=area * g * H,
        willmore=area * H * H, int_scalar_half=int_scal, deficit=deficit,
        alpha_iso_p={a: alpha_iso_p(volume, cap_t, p, a) for a in al},
        alpha_iso={a: alpha_iso(volume, area, a) for a in al},
    )


def geroch_rhs(record: LevelSetRecord, metric: ms.MetricProfile, p: float) -> float:
    """Right-hand side of the p-Hawking monotonicity formula on a centered sphere."""
    scale = record.cap ** (1.0 / (3.0 - p))
    return scale / ((3.0 - p) * 8.0 * math.pi) * (record.int_scalar_half + (5.0 - p) / (p - 1.0) * record.deficit)


def cclt_quantity(record: LevelSetRecord, p: float) -> float:
    """``cap_t^(-1/(p-1)) (4 pi - int |grad w|^2 / (3-p)^2)``."""
    return record.cap ** (-1.0 / (p - 1.0)) * 4.0 * math.pi * _one_minus_sq(record.psi)


def cclt_rhs(record: LevelSetRecord, p: float) -> float:
    return -8.0 * math.pi / (p - 1.0) * record.cap ** (-2.0 / ((3.0 - p) * (p - 1.0))) * record.m_p_hawking


# ---------------------------------------------------------------------------
# series


def richardson3(xs, ys):
    """Quadratic extrapolation to ``x = 0`` and its gap to the linear fit of the last two points."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    full, _ = ms.richardson_limit(xs, ys)
    lin, _ = ms.richardson_limit(xs[-2:], ys[-2:])
    return float(full), float(abs(full - lin))


@dataclass
class MassSeries:
    p: float
    metric_name: str
    records: list
    ladder: tuple = ()
    limits: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(rec, name) for rec in self.records])

    @property
    def t(self) -> np.ndarray:
        return self.column("t")

    def ladder_records(self):
        return [self.records[i] for i in self.ladder]

    def limit(self, name: str, alpha: float | None = None):
        """``(estimate, residual)`` for ``t -> infinity`` from the three ladder levels."""
        key = (name, alpha)
        if key not in self.limits:
            recs = self.ladder_records()
            xs = [math.exp(-rec.t / (3.0 - self.p)) for rec in recs]
            if alpha is None:
                ys = [getattr(rec, name) for rec in recs]
            else:
                ys = [getattr(rec, name)[alpha] for rec in recs]
            self.limits[key] = richardson3(xs, ys)
        return self.limits[key]

    def rows(self):
        return [rec.row() for rec in self.records]


def default_t_grid(solution: pot.PotentialSolution, n: int = 121, r_max_factor: float = 1e4):
    """Uniform levels up to ``w(r_max_factor r0)`` plus the two ladder levels below it."""
    r_max = r_max_factor * solution.r0
    if r_max > solution.r_far:
        raise ValueError("r_max beyond the solution table")
    ladder_r = [r_max / 100.0, r_max / 10.0, r_max]
    ladder_t = [pot.evaluate(solution, r).w for r in ladder_r]
    grid = np.linspace(0.0, ladder_t[-1], n)
    return grid, ladder_t, ladder_r


def mass_series(solution: pot.PotentialSolution, t_grid=None, ladder=None, alphas=ALPHA_DEFAULT,
                metric_name: str | None = None) -> MassSeries:
    """One record per level; ``ladder`` is a list of ``(t, r)`` pairs used for limits."""
    if t_grid is None:
        t_grid, ladder_t, ladder_r = default_t_grid(solution)
        ladder = list(zip(ladder_t, ladder_r))
    levels = [(float(t), None) for t in t_grid]
    if ladder:
        levels += [(float(t), float(r)) for t, r in ladder]
    # sort by level, keep exact radii for ladder entries
    merged = {}
    for t, r in levels:
        if t not in merged or r is not None:
            merged[t] = r
    ts = sorted(merged)
    if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
        raise ValueError("levels must be strictly increasing")
    metric = solution.metric
    records = []
    vol = 0.0
    prev = metric.inner
    for t in ts:
        r = merged[t] if merged[t] is not None else pot.level_radius(solution, t)
        if r > prev:
            vol += ms.volume(metric, prev, r, rtol=1e-13)
            prev = r
        records.append(level_record(solution, t, r=r, volume=vol, alphas=alphas))
    idx = ()
    if ladder:
        idx = tuple(ts.index(float(t)) for t, _ in ladder)
    return MassSeries(p=solution.p, metric_name=metric_name or metric.name, records=records, ladder=idx)


def write_csv(series: MassSeries, path) -> None:
    rows = np.array(series.rows(), dtype=float)
    np.savetxt(path, rows, delimiter=",", fmt="%.17g", header=",".join(LevelSetRecord.CSV_COLUMNS),
               comments="", newline="\n")


def read_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
