"""Log-Gamma and the Gauss hypergeometric family ``2F1(1/2, b, b+1; z)``.

The family arises from the exponent ``p`` through ``b = (3-p)/(p-1)`` and
``c = 2/(p-1) = b + 1``, so ``c - a - b = 1/2`` and the series converges at
``z = 1`` with a square-root singular tail.  Everything here is written with
elementary functions only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ArgumentOutOfRange, ParameterOutOfFamily, RadiusOutOfDomain

P_MIN = 1.05
P_MAX = 2.95

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_ln_gamma(x: float) -> float:
    # valid for x >= 0.5
    x -= 1.0
    acc = _LANCZOS[0]
    for k in range(1, 9):
        acc += _LANCZOS[k] / (x + k)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(acc)


# Stirling series coefficients B_{2k} / (2k (2k-1))
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)


def _stirling_ln_gamma(x: float) -> float:
    # accurate to double precision for x >= 10
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for coef in _STIRLING:
        series += coef * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + _HALF_LOG_2PI + series


_EULER_GAMMA = 0.57721566490153286061


def _zeta_table(kmax=80, n=1000):
    # zeta(k) for k >= 2 by direct summation plus an Euler-Maclaurin tail
    out = {2: math.pi ** 2 / 6.0, 3: 1.2020569031595942854}
    for k in range(4, kmax + 1):
        head = math.fsum(j ** -float(k) for j in range(1, n))
        tail = n ** (1.0 - k) / (k - 1.0) + 0.5 * n ** -float(k) + k * n ** (-k - 1.0) / 12.0
        out[k] = head + tail
    return out


_ZETA = _zeta_table()


def _ln_gamma_one_plus(eps: float) -> float:
    # ln Gamma(1 + eps) = -gamma eps + sum_{k>=2} (-1)^k zeta(k) eps^k / k, |eps| <= 1/2
    terms = [-_EULER_GAMMA * eps]
    power = eps
    for k in range(2, len(_ZETA) + 2):
        power *= eps
        term = (-1) ** k * _ZETA[k] * power / k
        terms.append(term)
        if abs(term) < 1e-18 * abs(eps):
            break
    return math.fsum(terms)


def ln_gamma(x: float) -> float:
    """``ln Gamma(x)`` for ``x > 0``.

    Near the roots at 1 and 2 a zeta-value Taylor series is used.  Elsewhere,
    arguments below 10 are shifted up with ``Gamma(x+1) = x Gamma(x)`` and
    evaluated with the Stirling series.
    """
    x = float(x)
    if not x > 0 or not math.isfinite(x):
        raise ArgumentOutOfRange(f"ln_gamma needs a positive finite argument, got {x}")
    if x == 1.0 or x == 2.0:
        return 0.0
    # near the roots at 1 and 2 use the zeta series to keep relative accuracy
    if 0.5 <= x <= 1.5:
        return _ln_gamma_one_plus(x - 1.0)
    if 1.5 < x <= 2.5:
        return _ln_gamma_one_plus(x - 2.0) + math.log1p(x - 2.0)
    if x >= 10.0:
        return _stirling_ln_gamma(x)
    shift = 0
    prod = 1.0
    y = x
    while y < 10.0:
        prod *= y
        y += 1.0
        shift += 1
    return _stirling_ln_gamma(y) - math.log(prod)


def lanczos_ln_gamma(x: float) -> float:
    """Lanczos (g = 7, n = 9) approximation, kept as an independent cross-check."""
    x = float(x)
    if not x > 0:
        raise ArgumentOutOfRange(f"ln_gamma needs a positive argument, got {x}")
    if x < 0.5:
        return math.log(math.pi / abs(math.sin(math.pi * x))) - _lanczos_ln_gamma(1.0 - x)
    return _lanczos_ln_gamma(x)


@dataclass(frozen=True)
class HyperParams:
    """``2F1(a, b, c; z)`` with ``a = 1/2``, ``b = (3-p)/(p-1)``, ``c = 2/(p-1)``."""

    p: float
    z: float

    def __post_init__(self):
        check_exponent(self.p)
        if not 0.0 <= self.z <= 1.0:
            raise ArgumentOutOfRange(f"hypergeometric argument {self.z} outside [0, 1]")

    @property
    def a(self) -> float:
        return 0.5

    @property
    def b(self) -> float:
        return (3.0 - self.p) / (self.p - 1.0)

    @property
    def c(self) -> float:
        return 2.0 / (self.p - 1.0)


def check_exponent(p: float) -> float:
    p = float(p)
    if not P_MIN - 1e-12 <= p <= P_MAX + 1e-12:
        raise ParameterOutOfFamily(f"exponent p = {p} outside [{P_MIN}, {P_MAX}]")
    return p


def hyp_series(a: float, b: float, c: float, z: float, max_terms: int = 1_000_000) -> float:
    """Plain Gauss series, summed until the term drops below 1e-16 of the sum."""
    total = 1.0
    term = 1.0
    for n in range(max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if abs(term) <= 1e-16 * abs(total):
            return total
    raise ArithmeticError("hypergeometric series did not converge")


def gauss_summation(b: float) -> float:
    """``2F1(1/2, b, b+1; 1) = sqrt(pi) Gamma(b+1) / Gamma(b+1/2)``."""
    return math.exp(0.5 * math.log(math.pi) + ln_gamma(b + 1.0) - ln_gamma(b + 0.5))


def _euler_switch(b: float) -> float:
    # the Euler-transformed series has ratio ~ z, so its length grows like 1/(1-z);
    # past this point the connection formula about z = 1 is cheaper and as accurate
    return max(1.0 - 1.0 / (2.0 * max(b, 1.0)), 0.9)


def _near_one(b: float, z: float) -> float:
    # connection formula for c - a - b = 1/2:
    # F = G z^{-b} - 2b sqrt(1-z) 2F1(b+1/2, 1; 3/2; 1-z)
    y = 1.0 - z
    rest = hyp_series(b + 0.5, 1.0, 1.5, y)
    return gauss_summation(b) * z ** (-b) - 2.0 * b * math.sqrt(y) * rest


def hyp2f1_family(b: float, z: float) -> float:
    """``2F1(1/2, b, b+1; z)`` for ``b > 0`` and ``0 <= z <= 1``."""
    if not 0.0 <= z <= 1.0:
        raise ArgumentOutOfRange(f"hypergeometric argument {z} outside [0, 1]")
    if z == 0.0:
        return 1.0
    if z == 1.0:
        return gauss_summation(b)
    if z <= 0.5:
        return hyp_series(0.5, b, b + 1.0, z)
    if z <= _euler_switch(b):
        # Euler: (1-z)^{c-a-b} 2F1(c-a, c-b, c; z) with c-a = b+1/2, c-b = 1
        return math.sqrt(1.0 - z) * hyp_series(b + 0.5, 1.0, b + 1.0, z)
    return _near_one(b, z)


def gauss_2f1(params: HyperParams) -> float:
    return hyp2f1_family(params.b, params.z)


def schwarzschild_capacity(m: float, r0: float, p: float) -> float:
    """Normalized p-capacity of the sphere of area radius ``r0`` in Schwarzschild of mass ``m``."""
    p = check_exponent(p)
    if m < 0:
        raise ValueError("mass must be nonnegative")
    if r0 < 2.0 * m or r0 <= 0:
        raise RadiusOutOfDomain(f"r0 = {r0} is inside the horizon 2m = {2 * m}")
    z = min(2.0 * m / r0, 1.0)
    hp = HyperParams(p, z)
    return r0 ** (3.0 - p) * gauss_2f1(hp) ** (-(p - 1.0))


def horizon_gradient_factor(p: float) -> float:
    """``sqrt(pi) Gamma(2/(p-1)) / Gamma(2/(p-1) - 1/2)``, the value ``2F1(...; 1)``."""
    p = check_exponent(p)
    return gauss_summation((3.0 - p) / (p - 1.0))


def penrose_deficit(p: float) -> float:
    """Ratio ``cap_p(horizon)^{1/(3-p)} / (2m)`` on Schwarzschild."""
    return horizon_gradient_factor(p) ** (-(p - 1.0) / (3.0 - p))
