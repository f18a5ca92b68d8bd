"""Scalar special functions, bracketed root finding and adaptive quadrature.

Only the standard library is used here; everything is a pure function of
its arguments.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable
from dataclasses import dataclass

from .errors import BracketError, ConvergenceError, DomainError, ValidationError

_EPS = 2.220446049250313e-16
_TINY = 1e-300


@dataclass(frozen=True)
class Tolerance:
    """Stopping rule shared by the iterative routines.

    Attributes:
        abs_tol: Absolute tolerance (residual for roots, error for integrals).
        rel_tol: Relative tolerance.
        max_iter: Iteration budget.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_iter: int = 200

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValidationError("tolerances must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValidationError("max_iter must be a positive integer")


DEFAULT_TOL = Tolerance()


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF."""
    if not math.isfinite(x):
        raise DomainError(f"std_normal_cdf needs a finite argument, got {x!r}")
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def std_normal_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _gamma_series(a: float, x: float, tol: Tolerance) -> float:
    # P(a, x) by the power series; converges fast for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(tol.max_iter * 5):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise ConvergenceError(f"incomplete gamma series did not converge (a={a}, x={x})")


def _gamma_continued_fraction(a: float, x: float, tol: Tolerance) -> float:
    # Q(a, x) by the Legendre continued fraction, modified Lentz evaluation
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, tol.max_iter * 5):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    raise ConvergenceError(f"incomplete gamma continued fraction did not converge (a={a}, x={x})")


def _check_gamma_args(a: float, x: float) -> None:
    if not (a > 0) or not math.isfinite(a):
        raise DomainError(f"incomplete gamma needs a > 0, got a={a!r}")
    if not (x >= 0):
        raise DomainError(f"incomplete gamma needs x >= 0, got x={x!r}")


def regularized_lower_gamma(a: float, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Regularized lower incomplete gamma function P(a, x).

    Series expansion below ``x = a + 1``, continued fraction above.
    """
    _check_gamma_args(a, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _gamma_series(a, x, tol))
    return max(0.0, 1.0 - _gamma_continued_fraction(a, x, tol))


def regularized_upper_gamma(a: float, x: float, tol: Tolerance = DEFAULT_TOL) -> float:
    """Q(a, x) = 1 - P(a, x), computed without cancellation in the upper tail."""
    _check_gamma_args(a, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _gamma_series(a, x, tol))
    return min(1.0, _gamma_continued_fraction(a, x, tol))


def chi2_cdf(x: float, df: float) -> float:
    if x <= 0:
        return 0.0
    return regularized_lower_gamma(df / 2.0, x / 2.0)


def chi2_sf(x: float, df: float) -> float:
    """Upper tail probability of the chi-square distribution with ``df`` degrees of freedom."""
    if x <= 0:
        return 1.0
    return regularized_upper_gamma(df / 2.0, x / 2.0)


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
) -> float:
    """Root of ``f`` inside ``[lo, hi]``.

    Illinois-modified regula falsi, falling back to bisection whenever a
    step fails to halve the bracket, so the bracket always shrinks at least
    as fast as plain bisection every second iteration.

    Raises:
        BracketError: ``f(lo)`` and ``f(hi)`` have the same sign.
        ConvergenceError: ``tol.max_iter`` iterations without meeting ``tol``.
    """
    if lo > hi:
        lo, hi = hi, lo
    a, b = float(lo), float(hi)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if math.isnan(fa) or math.isnan(fb) or (fa > 0) == (fb > 0):
        raise BracketError(f"no sign change on [{a}, {b}]: f(lo)={fa}, f(hi)={fb}")

    # ga, gb are the (possibly down-weighted) values used for the secant step
    ga, gb = fa, fb
    side = 0
    bisect_next = False
    prev_width = b - a
    for _ in range(tol.max_iter):
        mid = a + 0.5 * (b - a)
        if mid <= a or mid >= b:
            return a if abs(fa) <= abs(fb) else b
        x = mid
        if not bisect_next:
            x = (a * gb - b * ga) / (gb - ga)
            if not (a < x < b):
                x = mid
        fx = f(x)
        if fx == 0.0 or abs(fx) <= tol.abs_tol:
            return x
        if (fx > 0) == (fa > 0):
            a, fa, ga = x, fx, fx
            if side == -1:
                gb *= 0.5
            side = -1
        else:
            b, fb, gb = x, fx, fx
            if side == 1:
                ga *= 0.5
            side = 1
        width = b - a
        if width <= tol.rel_tol * abs(x) + tol.abs_tol:
            return a if abs(fa) <= abs(fb) else b
        bisect_next = width > 0.5 * prev_width
        prev_width = width
    raise ConvergenceError(f"find_root exceeded {tol.max_iter} iterations on [{lo}, {hi}]")


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: Tolerance = DEFAULT_TOL,
    points: Iterable[float] | None = None,
    panels: int = 8,
    max_depth: int = 60,
) -> float:
    """Adaptive Simpson quadrature of ``f`` over ``[lo, hi]``.

    The interval is first cut at ``points`` (discontinuities, narrow peaks)
    and into ``panels`` equal pieces so that features narrower than the
    interval are not stepped over. Subintervals narrower than ``2**-48`` of
    the range are accepted as they are, which bounds the error contributed
    by near-singular points (e.g. ``x ** 0.01`` at 0) by width times ``|f|``.

    Raises:
        ConvergenceError: recursion deeper than ``max_depth``.
    """
    if lo > hi:
        raise DomainError(f"integrate needs lo <= hi, got [{lo}, {hi}]")
    if lo == hi:
        return 0.0
    cuts = {lo, hi}
    step = (hi - lo) / panels
    cuts.update(lo + i * step for i in range(1, panels))
    if points is not None:
        cuts.update(p for p in points if lo < p < hi)
    edges = sorted(cuts)
    total_width = hi - lo
    min_width = total_width * 2.0**-48

    def simpson(a, fa, m, fm, b, fb):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def refine(a, fa, m, fm, b, fb, whole, eps, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(a, fa, lm, flm, m, fm)
        right = simpson(m, fm, rm, frm, b, fb)
        delta = left + right - whole
        if abs(delta) <= 15.0 * max(eps, 4 * _EPS * abs(left + right)) or b - a <= min_width or not (a < lm < m < rm < b):
            return left + right + delta / 15.0
        if depth >= max_depth:
            raise ConvergenceError(f"integrate exceeded subdivision depth {max_depth} near x={m}")
        return refine(a, fa, lm, flm, m, fm, left, eps / 2, depth + 1) + refine(
            m, fm, rm, frm, b, fb, right, eps / 2, depth + 1
        )

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        m = 0.5 * (a + b)
        fa, fm, fb = f(a), f(m), f(b)
        eps = tol.abs_tol * (b - a) / total_width
        total += refine(a, fa, m, fm, b, fb, simpson(a, fa, m, fm, b, fb), eps, 1)
    return total
