"""Mode-centred kernel families.

Each kernel is a probability density parameterised by a *center*, which
is always the mode of the density, and a *bandwidth*, its spread:

* ``normal``: mean = center, sd = bandwidth.
* ``knotted``: Normal(center, bandwidth) truncated to ``[0, inf)`` and
  renormalised; the mode stays at center for center > 0.
* ``gumbel``: right-skewed, location = center, scale chosen so the sd
  equals the bandwidth.
* ``weibull``: right-skewed on ``[0, inf)``, shape and scale solved so the
  mode equals center and the sd equals the bandwidth.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import BracketError, ParameterizationError, ValidationError
from .numerics import Tolerance, find_root

GUMBEL_SCALE_PER_SD = math.sqrt(6.0) / math.pi
WEIBULL_SHAPE_BRACKET = (1.0 + 1e-9, 500.0)

_SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_erfc = np.vectorize(math.erfc, otypes=[float])


class KernelFamily(str, enum.Enum):
    NORMAL = "normal"
    KNOTTED_NORMAL = "knotted"
    GUMBEL = "gumbel"
    WEIBULL = "weibull"

    @property
    def positive_support(self) -> bool:
        return self in (KernelFamily.KNOTTED_NORMAL, KernelFamily.WEIBULL)

    @classmethod
    def parse(cls, name: str | KernelFamily) -> KernelFamily:
        if isinstance(name, KernelFamily):
            return name
        try:
            return cls(name.strip().lower())
        except ValueError:
            choices = ", ".join(f.value for f in cls)
            raise ValidationError(f"unknown kernel family {name!r} (choose from {choices})") from None


class KernelParams(NamedTuple):
    """Natural parameters of a realized kernel.

    ``first``/``second`` are (mean, sd) for normal and knotted,
    (location, scale) for gumbel and (shape, scale) for weibull.
    """

    first: float
    second: float


# ---------------------------------------------------------------------------
# Vectorised densities. Arguments broadcast against each other.


def _upper_normal_tail(z):
    return 0.5 * _erfc(np.asarray(z, dtype=float) / _SQRT2)


def _normal_pdf(x, mean, sd):
    z = (x - mean) / sd
    return np.exp(-0.5 * z * z - _LOG_SQRT_2PI) / sd


def _normal_cdf(x, mean, sd):
    return _upper_normal_tail(-(x - mean) / sd)


def _knotted_pdf(x, mean, sd):
    mass = _upper_normal_tail(-mean / sd)
    return np.where(x >= 0, _normal_pdf(x, mean, sd) / mass, 0.0)


def _knotted_cdf(x, mean, sd):
    mass = _upper_normal_tail(-mean / sd)
    # 1 - Q(z)/Q(z0) keeps precision in the right tail
    inside = 1.0 - _upper_normal_tail((np.maximum(x, 0.0) - mean) / sd) / mass
    return np.where(x > 0, np.clip(inside, 0.0, 1.0), 0.0)


def _gumbel_pdf(x, loc, scale):
    z = (x - loc) / scale
    with np.errstate(over="ignore"):
        return np.exp(-z - np.exp(-z)) / scale


def _gumbel_cdf(x, loc, scale):
    z = (x - loc) / scale
    with np.errstate(over="ignore"):
        return np.exp(-np.exp(-z))


def _weibull_pdf(x, shape, scale):
    t = np.maximum(x, 0.0) / scale
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logpdf = np.log(shape / scale) + (shape - 1.0) * np.log(t) - t**shape
        out = np.exp(logpdf)
    return np.where(x > 0, out, 0.0)


def _weibull_cdf(x, shape, scale):
    t = np.maximum(x, 0.0) / scale
    with np.errstate(over="ignore"):
        return np.where(x > 0, -np.expm1(-(t**shape)), 0.0)


PDF = {
    KernelFamily.NORMAL: _normal_pdf,
    KernelFamily.KNOTTED_NORMAL: _knotted_pdf,
    KernelFamily.GUMBEL: _gumbel_pdf,
    KernelFamily.WEIBULL: _weibull_pdf,
}
CDF = {
    KernelFamily.NORMAL: _normal_cdf,
    KernelFamily.KNOTTED_NORMAL: _knotted_cdf,
    KernelFamily.GUMBEL: _gumbel_cdf,
    KernelFamily.WEIBULL: _weibull_cdf,
}


# ---------------------------------------------------------------------------
# Parameter realisation


def _weibull_log_sd_over_mode(shape: float) -> float:
    var_over_scale2 = math.exp(math.lgamma(1.0 + 2.0 / shape)) - math.exp(2.0 * math.lgamma(1.0 + 1.0 / shape))
    return 0.5 * math.log(var_over_scale2) - math.log1p(-1.0 / shape) / shape


def weibull_mode_factor(shape: float) -> float:
    """Mode of a unit-scale Weibull, ``((k - 1) / k) ** (1 / k)``."""
    return math.exp(math.log1p(-1.0 / shape) / shape)


_WEIBULL_TOL = Tolerance(abs_tol=1e-14, rel_tol=1e-15, max_iter=400)


@functools.lru_cache(maxsize=1 << 16)
def _solve_weibull(center: float, bandwidth: float) -> KernelParams:
    target = math.log(bandwidth / center)
    lo, hi = WEIBULL_SHAPE_BRACKET
    try:
        shape = find_root(lambda k: _weibull_log_sd_over_mode(k) - target, lo, hi, _WEIBULL_TOL)
    except BracketError:
        ratio = bandwidth / center
        if target > _weibull_log_sd_over_mode(lo):
            why = "center too close to 0 relative to the bandwidth"
        else:
            why = f"shape would exceed {hi:g}; center too large relative to the bandwidth"
        raise ParameterizationError(
            f"no Weibull kernel with mode {center:g} and sd {bandwidth:g} "
            f"(sd/mode = {ratio:.4g}): {why}"
        ) from None
    return KernelParams(shape, center / weibull_mode_factor(shape))


def realize_parameters(family: KernelFamily | str, center: float, bandwidth: float) -> KernelParams:
    """Natural parameters putting the mode at ``center`` with spread ``bandwidth``.

    Raises:
        ValidationError: bandwidth not positive, non-finite center, or a
            positive-support family with ``center <= 0``.
        ParameterizationError: no Weibull shape in the search bracket.
    """
    family = KernelFamily.parse(family)
    if not math.isfinite(center):
        raise ValidationError(f"kernel center must be finite, got {center!r}")
    if not (bandwidth > 0) or not math.isfinite(bandwidth):
        raise ValidationError(f"bandwidth must be positive and finite, got {bandwidth!r}")
    if family.positive_support and not center > 0:
        raise ValidationError(f"{family.value} kernel has positive support and needs center > 0, got {center!r}")
    if family is KernelFamily.GUMBEL:
        return KernelParams(center, bandwidth * GUMBEL_SCALE_PER_SD)
    if family is KernelFamily.WEIBULL:
        return _solve_weibull(center, bandwidth)
    return KernelParams(center, bandwidth)


@dataclass(frozen=True)
class KernelSpec:
    """A single kernel: family, center (mode) and bandwidth (spread)."""

    family: KernelFamily
    center: float
    bandwidth: float
    params: KernelParams = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        family = KernelFamily.parse(self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "center", float(self.center))
        object.__setattr__(self, "bandwidth", float(self.bandwidth))
        object.__setattr__(self, "params", realize_parameters(family, self.center, self.bandwidth))

    @property
    def mode(self) -> float:
        return self.center

    @property
    def support(self) -> tuple[float, float]:
        return (0.0 if self.family.positive_support else -math.inf, math.inf)

    def pdf(self, x):
        out = PDF[self.family](np.asarray(x, dtype=float), *self.params)
        return float(out) if np.ndim(out) == 0 else out

    def cdf(self, x):
        out = CDF[self.family](np.asarray(x, dtype=float), *self.params)
        return float(out) if np.ndim(out) == 0 else out

    def mean(self) -> float:
        a, b = self.params
        if self.family is KernelFamily.NORMAL:
            return a
        if self.family is KernelFamily.GUMBEL:
            return a + b * 0.5772156649015329
        if self.family is KernelFamily.WEIBULL:
            return b * math.gamma(1.0 + 1.0 / a)
        alpha = -a / b
        return a + b * _normal_pdf(alpha, 0.0, 1.0) / float(_upper_normal_tail(alpha))

    def std(self) -> float:
        """Standard deviation of the realized density.

        Equals the bandwidth except for the knotted Normal, where the
        bandwidth is the sd before truncation.
        """
        a, b = self.params
        if self.family is not KernelFamily.KNOTTED_NORMAL:
            return self.bandwidth
        alpha = -a / b
        lam = _normal_pdf(alpha, 0.0, 1.0) / float(_upper_normal_tail(alpha))
        return b * math.sqrt(1.0 + alpha * lam - lam * lam)


def kernel_pdf(spec: KernelSpec, x):
    return spec.pdf(x)


def kernel_cdf(spec: KernelSpec, x):
    return spec.cdf(x)
