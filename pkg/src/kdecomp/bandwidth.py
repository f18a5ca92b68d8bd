"""Bandwidth selection rules."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

from .errors import DegenerateDataError, ValidationError

SILVERMAN_FACTOR = 1.06


@dataclass(frozen=True)
class BandwidthRule:
    """One of ``silverman``, ``sd`` (sample standard deviation) or ``fixed``."""

    kind: str
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("silverman", "sd", "fixed"):
            raise ValidationError(f"unknown bandwidth rule {self.kind!r}")
        if self.kind == "fixed":
            if self.value is None or not (self.value > 0) or not math.isfinite(self.value):
                raise ValidationError(f"fixed bandwidth must be positive and finite, got {self.value!r}")
        elif self.value is not None:
            raise ValidationError(f"{self.kind} bandwidth takes no value")

    @classmethod
    def silverman(cls) -> BandwidthRule:
        return cls("silverman")

    @classmethod
    def sample_std(cls) -> BandwidthRule:
        return cls("sd")

    @classmethod
    def fixed(cls, value: float) -> BandwidthRule:
        return cls("fixed", float(value))

    @classmethod
    def parse(cls, text: str) -> BandwidthRule:
        """Parse ``silverman``, ``sd`` or ``fixed=V``."""
        text = text.strip().lower()
        if text.startswith("fixed"):
            _, sep, value = text.partition("=")
            try:
                return cls.fixed(float(value)) if sep else cls("fixed")
            except ValueError:
                raise ValidationError(f"bad fixed bandwidth {text!r}") from None
        return cls(text)

    def __str__(self):
        return f"fixed={self.value:g}" if self.kind == "fixed" else self.kind

    def __call__(self, values, weights=None) -> float:
        return bandwidth(self, values, weights)


def weighted_std(values: Sequence[float], weights: Sequence[float] | None = None) -> float:
    """Sample standard deviation with the n - 1 denominator.

    ``weights`` are frequency weights rescaled to sum to ``len(values)``,
    so equal weights give the ordinary sample standard deviation.
    """
    n = len(values)
    if n < 2:
        raise ValidationError(f"sample standard deviation needs at least 2 values, got {n}")
    if weights is None:
        w = [1.0] * n
    else:
        if len(weights) != n:
            raise ValidationError("values and weights differ in length")
        total = math.fsum(weights)
        if not total > 0:
            raise ValidationError("weights must have a positive sum")
        w = [n * wi / total for wi in weights]
    mean = math.fsum(wi * x for wi, x in zip(w, values)) / n
    ss = math.fsum(wi * (x - mean) ** 2 for wi, x in zip(w, values))
    return math.sqrt(ss / (n - 1))


def bandwidth(rule: BandwidthRule, values: Sequence[float], weights: Sequence[float] | None = None) -> float:
    """Apply ``rule`` to ``values``.

    Silverman gives ``1.06 * s * n ** (-1/5)``, ``sd`` gives ``s`` and
    ``fixed`` returns its value regardless of the data.

    Raises:
        ValidationError: fewer than two values for a data-driven rule.
        DegenerateDataError: the values have zero spread.
    """
    if rule.kind == "fixed":
        return rule.value
    values = [float(v) for v in values]
    s = weighted_std(values, weights)
    # tolerate rounding noise in a constant sample
    scale = max(abs(v) for v in values)
    if s == 0.0 or s <= 1e-14 * scale:
        raise DegenerateDataError(f"{rule.kind} bandwidth undefined: all {len(values)} values are equal")
    if rule.kind == "sd":
        return s
    return SILVERMAN_FACTOR * s * len(values) ** -0.2
