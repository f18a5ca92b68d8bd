"""Composite kernel densities and their decomposition by category.

A composite density is a weighted sum of kernels. Splitting the
observations by a categorical label and fitting each subset with the same
kernels and bandwidth gives component densities whose weighted sum is
exactly the density of the whole sample. With per-component bandwidths
(or any other weights) the sum is still a density, just a different one.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bandwidth import BandwidthRule
from .data import Observation, vote_weights
from .errors import DomainError, ValidationError
from .kernels import CDF, PDF, KernelFamily, KernelSpec
from .numerics import Tolerance, find_root

WEIGHT_SUM_TOL = 1e-12
QUANTILE_MARGIN = 50.0
QUANTILE_EXPANSIONS = 4
QUANTILE_TOL = Tolerance(abs_tol=1e-12, rel_tol=1e-15, max_iter=500)
_CHUNK = 256

KERNEL_SCHEMES = ("normal", "knotted", "gumbel", "weibull", "weibull-gumbel")
KernelScheme = Callable[[Observation], KernelFamily]


def resolve_kernel_scheme(name: str | KernelScheme) -> KernelScheme:
    """Per-observation kernel family rule.

    ``weibull-gumbel`` gives Weibull kernels to positive-only observations
    and Gumbel kernels to the rest; the other names use one family for all.
    """
    if callable(name):
        return name
    if name == "weibull-gumbel":
        return lambda obs: KernelFamily.WEIBULL if obs.positive_only else KernelFamily.GUMBEL
    family = KernelFamily.parse(name)
    return lambda obs: family


@dataclass(frozen=True)
class WeightedKernel:
    spec: KernelSpec
    weight: float

    def __post_init__(self):
        if not (self.weight >= 0) or not math.isfinite(self.weight):
            raise ValidationError(f"kernel weight must be nonnegative, got {self.weight!r}")


def _check_weight_sum(weights, what):
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise ValidationError(f"{what} weights sum to {total!r}, not 1")


@dataclass(frozen=True)
class CompositeDensity:
    """Weighted mixture of kernels; weights sum to one."""

    kernels: tuple[WeightedKernel, ...]

    def __post_init__(self):
        object.__setattr__(self, "kernels", tuple(self.kernels))
        if not self.kernels:
            raise ValidationError("a composite density needs at least one kernel")
        _check_weight_sum([k.weight for k in self.kernels], "kernel")

    def __len__(self):
        return len(self.kernels)

    @cached_property
    def _packed(self):
        groups = {}
        for k in self.kernels:
            groups.setdefault(k.spec.family, []).append((*k.spec.params, k.weight))
        return [(fam, np.array(rows, dtype=float).T) for fam, rows in groups.items()]

    def _evaluate(self, table, x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1)
        out = np.zeros(flat.shape)
        for fam, (a, b, w) in self._packed:
            fn = table[fam]
            for start in range(0, flat.size, _CHUNK):
                xs = flat[start : start + _CHUNK, None]
                out[start : start + _CHUNK] += fn(xs, a, b) @ w
        out = out.reshape(x.shape)
        return float(out) if out.ndim == 0 else out

    def pdf(self, x):
        return self._evaluate(PDF, x)

    def cdf(self, x):
        out = self._evaluate(CDF, x)
        return min(max(out, 0.0), 1.0) if isinstance(out, float) else np.clip(out, 0.0, 1.0)

    @property
    def centers(self) -> np.ndarray:
        return np.array([k.spec.center for k in self.kernels])

    @property
    def max_bandwidth(self) -> float:
        return max(k.spec.bandwidth for k in self.kernels)

    def support_hint(self, margin: float = QUANTILE_MARGIN) -> tuple[float, float]:
        """Interval holding essentially all the mass: centers +- ``margin`` bandwidths."""
        c = self.centers
        h = self.max_bandwidth
        lo = float(c.min()) - margin * h
        if all(k.spec.family.positive_support for k in self.kernels):
            lo = max(lo, 0.0)
        return lo, float(c.max()) + margin * h

    def quantile(self, q: float) -> float:
        """Inverse CDF by bracketed root finding.

        The bracket starts at the extreme centers +- 50 bandwidths and the
        margin doubles up to four times if it does not contain ``q``.
        """
        if not (0.0 < q < 1.0):
            raise DomainError(f"quantile level must lie in (0, 1), got {q!r}")
        c = self.centers
        h = self.max_bandwidth
        margin = QUANTILE_MARGIN
        for _ in range(QUANTILE_EXPANSIONS + 1):
            lo, hi = float(c.min()) - margin * h, float(c.max()) + margin * h
            if self.cdf(lo) <= q <= self.cdf(hi):
                return find_root(lambda x: self.cdf(x) - q, lo, hi, QUANTILE_TOL)
            margin *= 2
        raise DomainError(f"quantile {q} lies outside [{lo:g}, {hi:g}] even after widening the bracket")


def fit(
    observations: Sequence[Observation],
    kernel_scheme: str | KernelScheme = "weibull-gumbel",
    bandwidth: float = 1.0,
    weights: Sequence[float] | None = None,
) -> CompositeDensity:
    """Kernel density of ``observations``: one kernel centred on each value.

    Args:
        observations: The data.
        kernel_scheme: Family name or a function from observation to family.
        bandwidth: Shared kernel bandwidth.
        weights: Per-observation weights summing to one; equal by default.

    Raises:
        ValidationError: empty input, bad weights, or an observation that
            its kernel family cannot be centred on (message names the line).
    """
    if not observations:
        raise ValidationError("cannot fit a density to zero observations")
    if weights is None:
        weights = [1.0 / len(observations)] * len(observations)
    if len(weights) != len(observations):
        raise ValidationError(f"{len(weights)} weights for {len(observations)} observations")
    _check_weight_sum(weights, "observation")
    rule = resolve_kernel_scheme(kernel_scheme)
    kernels = []
    for obs, w in zip(observations, weights):
        family = rule(obs)
        if obs.positive_only and not obs.value > 0:
            raise ValidationError(f"{obs.where()}: positive-only observation has nonpositive value {obs.value:g}")
        try:
            spec = KernelSpec(family, obs.value, bandwidth)
        except ValidationError as exc:
            raise type(exc)(f"{obs.where()} (value {obs.value:g}): {exc}") from None
        kernels.append(WeightedKernel(spec, float(w)))
    return CompositeDensity(tuple(kernels))


@dataclass(frozen=True)
class Component:
    name: str
    density: CompositeDensity
    weight: float
    count: int = 0
    bandwidth: float | None = None


@dataclass(frozen=True)
class Decomposition:
    """Ordered components whose weights sum to one."""

    components: tuple[Component, ...]

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValidationError("a decomposition needs at least one component")
        for c in self.components:
            if not (c.weight >= 0):
                raise ValidationError(f"component {c.name!r} has negative weight {c.weight!r}")
        _check_weight_sum([c.weight for c in self.components], "component")

    @classmethod
    def mixture(cls, parts: Sequence[tuple[str, CompositeDensity, float]]) -> Decomposition:
        """Arbitrary densities with arbitrary weights summing to one."""
        return cls(tuple(Component(name, dens, float(w)) for name, dens, w in parts))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.components]

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    def __len__(self):
        return len(self.components)

    def weighted_pdf(self, index: int, x):
        c = self.components[index]
        return c.weight * c.density.pdf(x)

    def pdf(self, x):
        """Sum of weighted component densities, evaluated component by component."""
        return sum(c.weight * c.density.pdf(x) for c in self.components)

    def cdf(self, x):
        return sum(c.weight * c.density.cdf(x) for c in self.components)


def reaggregate(d: Decomposition) -> CompositeDensity:
    """The composite density ``sum_j w_j f_j`` as a single kernel mixture."""
    kernels = [
        WeightedKernel(k.spec, c.weight * k.weight) for c in d.components for k in c.density.kernels
    ]
    return CompositeDensity(tuple(kernels))


def _observation_weights(observations, weighting):
    if isinstance(weighting, str):
        return vote_weights(observations, weighting)
    weights = [float(w) for w in weighting]
    if len(weights) != len(observations):
        raise ValidationError(f"{len(weights)} weights for {len(observations)} observations")
    _check_weight_sum(weights, "observation")
    return weights


def decompose(
    observations: Sequence[Observation],
    dimension: str,
    kernel_scheme: str | KernelScheme = "weibull-gumbel",
    bandwidth_rule: BandwidthRule | None = None,
    weighting: str | Sequence[float] = "estimate",
    per_component: bool = False,
    order: Sequence[str] | None = None,
) -> Decomposition:
    """Split the kernel density of ``observations`` by the ``dimension`` label.

    Each component is fitted to its own observations with their weights
    renormalised, and carries the category's share of the total weight.
    With a global bandwidth (the default), the weighted components add up
    to ``fit`` on the full sample; ``per_component=True`` applies the
    bandwidth rule within each category instead.

    Args:
        observations: Data, each labelled in ``dimension``.
        dimension: Label to split on.
        kernel_scheme: Family name or rule, shared by all components.
        bandwidth_rule: Defaults to Silverman.
        weighting: ``"estimate"``, ``"paper"`` or explicit weights.
        per_component: Bandwidth per component rather than global.
        order: Preferred component order; unseen categories are dropped,
            unlisted ones follow in first-seen order.
    """
    if not observations:
        raise ValidationError("cannot decompose zero observations")
    rule = bandwidth_rule or BandwidthRule.silverman()
    weights = _observation_weights(observations, weighting)
    groups: dict[str, list[int]] = {}
    for i, obs in enumerate(observations):
        cat = obs.labels.get(dimension)
        if cat is None:
            raise ValidationError(f"{obs.where()}: missing {dimension!r} label")
        groups.setdefault(cat, []).append(i)
    names = [c for c in (order or ()) if c in groups]
    names += [c for c in groups if c not in names]

    h_global = None if per_component else rule([o.value for o in observations], weights)
    components = []
    for name in names:
        idx = groups[name]
        obs = [observations[i] for i in idx]
        w = [weights[i] for i in idx]
        total = math.fsum(w)
        if total <= 0:
            raise ValidationError(f"component {name!r} has zero total weight")
        local = [wi / total for wi in w]
        h = h_global if h_global is not None else rule([o.value for o in obs], local)
        dens = fit(obs, kernel_scheme, h, local)
        components.append(Component(name, dens, total, len(obs), h))
    return Decomposition(tuple(components))

