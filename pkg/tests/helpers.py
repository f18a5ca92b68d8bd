"""Independent oracles and random generators shared by the tests."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from kdecomp.data import Observation
from kdecomp.kernels import KernelFamily, KernelSpec
from kdecomp.numerics import Tolerance, integrate

DATA = Path(__file__).parent / "data"
TABLES = {
    "discount": DATA / "table1_discount.csv",
    "author": DATA / "table2_author.csv",
    "period": DATA / "table3_period.csv",
    "growth": DATA / "table4_growth.csv",
}
FAMILIES = list(KernelFamily)
QUAD = Tolerance(abs_tol=1e-10, rel_tol=1e-10)
# half-bandwidth panels so no feature is skipped by the initial Simpson rule
_PANELS = 200

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_argmax(f, lo, hi, iters=200):
    """Golden-section search for the maximiser of a unimodal ``f`` on ``[lo, hi]``."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a <= 1e-15 * max(1.0, abs(a)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def numeric_mode(spec: KernelSpec, points=4001):
    """Grid search over centre +- 10 bandwidths, then golden-section refinement."""
    lo = spec.center - 10 * spec.bandwidth
    if spec.family.positive_support:
        lo = max(lo, 0.0)
    hi = spec.center + 10 * spec.bandwidth
    grid = np.linspace(lo, hi, points)
    i = int(np.argmax(spec.pdf(grid)))
    step = grid[1] - grid[0]
    return golden_argmax(spec.pdf, max(lo, grid[i] - step), min(hi, grid[i] + step))


def support_bounds(spec: KernelSpec, margin=50.0):
    lo = 0.0 if spec.family.positive_support else spec.center - margin * spec.bandwidth
    return lo, spec.center + margin * spec.bandwidth


def quad_mass(spec: KernelSpec):
    lo, hi = support_bounds(spec)
    return integrate(spec.pdf, lo, hi, QUAD, points=[spec.center], panels=_PANELS)


def quad_moment(spec: KernelSpec, k, about=0.0):
    lo, hi = support_bounds(spec)
    return integrate(lambda x: (x - about) ** k * spec.pdf(x), lo, hi, QUAD, points=[spec.center], panels=_PANELS)


def random_spec(rng, family) -> KernelSpec:
    family = KernelFamily(family)
    if family.positive_support:
        center = rng.uniform(0.5, 100.0)
        return KernelSpec(family, center, center * rng.uniform(0.05, 3.0))
    return KernelSpec(family, rng.uniform(-100.0, 100.0), rng.uniform(0.1, 50.0))


def random_observations(rng, n, categories=("a", "b", "c"), positive_share=0.7, dimension="g"):
    """Gumbel-ish data with a mix of positive-only and unrestricted estimates."""
    values = rng.gumbel(30.0, 40.0, n)
    obs = []
    for i, v in enumerate(values):
        positive = bool(v > 0.5 and rng.random() < positive_share)
        cat = categories[int(rng.integers(len(categories)))]
        obs.append(Observation(float(v), f"P{int(rng.integers(max(2, n // 3)))}", {dimension: cat}, positive, i + 2))
    return obs


def composite_mass(density):
    lo, hi = density.support_hint()
    pts = list(density.centers)
    if any(k.spec.family.positive_support for k in density.kernels):
        pts.append(0.0)
    return integrate(density.pdf, lo, hi, Tolerance(1e-9, 1e-9), points=pts, panels=256)
