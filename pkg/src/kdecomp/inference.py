"""Quantile shares of decomposed densities and Pearson's equality-of-proportions test.

The composite density is cut at its ``p``-quantiles. Each component's
weighted mass inside each interval forms a share matrix; under the null
hypothesis every component contributes ``w_j / p`` to every interval.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .density import Decomposition, reaggregate
from .errors import DegenerateCategoryError, SchemaError, TestPreconditionError, ValidationError
from .numerics import chi2_sf

SHARE_TOL = 1e-9
# published tables are rounded to four decimals
TABLE_TOL = 5e-3
NULL_LABEL = "Null"
NULL_ULPS = 8


def _quantile_labels(p):
    return tuple(f"Q{k}" for k in range(1, p + 1))


@dataclass(frozen=True)
class ShareMatrix:
    """Probability mass of each weighted component in each quantile interval.

    Attributes:
        component_names: Component names, one per row of ``shares``.
        shares: ``m x p`` array; row ``j`` sums to ``null_weights[j]``.
        null_weights: Component weights ``w_j``; they sum to one.
        effective_n: Sample-size multiplier of the test statistic.
        cut_points: Interior quantiles of the composite, when known.
        tol: Tolerance for the row-sum and weight-sum checks.
    """

    component_names: tuple[str, ...]
    shares: np.ndarray
    null_weights: np.ndarray
    effective_n: float = 1.0
    cut_points: tuple[float, ...] | None = None
    quantile_labels: tuple[str, ...] | None = None
    tol: float = field(default=SHARE_TOL, repr=False)

    def __post_init__(self):
        shares = np.array(self.shares, dtype=float, ndmin=2)
        weights = np.array(self.null_weights, dtype=float).reshape(-1)
        names = tuple(str(n) for n in self.component_names)
        object.__setattr__(self, "shares", shares)
        object.__setattr__(self, "null_weights", weights)
        object.__setattr__(self, "component_names", names)
        m, p = shares.shape
        if len(names) != m or weights.size != m:
            raise ValidationError(f"{m} share rows but {len(names)} names and {weights.size} weights")
        labels = tuple(self.quantile_labels) if self.quantile_labels else _quantile_labels(p)
        if len(labels) != p:
            raise ValidationError(f"{p} share columns but {len(labels)} quantile labels")
        object.__setattr__(self, "quantile_labels", labels)
        if not np.all(np.isfinite(shares)) or np.any(shares < 0):
            raise ValidationError("shares must be finite and nonnegative")
        if np.any(weights < 0):
            raise ValidationError("null weights must be nonnegative")
        if abs(weights.sum() - 1.0) > self.tol:
            raise ValidationError(f"null weights sum to {weights.sum():.6g}, not 1")
        bad = np.flatnonzero(np.abs(shares.sum(axis=1) - weights) > self.tol)
        if bad.size:
            j = bad[0]
            raise ValidationError(
                f"shares of {names[j]!r} sum to {shares[j].sum():.6g} but its weight is {weights[j]:.6g}"
            )
        if not (self.effective_n > 0) or not math.isfinite(self.effective_n):
            raise ValidationError(f"effective_n must be positive, got {self.effective_n!r}")

    @property
    def m(self) -> int:
        return self.shares.shape[0]

    @property
    def p(self) -> int:
        return self.shares.shape[1]

    @property
    def expected(self) -> np.ndarray:
        """Null share of every cell, ``w_j / p``."""
        return np.repeat(self.null_weights[:, None] / self.p, self.p, axis=1)

    def with_effective_n(self, effective_n: float) -> ShareMatrix:
        return ShareMatrix(
            self.component_names, self.shares, self.null_weights, effective_n,
            self.cut_points, self.quantile_labels, self.tol,
        )

    def to_csv(self, orientation: str = "table", digits: int = 12) -> str:
        """Serialize with a trailing ``Null`` row (``w_j / p``).

        ``table`` puts quantiles in rows and components in columns, like the
        published tables; ``components`` puts one component per row and the
        null share in a trailing ``Null`` column.
        """
        fmt = f"{{:.{digits}g}}".format
        null = self.null_weights / self.p
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if orientation == "table":
            w.writerow(["", *self.component_names])
            for k, label in enumerate(self.quantile_labels):
                w.writerow([label, *(fmt(v) for v in self.shares[:, k])])
            w.writerow([NULL_LABEL, *(fmt(v) for v in null)])
        elif orientation == "components":
            w.writerow(["component", *self.quantile_labels, NULL_LABEL])
            for name, row, nv in zip(self.component_names, self.shares, null):
                w.writerow([name, *(fmt(v) for v in row), fmt(nv)])
        else:
            raise ValidationError(f"unknown orientation {orientation!r}")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, effective_n: float = 1.0, tol: float = TABLE_TOL) -> ShareMatrix:
        """Parse either orientation written by :meth:`to_csv`.

        The orientation is detected from where the ``Null`` marker sits:
        first column means quantiles in rows, header means components in rows.
        The default ``tol`` absorbs four-decimal rounding in published tables.
        """
        rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
        if len(rows) < 2:
            raise SchemaError("share matrix needs a header and at least one row")
        rows = [[c.strip() for c in r] for r in rows]
        header = rows[0]
        width = len(header)
        for i, r in enumerate(rows, 1):
            if len(r) != width:
                raise SchemaError(f"row {i} has {len(r)} fields, header has {width}")

        def num(cell, where):
            try:
                return float(cell)
            except ValueError:
                raise SchemaError(f"cannot parse share {cell!r} ({where})") from None

        body = rows[1:]
        first_col = [r[0].lower() for r in body]
        if NULL_LABEL.lower() in first_col:
            null_at = first_col.index(NULL_LABEL.lower())
            names = header[1:]
            qrows = [r for i, r in enumerate(body) if i != null_at]
            labels = [r[0] for r in qrows]
            shares = np.array([[num(c, f"{r[0]}") for c in r[1:]] for r in qrows]).T
            null = np.array([num(c, NULL_LABEL) for c in body[null_at][1:]])
        elif NULL_LABEL.lower() in [h.lower() for h in header]:
            null_at = [h.lower() for h in header].index(NULL_LABEL.lower())
            qcols = [i for i in range(1, width) if i != null_at]
            labels = [header[i] for i in qcols]
            names = [r[0] for r in body]
            shares = np.array([[num(r[i], r[0]) for i in qcols] for r in body])
            null = np.array([num(r[null_at], r[0]) for r in body])
        else:
            raise SchemaError(f"no {NULL_LABEL!r} row or column found in share matrix")
        p = shares.shape[1]
        return cls(tuple(names), shares, null * p, effective_n, None, tuple(labels), tol)

    @classmethod
    def read(cls, path: str | Path, effective_n: float = 1.0, tol: float = TABLE_TOL) -> ShareMatrix:
        return cls.from_csv(Path(path).read_text(encoding="utf-8-sig"), effective_n, tol)


@dataclass(frozen=True)
class TestResult:
    __test__ = False

    statistic: float
    dof: int
    p_value: float
    effective_n: float

    def __str__(self):
        return f"chi2({self.dof}) = {self.statistic:.4g}; p = {self.p_value:.3f}"


def _require_testable(m, p):
    if m < 2:
        raise TestPreconditionError(
            f"the equality-of-proportions test needs two components or more, got {m}: nothing to compare"
        )
    if p < 2:
        raise TestPreconditionError(
            f"the equality-of-proportions test needs two quantiles or more, got {p}: "
            "each component's total share equals its weight by construction"
        )


def share_matrix(d: Decomposition, p: int = 5, effective_n: float | None = None) -> ShareMatrix:
    """Shares of each weighted component between the composite's ``p``-quantiles.

    ``effective_n`` defaults to the number of observations behind ``d``.

    Raises:
        TestPreconditionError: fewer than two components or quantiles.
    """
    _require_testable(len(d), p)
    if effective_n is None:
        effective_n = sum(c.count for c in d.components)
        if effective_n <= 0:
            raise ValidationError("effective_n not given and the decomposition carries no observation counts")
    composite = reaggregate(d)
    cuts = [composite.quantile(k / p) for k in range(1, p)]
    shares = []
    for c in d.components:
        F = np.concatenate(([0.0], np.atleast_1d(c.density.cdf(np.array(cuts))), [1.0]))
        shares.append(np.maximum(c.weight * np.diff(F), 0.0))
    return ShareMatrix(tuple(d.names), np.array(shares), d.weights, float(effective_n), tuple(cuts))


def pearson_test(s: ShareMatrix) -> TestResult:
    """Pearson's chi-square test that every component's quantile shares equal ``w_j / p``.

    The statistic is ``n * sum_jk (s_jk - w_j/p)**2 / (w_j/p)`` with
    ``(m - 1)(p - 1)`` degrees of freedom.

    Raises:
        TestPreconditionError: fewer than two components or quantiles.
        DegenerateCategoryError: a component has zero weight.
    """
    _require_testable(s.m, s.p)
    zero = np.flatnonzero(s.null_weights <= 0)
    if zero.size:
        raise DegenerateCategoryError(f"component {s.component_names[zero[0]]!r} has zero weight")
    expected = s.expected
    deviation = s.shares - expected
    # shares equal to the null up to rounding (e.g. w * 0.2 vs w / 5) count as equal
    deviation[np.abs(deviation) <= NULL_ULPS * np.finfo(float).eps * expected] = 0.0
    statistic = s.effective_n * float(np.sum(deviation**2 / expected))
    dof = (s.m - 1) * (s.p - 1)
    return TestResult(statistic, dof, chi2_sf(statistic, dof), s.effective_n)


def test_decomposition(d: Decomposition, p: int = 5, effective_n: float | None = None) -> TestResult:
    return pearson_test(share_matrix(d, p, effective_n))


test_decomposition.__test__ = False


def statistic_ratios(matrices: Sequence[ShareMatrix]) -> list[float]:
    """Test statistics relative to the first; independent of ``effective_n``."""
    stats = [pearson_test(s.with_effective_n(1.0)).statistic for s in matrices]
    return [x / stats[0] for x in stats]
