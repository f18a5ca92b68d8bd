"""Observation ingestion, category binnings and vote weights."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
from collections import Counter
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .errors import BinningError, RowError, SchemaError, ValidationError

log = logging.getLogger(__name__)

WEIGHTING_SCHEMES = ("estimate", "paper")


@dataclass(frozen=True)
class Observation:
    """One estimate.

    Attributes:
        value: The estimate itself.
        paper_id: Identifier of the source publication.
        labels: Category name per dimension, e.g. ``{"prtp": "3.0"}``.
        positive_only: The estimate excludes negative outcomes, so it gets
            a positive-support kernel under the default scheme.
        line: Source line in the input file, for error messages.
    """

    value: float
    paper_id: str | None = None
    labels: Mapping[str, str] = field(default_factory=dict)
    positive_only: bool = False
    line: int | None = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValidationError(f"{self.where()}: value must be finite, got {self.value!r}")
        if self.positive_only and not self.value > 0:
            raise ValidationError(f"{self.where()}: positive-only observation has nonpositive value {self.value!r}")

    def where(self) -> str:
        return f"line {self.line}" if self.line is not None else "observation"

    def with_label(self, dimension: str, category: str) -> Observation:
        return dataclasses.replace(self, labels={**self.labels, dimension: category})


@dataclass(frozen=True)
class DatasetSchema:
    value_column: str = "value"
    paper_id_column: str | None = "paper"
    label_columns: Mapping[str, str] = field(default_factory=dict)
    positive_only_column: str | None = None
    require_paper_id: bool = False


_TRUE = {"1", "true", "t", "yes", "y"}
_FALSE = {"0", "false", "f", "no", "n"}


def _parse_flag(text: str) -> bool:
    t = text.strip().lower()
    if t in _TRUE:
        return True
    if t in _FALSE:
        return False
    raise ValueError(f"not a boolean: {text!r}")


def load_csv(
    path: str | Path,
    schema: DatasetSchema,
    *,
    strict: bool = False,
    positive_default: bool = True,
    errors: list[RowError] | None = None,
) -> list[Observation]:
    """Read observations from a CSV file with a header row.

    Without a positive-only column, every positive value is flagged
    ``positive_default``; nonpositive values are never positive-only.
    Bad rows are logged and skipped (and appended to ``errors`` when a
    list is supplied) unless ``strict`` is set.

    Raises:
        SchemaError: a declared column is missing from the header.
        RowError: a row is malformed and ``strict`` is set.
    """
    with open(path, newline="", encoding="utf-8-sig") as fh:
        return read_observations(fh, schema, strict=strict, positive_default=positive_default, errors=errors)


def read_observations(
    stream: Iterable[str],
    schema: DatasetSchema,
    *,
    strict: bool = False,
    positive_default: bool = True,
    errors: list[RowError] | None = None,
) -> list[Observation]:
    reader = csv.DictReader(stream)
    header = reader.fieldnames
    if header is None:
        raise SchemaError("input has no header row")
    header = [h.strip() for h in header]
    reader.fieldnames = header

    required = [schema.value_column, *schema.label_columns.values()]
    if schema.positive_only_column:
        required.append(schema.positive_only_column)
    if schema.require_paper_id:
        required.append(schema.paper_id_column or "paper")
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"missing column(s) {', '.join(map(repr, missing))}; header has {header}")
    paper_col = schema.paper_id_column if schema.paper_id_column in header else None

    out: list[Observation] = []
    for row in reader:
        line = reader.line_num
        try:
            out.append(_parse_row(row, line, schema, paper_col, positive_default))
        except RowError as exc:
            if strict:
                raise
            log.warning("skipping %s", exc)
            if errors is not None:
                errors.append(exc)
    return out


def _parse_row(row, line, schema, paper_col, positive_default) -> Observation:
    raw = row.get(schema.value_column)
    if raw is None or not raw.strip():
        raise RowError(line, f"missing value in column {schema.value_column!r}")
    try:
        value = float(raw)
    except ValueError:
        raise RowError(line, f"cannot parse value {raw!r}") from None
    if not math.isfinite(value):
        raise RowError(line, f"non-finite value {raw!r}")

    if schema.positive_only_column:
        flag = row.get(schema.positive_only_column) or ""
        try:
            positive = _parse_flag(flag)
        except ValueError:
            raise RowError(line, f"cannot parse positive-only flag {flag!r}") from None
        if positive and value <= 0:
            raise RowError(line, f"value {value:g} flagged positive-only but is not positive")
    else:
        positive = positive_default and value > 0

    labels = {}
    for dim, col in schema.label_columns.items():
        cell = (row.get(col) or "").strip()
        if cell:
            labels[dim] = cell
    paper = (row.get(paper_col) or "").strip() if paper_col else ""
    if schema.require_paper_id and not paper:
        raise RowError(line, "missing paper id")
    return Observation(value, paper or None, labels, positive, line)


# ---------------------------------------------------------------------------
# Category binnings


@dataclass(frozen=True)
class CategoryBinning:
    """Maps the raw label in ``source`` onto a category of ``dimension``.

    Use the ``explicit``, ``exact_values`` or ``year_ranges`` constructors.
    ``categories`` lists output categories in display order, overflow last.
    """

    dimension: str
    categories: tuple[str, ...]
    match: Callable[[str], str | None] = field(repr=False, compare=False)
    source: str | None = None
    overflow: str | None = None

    @property
    def source_dimension(self) -> str:
        return self.source or self.dimension

    def __call__(self, raw: str) -> str:
        category = self.match(raw)
        if category is not None:
            return category
        if self.overflow is None:
            raise BinningError(f"{raw!r} matches no {self.dimension} category and there is no overflow category")
        return self.overflow

    @classmethod
    def explicit(cls, dimension, mapping: Mapping[str, str], overflow=None, source=None) -> CategoryBinning:
        """Case-insensitive lookup table."""
        table = {k.strip().lower(): v for k, v in mapping.items()}
        cats = list(dict.fromkeys(mapping.values()))
        if overflow is not None and overflow not in cats:
            cats.append(overflow)
        return cls(dimension, tuple(cats), lambda raw: table.get(raw.strip().lower()), source, overflow)

    @classmethod
    def exact_values(cls, dimension, values: Sequence[str], overflow=None, source=None) -> CategoryBinning:
        """Numeric labels compared as decimals, so "3", "3.0" and "3.00" coincide."""
        table = {_decimal_key(v): v for v in values}
        cats = list(values)
        if overflow is not None and overflow not in cats:
            cats.append(overflow)
        return cls(dimension, tuple(cats), lambda raw: table.get(_decimal_key(raw)), source, overflow)

    @classmethod
    def year_ranges(cls, dimension, ranges: Sequence[tuple[int, int]], overflow=None, source=None) -> CategoryBinning:
        """Inclusive year ranges named ``"lo-hi"``."""
        names = [f"{lo}-{hi}" for lo, hi in ranges]

        def match(raw):
            try:
                year = int(Decimal(raw.strip()))
            except (InvalidOperation, ValueError):
                return None
            for (lo, hi), name in zip(ranges, names):
                if lo <= year <= hi:
                    return name
            return None

        cats = names + ([overflow] if overflow is not None else [])
        return cls(dimension, tuple(cats), match, source, overflow)


def _decimal_key(text: str):
    try:
        d = Decimal(text.strip().rstrip("%"))
    except (InvalidOperation, ValueError):
        return None
    return d.normalize() if d.is_finite() else None


DISCOUNT_RATES = ("3.0", "2.0", "1.5", "1.0", "0.1", "0.0")
AUTHORS = {"Hope": "Hope", "Nordhaus": "Nordhaus", "Ploeg": "Ploeg", "van der Ploeg": "Ploeg", "Tol": "Tol"}
PERIODS = ((1982, 1995), (1996, 2001), (2002, 2006), (2007, 2013), (2014, 2020))


def discount_binning(dimension="prtp", source=None) -> CategoryBinning:
    """Pure rate of time preference: 3.0, 2.0, 1.5, 1.0, 0.1, 0.0 and other."""
    return CategoryBinning.exact_values(dimension, DISCOUNT_RATES, overflow="other", source=source)


def author_binning(dimension="author", source=None) -> CategoryBinning:
    return CategoryBinning.explicit(dimension, AUTHORS, overflow="Other", source=source)


def period_binning(dimension="period", source="year") -> CategoryBinning:
    return CategoryBinning.year_ranges(dimension, PERIODS, source=source)


PRESET_BINNINGS = {"discount": discount_binning, "author": author_binning, "period": period_binning}


def bin_categories(observations: Iterable[Observation], binning: CategoryBinning) -> list[Observation]:
    """Attach ``binning.dimension`` labels derived from the source labels.

    Raises:
        ValidationError: an observation lacks the source label.
        BinningError: a label matches no category and there is no overflow.
    """
    src = binning.source_dimension
    out = []
    for obs in observations:
        raw = obs.labels.get(src)
        if raw is None:
            raise ValidationError(f"{obs.where()}: no {src!r} label to bin")
        try:
            category = binning(raw)
        except BinningError as exc:
            raise BinningError(f"{obs.where()}: {exc}") from None
        out.append(obs.with_label(binning.dimension, category))
    return out


def category_counts(observations: Iterable[Observation], dimension: str, order: Sequence[str] | None = None) -> dict[str, int]:
    """Observation count per category, in ``order`` then first-seen order."""
    counts = Counter()
    seen = {}
    for obs in observations:
        cat = obs.labels.get(dimension)
        if cat is None:
            raise ValidationError(f"{obs.where()}: missing {dimension!r} label")
        counts[cat] += 1
        seen.setdefault(cat, None)
    keys = [c for c in (order or ()) if c in counts] + [c for c in seen if c not in (order or ())]
    return {k: counts[k] for k in keys}


def counts_csv(counts: Mapping[str, int], dimension: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([dimension, "count"])
    w.writerows(counts.items())
    return buf.getvalue()


def vote_weights(observations: Sequence[Observation], scheme: str = "estimate") -> list[float]:
    """Per-observation weights summing to one.

    ``estimate`` gives each observation ``1/n``. ``paper`` gives each paper
    ``1/P`` split equally over its observations.
    """
    n = len(observations)
    if n == 0:
        raise ValidationError("no observations to weight")
    if scheme == "estimate":
        return [1.0 / n] * n
    if scheme != "paper":
        raise ValidationError(f"unknown weighting scheme {scheme!r} (choose from {', '.join(WEIGHTING_SCHEMES)})")
    for obs in observations:
        if not obs.paper_id:
            raise ValidationError(f"{obs.where()}: paper weighting needs a paper id on every observation")
    per_paper = Counter(obs.paper_id for obs in observations)
    n_papers = len(per_paper)
    return [1.0 / (n_papers * per_paper[obs.paper_id]) for obs in observations]
