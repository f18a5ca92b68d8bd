import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kdecomp.data import (
    CategoryBinning,
    DatasetSchema,
    Observation,
    author_binning,
    bin_categories,
    category_counts,
    counts_csv,
    discount_binning,
    load_csv,
    period_binning,
    read_observations,
    vote_weights,
)
from kdecomp.density import fit
from kdecomp.errors import BinningError, RowError, SchemaError, ValidationError

SCHEMA = DatasetSchema(value_column="scc", paper_id_column="paper", label_columns={"prtp": "prtp"})


def read(text, schema=SCHEMA, **kw):
    return read_observations(io.StringIO(text), schema, **kw)


class TestObservation:
    def test_non_finite(self):
        with pytest.raises(ValidationError):
            Observation(math.inf)

    def test_positive_only_requires_positive(self):
        with pytest.raises(ValidationError):
            Observation(-1.0, positive_only=True)

    def test_with_label(self):
        o = Observation(1.0, labels={"a": "x"}).with_label("b", "y")
        assert o.labels == {"a": "x", "b": "y"}


class TestLoad:
    def test_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("scc,paper,prtp\n")
        assert load_csv(path, SCHEMA) == []

    def test_row(self):
        (o,) = read("scc,paper,prtp\n12.5,P1,3.0\n")
        assert o.value == 12.5
        assert o.paper_id == "P1"
        assert o.labels == {"prtp": "3.0"}
        assert o.line == 2

    def test_positive_default(self):
        a, b = read("scc,paper,prtp\n12.5,P1,3.0\n-4,P2,1.0\n")
        assert a.positive_only and not b.positive_only
        (c,) = read("scc,paper,prtp\n12.5,P1,3.0\n", positive_default=False)
        assert not c.positive_only

    def test_positive_column(self):
        schema = DatasetSchema("scc", "paper", {}, positive_only_column="pos")
        a, b = read("scc,paper,pos\n12.5,P1,no\n3,P2,yes\n", schema)
        assert (a.positive_only, b.positive_only) == (False, True)

    def test_positive_flag_on_negative_value(self):
        schema = DatasetSchema("scc", "paper", {}, positive_only_column="pos")
        with pytest.raises(RowError, match="line 2"):
            read("scc,paper,pos\n-1,P1,1\n", schema, strict=True)

    def test_missing_column(self):
        with pytest.raises(SchemaError, match="prtp"):
            read("scc,paper\n1,P1\n")

    def test_bad_row_strict(self):
        with pytest.raises(RowError, match="line 3"):
            read("scc,paper,prtp\n1,P1,3.0\nabc,P2,1.0\n", strict=True)

    def test_bad_row_collected(self):
        errors = []
        out = read("scc,paper,prtp\n1,P1,3.0\nabc,P2,1.0\nnan,P3,1.0\n5,P4,0.0\n", errors=errors)
        assert [o.value for o in out] == [1.0, 5.0]
        assert [e.line for e in errors] == [3, 4]

    def test_missing_paper_column(self):
        (o,) = read("scc,prtp\n1,3.0\n")
        assert o.paper_id is None

    def test_bom_and_whitespace(self, tmp_path):
        path = tmp_path / "bom.csv"
        path.write_bytes("﻿ scc ,paper,prtp\n 7 ,P1,3\n".encode())
        (o,) = load_csv(path, SCHEMA)
        assert o.value == 7.0


class TestBinning:
    def test_period(self):
        b = period_binning()
        assert b("1996") == "1996-2001"
        assert b("1982") == "1982-1995" and b("2020") == "2014-2020"
        with pytest.raises(BinningError):
            b("1975")

    @pytest.mark.parametrize("raw, cat", [("3", "3.0"), ("3.00", "3.0"), ("0", "0.0"), ("1.5%", "1.5"), ("0.25", "other"), ("n/a", "other")])
    def test_discount(self, raw, cat):
        assert discount_binning()(raw) == cat

    def test_author(self):
        b = author_binning()
        assert b("Hope") == "Hope"
        assert b("van der Ploeg") == "Ploeg"
        assert b("tol") == "Tol"
        assert b("Smith") == "Other"

    def test_categories_listed(self):
        assert discount_binning().categories == ("3.0", "2.0", "1.5", "1.0", "0.1", "0.0", "other")
        assert author_binning().categories == ("Hope", "Nordhaus", "Ploeg", "Tol", "Other")
        assert period_binning().categories == ("1982-1995", "1996-2001", "2002-2006", "2007-2013", "2014-2020")

    def test_bin_observations(self):
        data = [Observation(1.0, labels={"year": y}, line=i) for i, y in enumerate(["1990", "2015", "2016"], 2)]
        binned = bin_categories(data, period_binning())
        assert category_counts(binned, "period") == {"1982-1995": 1, "2014-2020": 2}
        assert counts_csv(category_counts(binned, "period"), "period") == "period,count\n1982-1995,1\n2014-2020,2\n"

    def test_bin_names_line(self):
        data = [Observation(1.0, labels={"year": "1900"}, line=7)]
        with pytest.raises(BinningError, match="line 7"):
            bin_categories(data, period_binning())

    def test_bin_missing_source(self):
        with pytest.raises(ValidationError):
            bin_categories([Observation(1.0)], period_binning())

    def test_custom_explicit(self):
        b = CategoryBinning.explicit("model", {"DICE": "IAM", "FUND": "IAM"}, overflow="other")
        assert b("dice") == "IAM" and b("x") == "other"

    @given(st.lists(st.sampled_from(["3", "2.0", "1.5", "0.7", "x", "0.1", "0"]), min_size=1, max_size=50))
    def test_partition(self, raws):
        data = [Observation(1.0, labels={"prtp": r}) for r in raws]
        counts = category_counts(bin_categories(data, discount_binning()), "prtp")
        assert sum(counts.values()) == len(raws)


class TestVoteWeights:
    def test_per_estimate(self):
        assert vote_weights([Observation(float(i)) for i in range(4)]) == [0.25] * 4

    def test_per_paper(self):
        data = [Observation(1.0, "A"), Observation(2.0, "A"), Observation(3.0, "A"), Observation(4.0, "B")]
        assert vote_weights(data, "paper") == pytest.approx([1 / 6, 1 / 6, 1 / 6, 1 / 2], abs=1e-15)

    def test_missing_paper(self):
        with pytest.raises(ValidationError):
            vote_weights([Observation(1.0, "A"), Observation(2.0)], "paper")

    def test_unknown_scheme(self):
        with pytest.raises(ValidationError):
            vote_weights([Observation(1.0, "A")], "citation")

    @given(st.lists(st.integers(0, 20), min_size=1, max_size=200), st.sampled_from(["estimate", "paper"]))
    def test_conservation(self, papers, scheme):
        data = [Observation(1.0, f"P{p}") for p in papers]
        assert math.fsum(vote_weights(data, scheme)) == pytest.approx(1.0, abs=1e-12)


def test_pipeline_is_deterministic(tmp_path):
    rng = np.random.default_rng(31)
    lines = ["scc,paper,year"] + [f"{v:.6f},P{i % 7},{int(y)}" for i, (v, y) in enumerate(zip(rng.gumbel(30, 40, 50), rng.integers(1982, 2021, 50)))]
    path = tmp_path / "d.csv"
    path.write_text("\n".join(lines) + "\n")
    schema = DatasetSchema("scc", "paper", {"year": "year"})
    grid = np.linspace(-100, 300, 101)

    def run():
        data = bin_categories(load_csv(path, schema), period_binning())
        return fit(data, "weibull-gumbel", 10.0, vote_weights(data, "paper")).pdf(grid)

    assert np.array_equal(run(), run())
