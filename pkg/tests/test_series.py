import numpy as np
import pytest
from hypothesis import given, strategies as st

from tempdis.exceptions import SeriesError
from tempdis.series import (
    Frequency,
    PeriodId,
    Series,
    annualize,
    pct_change_prev,
    pct_change_year_ago,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)


def test_period_parse_and_format():
    assert PeriodId.parse("1999Q3") == PeriodId(1999, 3)
    assert str(PeriodId.parse("2024")) == "2024"
    assert PeriodId.parse("2024").freq == Frequency.ANNUAL
    with pytest.raises(SeriesError):
        PeriodId.parse("1999Q5")
    with pytest.raises(SeriesError):
        PeriodId(2000, 2, Frequency.ANNUAL)


def test_quarter_successor_wraps_year():
    assert PeriodId(1999, 4).successor() == PeriodId(2000, 1)
    assert PeriodId(2000, 1).predecessor() == PeriodId(1999, 4)
    assert PeriodId(2000, 1) - PeriodId(1999, 2) == 3


@given(st.integers(1900, 2100), st.integers(1, 4), st.integers(-50, 50))
def test_shift_roundtrip(year, q, n):
    p = PeriodId(year, q)
    assert p.successor().predecessor() == p
    assert p.shift(n).shift(-n) == p
    assert (p.shift(n) > p) == (n > 0)


def test_series_validation():
    with pytest.raises(SeriesError):
        Series.quarterly("2000Q1", [])
    with pytest.raises(SeriesError, match="non-finite"):
        Series.quarterly("2000Q1", [1.0, np.nan])
    s = Series.quarterly("2000Q1", [1, 2, 3])
    with pytest.raises(ValueError):
        s.values[0] = 5.0
    assert s.end == PeriodId(2000, 3)


@pytest.mark.parametrize(
    "start, values, expected_start, expected",
    [
        ("1999Q1", [1, 1, 1, 1], 1999, [4]),
        ("1999Q1", [1, 2, 3, 4, 10, 10, 10, 10], 1999, [10, 40]),
        ("1999Q2", [1, 1, 1, 2, 2, 2, 2], 2000, [8]),
    ],
)
def test_annualize(start, values, expected_start, expected):
    a = annualize(Series.quarterly(start, values))
    assert a.start == PeriodId(expected_start, 1, Frequency.ANNUAL)
    assert a.values.tolist() == expected


def test_annualize_needs_complete_year():
    with pytest.raises(SeriesError, match="no complete year"):
        annualize(Series.quarterly("1999Q2", [1, 2, 3, 4]))


@given(
    st.lists(finite, min_size=8, max_size=8),
    st.lists(finite, min_size=8, max_size=8),
    st.floats(-10, 10),
    st.floats(-10, 10),
)
def test_annualize_is_linear(x, y, a, b):
    sx, sy = Series.quarterly("2000Q1", x), Series.quarterly("2000Q1", y)
    lhs = annualize(a * sx + b * sy).values
    rhs = a * annualize(sx).values + b * annualize(sy).values
    np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-6)


def test_pct_change_prev():
    assert pct_change_prev(Series.quarterly("2000Q1", [100, 110])).values == pytest.approx([10.0])
    assert pct_change_prev(Series.quarterly("2000Q1", [5, 5, 5])).values.tolist() == [0.0, 0.0]
    out = pct_change_prev(Series.quarterly("2000Q1", [100, 90, 99]))
    assert out.values == pytest.approx([100 * (90 / 100 - 1), 100 * (99 / 90 - 1)])
    assert out.values == pytest.approx([-10.0, 10.0])
    assert out.start == PeriodId(2000, 2)


def test_pct_change_zero_denominator_names_period():
    with pytest.raises(SeriesError, match="undefined growth rate at 2000Q3"):
        pct_change_prev(Series.quarterly("2000Q1", [1, 0, 2]))


def test_pct_change_year_ago():
    f = lambda v: pct_change_year_ago(Series.quarterly("2000Q1", v)).values
    assert f([1, 2, 3, 4, 2, 4, 6, 8]) == pytest.approx([100, 100, 100, 100])
    assert f([7] * 8) == pytest.approx([0, 0, 0, 0])
    assert f([10, 10, 10, 10, 11, 12, 10, 10]) == pytest.approx([10, 20, 0, 0])
    with pytest.raises(SeriesError):
        f([1, 2, 3, 4])
    with pytest.raises(SeriesError, match="undefined growth rate"):
        f([0, 1, 1, 1, 1])


@given(st.floats(0.5, 2.0), st.integers(2, 20))
def test_geometric_growth_is_constant(r, n):
    s = Series.quarterly("2000Q1", 3.0 * r ** np.arange(n))
    np.testing.assert_allclose(pct_change_prev(s).values, 100 * (r - 1), atol=1e-9)
