"""Annual and quarterly time series, calendar arithmetic and growth rates."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .exceptions import SeriesError

__all__ = [
    "Frequency",
    "PeriodId",
    "Series",
    "annualize",
    "pct_change_prev",
    "pct_change_year_ago",
]


class Frequency(IntEnum):
    """Number of subperiods per calendar year."""

    ANNUAL = 1
    QUARTERLY = 4


_PERIOD_RE = re.compile(r"^(\d{4})(?:[Qq]([1-4]))?$")


@dataclass(frozen=True, order=True)
class PeriodId:
    """A calendar year, or one quarter of it."""

    year: int
    subperiod: int = 1
    freq: Frequency = field(default=Frequency.QUARTERLY, compare=False)

    def __post_init__(self):
        freq = Frequency(self.freq)
        object.__setattr__(self, "freq", freq)
        if not 1 <= self.subperiod <= int(freq):
            raise SeriesError(
                f"subperiod {self.subperiod} invalid for frequency {freq.name.lower()}"
            )

    @classmethod
    def parse(cls, text: str) -> "PeriodId":
        """Parse ``YYYY`` (annual) or ``YYYYQn`` (quarterly)."""
        m = _PERIOD_RE.match(text.strip())
        if m is None:
            raise SeriesError(f"malformed period literal {text!r}")
        year = int(m.group(1))
        if m.group(2) is None:
            return cls(year, 1, Frequency.ANNUAL)
        return cls(year, int(m.group(2)), Frequency.QUARTERLY)

    @property
    def ordinal(self) -> int:
        return self.year * int(self.freq) + self.subperiod - 1

    @classmethod
    def from_ordinal(cls, ordinal: int, freq: Frequency) -> "PeriodId":
        year, sub = divmod(ordinal, int(freq))
        return cls(year, sub + 1, freq)

    def shift(self, n: int) -> "PeriodId":
        return PeriodId.from_ordinal(self.ordinal + n, self.freq)

    def successor(self) -> "PeriodId":
        return self.shift(1)

    def predecessor(self) -> "PeriodId":
        return self.shift(-1)

    def __sub__(self, other: "PeriodId") -> int:
        if self.freq != other.freq:
            raise SeriesError("cannot subtract periods of different frequency")
        return self.ordinal - other.ordinal

    def __str__(self) -> str:
        if self.freq == Frequency.ANNUAL:
            return f"{self.year:04d}"
        return f"{self.year:04d}Q{self.subperiod}"


def _as_period(p, freq: Frequency) -> PeriodId:
    if isinstance(p, PeriodId):
        return p
    if isinstance(p, str):
        return PeriodId.parse(p)
    if isinstance(p, (int, np.integer)) and freq == Frequency.ANNUAL:
        return PeriodId(int(p), 1, Frequency.ANNUAL)
    if isinstance(p, tuple) and len(p) == 2:
        return PeriodId(int(p[0]), int(p[1]), freq)
    raise SeriesError(f"cannot interpret {p!r} as a period")


@dataclass(frozen=True, eq=False)
class Series:
    """A contiguous, finite-valued annual or quarterly series.

    ``values`` is stored as a read-only float array; build a new Series
    instead of mutating one.
    """

    freq: Frequency
    start: PeriodId
    values: np.ndarray

    def __init__(self, freq, start, values: Iterable[float]):
        freq = Frequency(freq)
        start = _as_period(start, freq)
        if start.freq != freq:
            raise SeriesError(
                f"start period {start} does not match frequency {freq.name.lower()}"
            )
        arr = np.array(values, dtype=float).reshape(-1)
        if arr.size == 0:
            raise SeriesError("series must contain at least one value")
        if not np.all(np.isfinite(arr)):
            bad = int(np.flatnonzero(~np.isfinite(arr))[0])
            raise SeriesError(f"non-finite value at {start.shift(bad)}")
        arr.flags.writeable = False
        object.__setattr__(self, "freq", freq)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "values", arr)

    @classmethod
    def quarterly(cls, start, values) -> "Series":
        return cls(Frequency.QUARTERLY, start, values)

    @classmethod
    def annual(cls, start, values) -> "Series":
        if isinstance(start, (int, np.integer)):
            start = PeriodId(int(start), 1, Frequency.ANNUAL)
        return cls(Frequency.ANNUAL, start, values)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return (
            self.freq == other.freq
            and self.start == other.start
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"Series({self.freq.name.lower()}, {self.start}..{self.end}, "
            f"n={len(self)})"
        )

    @property
    def end(self) -> PeriodId:
        return self.start.shift(len(self) - 1)

    @property
    def periods(self) -> list[PeriodId]:
        return [self.start.shift(i) for i in range(len(self))]

    def index_of(self, period) -> int:
        """Position of ``period`` in the series; raises if outside the span."""
        p = _as_period(period, self.freq)
        i = p - self.start
        if not 0 <= i < len(self):
            raise SeriesError(f"period {p} outside series span {self.start}..{self.end}")
        return i

    def contains(self, period) -> bool:
        p = _as_period(period, self.freq)
        return 0 <= p - self.start < len(self)

    def slice(self, first, last) -> "Series":
        """Sub-series over ``first..last`` inclusive."""
        i, j = self.index_of(first), self.index_of(last)
        if j < i:
            raise SeriesError(f"empty slice {first}..{last}")
        return Series(self.freq, self.start.shift(i), self.values[i : j + 1])

    def with_values(self, values: Sequence[float]) -> "Series":
        arr = np.asarray(values, dtype=float)
        if arr.shape != self.values.shape:
            raise SeriesError("replacement values must keep the series length")
        return Series(self.freq, self.start, arr)

    def years(self) -> list[int]:
        """Calendar years fully covered by the series."""
        return complete_years(self)

    def __add__(self, other: "Series") -> "Series":
        _check_aligned(self, other)
        return self.with_values(self.values + other.values)

    def __mul__(self, scalar: float) -> "Series":
        return self.with_values(self.values * float(scalar))

    __rmul__ = __mul__


def _check_aligned(a: Series, b: Series) -> None:
    if a.freq != b.freq or a.start != b.start or len(a) != len(b):
        raise SeriesError(f"series not aligned: {a!r} vs {b!r}")


def complete_years(q: Series) -> list[int]:
    if q.freq == Frequency.ANNUAL:
        return [p.year for p in q.periods]
    first = q.start.year if q.start.subperiod == 1 else q.start.year + 1
    last = q.end.year if q.end.subperiod == 4 else q.end.year - 1
    return list(range(first, last + 1))


def annualize(q: Series) -> Series:
    """Annual sums over the complete calendar years of a quarterly flow."""
    if q.freq != Frequency.QUARTERLY:
        raise SeriesError("annualize expects a quarterly series")
    years = complete_years(q)
    if not years:
        raise SeriesError("no complete year in series span")
    i0 = q.index_of(PeriodId(years[0], 1))
    block = q.values[i0 : i0 + 4 * len(years)].reshape(len(years), 4)
    return Series.annual(years[0], block.sum(axis=1))


def _growth(q: Series, lag: int) -> Series:
    num, den = q.values[lag:], q.values[:-lag]
    zero = np.flatnonzero(den == 0.0)
    if zero.size:
        at = q.start.shift(int(zero[0]) + lag)
        raise SeriesError(f"undefined growth rate at {at}: zero denominator")
    return Series(q.freq, q.start.shift(lag), 100.0 * (num / den - 1.0))


def pct_change_prev(q: Series) -> Series:
    """Percent change on the previous period."""
    if len(q) < 2:
        raise SeriesError("growth rate needs at least 2 observations")
    return _growth(q, 1)


def pct_change_year_ago(q: Series) -> Series:
    """Percent change on the same quarter of the previous year."""
    if q.freq != Frequency.QUARTERLY:
        raise SeriesError("year-ago growth expects a quarterly series")
    if len(q) < 5:
        raise SeriesError("year-ago growth needs at least 5 quarters")
    return _growth(q, 4)
