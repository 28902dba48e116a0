"""Indicator preparation: arrears reallocation, step dummies, quality checks.

Wage arrears from delayed collective agreements show up in cash and
commitment sources in the quarter they are paid. They are removed from
those quarters and re-imputed, with user supplied quarterly weights, to
the quarters in which the work was actually performed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import ArrearsError, SeriesError
from .series import Frequency, PeriodId, Series, annualize

__all__ = [
    "Accrual",
    "ArrearsEvent",
    "IndicatorQuality",
    "step_dummy",
    "net_arrears",
    "impute_accruals",
    "adjust_for_arrears",
    "indicator_quality",
    "load_events_json",
]


@dataclass(frozen=True)
class Accrual:
    year: int
    allocation: float
    weights: tuple[float, float, float, float]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        if len(w) != 4:
            raise ArrearsError(f"accrual {self.year}: need 4 quarterly weights")
        if any(x < 0 for x in w):
            raise ArrearsError(f"accrual {self.year}: weights must be non-negative")
        if abs(sum(w) - 1.0) > 1e-9:
            raise ArrearsError(f"accrual {self.year}: weights sum to {sum(w)!r}, not 1")
        if self.allocation < 0:
            raise ArrearsError(f"accrual {self.year}: negative allocation")
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class ArrearsEvent:
    """One delayed wage agreement.

    ``disbursements`` are the (quarter, amount) pairs at which the arrears
    were recorded in the source; ``accruals`` are the years the pay relates
    to. Disbursed and accrued totals must agree to ``rtol``.
    """

    label: str
    disbursements: tuple[tuple[PeriodId, float], ...] = ()
    accruals: tuple[Accrual, ...] = ()
    rtol: float = 1e-6

    def __post_init__(self):
        disb = []
        for period, amount in self.disbursements:
            if isinstance(period, str):
                period = PeriodId.parse(period)
            if period.freq != Frequency.QUARTERLY:
                raise ArrearsError(f"{self.label}: disbursement period {period} is not a quarter")
            if amount < 0:
                raise ArrearsError(f"{self.label}: negative disbursement at {period}")
            disb.append((period, float(amount)))
        accr = tuple(a if isinstance(a, Accrual) else Accrual(*a) for a in self.accruals)
        object.__setattr__(self, "disbursements", tuple(disb))
        object.__setattr__(self, "accruals", accr)

        paid, accrued = self.disbursed_total, self.accrued_total
        scale = max(abs(paid), abs(accrued))
        if abs(paid - accrued) > self.rtol * scale:
            raise ArrearsError(
                f"{self.label}: disbursed total {paid!r} does not match "
                f"accrued total {accrued!r}"
            )

    @property
    def disbursed_total(self) -> float:
        return float(sum(a for _, a in self.disbursements))

    @property
    def accrued_total(self) -> float:
        return float(sum(a.allocation for a in self.accruals))


def step_dummy(from_year: int, to_year: int, span: Series) -> Series:
    """1.0 in every quarter of years ``from_year..to_year``, else 0.0."""
    if from_year > to_year:
        raise SeriesError(f"invalid dummy range ({from_year}, {to_year})")
    years = np.array([p.year for p in span.periods])
    return span.with_values(((years >= from_year) & (years <= to_year)).astype(float))


def net_arrears(raw: Series, event: ArrearsEvent) -> Series:
    out = np.array(raw.values)
    for period, amount in event.disbursements:
        if not raw.contains(period):
            raise ArrearsError(
                f"{event.label}: disbursement outside series span ({period} not in "
                f"{raw.start}..{raw.end})"
            )
        out[raw.index_of(period)] -= amount
    return raw.with_values(out)


def impute_accruals(netted: Series, event: ArrearsEvent) -> Series:
    out = np.array(netted.values)
    for acc in event.accruals:
        q1, q4 = PeriodId(acc.year, 1), PeriodId(acc.year, 4)
        if not (netted.contains(q1) and netted.contains(q4)):
            raise ArrearsError(
                f"{event.label}: accrual year outside series span ({acc.year})"
            )
        i = netted.index_of(q1)
        out[i : i + 4] += acc.allocation * np.asarray(acc.weights)
    return netted.with_values(out)


def adjust_for_arrears(raw: Series, events: Sequence[ArrearsEvent]) -> Series:
    """Net out and re-impute every event, in list order."""
    if raw.freq != Frequency.QUARTERLY:
        raise ArrearsError("arrears adjustment expects a quarterly series")
    out = raw
    for event in events:
        out = impute_accruals(net_arrears(out, event), event)
    return out


@dataclass(frozen=True)
class IndicatorQuality:
    correlation: float
    coverage_rate_pct: float
    per_year_coverage: tuple[float, ...]
    years: tuple[int, ...]
    total_coverage_pct: float = field(default=float("nan"))


def indicator_quality(indicator: Series, constraint: Series) -> IndicatorQuality:
    """Level correlation and coverage of the annualized indicator.

    Coverage per year is ``100 * annualized / constraint``; the headline
    rate is the mean of those ratios. ``total_coverage_pct`` is the ratio of
    period totals, kept for comparison.
    """
    ann = annualize(indicator)
    years = sorted(set(ann.years()) & set(constraint.years()))
    if len(years) < 3:
        raise SeriesError(f"insufficient overlap: {len(years)} common years, need 3")
    a = np.array([ann.values[ann.index_of(y)] for y in years])
    c = np.array([constraint.values[constraint.index_of(y)] for y in years])
    zero = np.flatnonzero(c == 0.0)
    if zero.size:
        raise SeriesError(f"zero constraint year {years[int(zero[0])]}")
    cov = 100.0 * a / c
    if np.ptp(a) == 0.0 or np.ptp(c) == 0.0:
        corr = float("nan")
    else:
        corr = float(np.corrcoef(a, c)[0, 1])
    return IndicatorQuality(
        correlation=corr,
        coverage_rate_pct=float(cov.mean()),
        per_year_coverage=tuple(float(x) for x in cov),
        years=tuple(years),
        total_coverage_pct=float(100.0 * a.sum() / c.sum()),
    )


def events_from_records(records: list[dict]) -> list[ArrearsEvent]:
    events = []
    for i, rec in enumerate(records):
        try:
            label = rec.get("label", f"event{i}")
            disb = [
                (PeriodId.parse(str(d["period"])), float(d["amount"]))
                for d in rec.get("disbursements", [])
            ]
            accr = [
                Accrual(int(a["year"]), float(a["allocation"]), tuple(a["weights"]))
                for a in rec.get("accruals", [])
            ]
        except (KeyError, TypeError) as exc:
            raise ArrearsError(f"arrears event #{i}: malformed record ({exc})") from exc
        events.append(ArrearsEvent(label, tuple(disb), tuple(accr)))
    return events


def load_events_json(path) -> list[ArrearsEvent]:
    """Read an arrears events file (a JSON array of event records)."""
    with open(Path(path), encoding="utf-8") as fh:
        records = json.load(fh)
    if not isinstance(records, list):
        raise ArrearsError(f"{path}: expected a JSON array of events")
    return events_from_records(records)
