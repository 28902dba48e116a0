"""CSV series files and deterministic JSON output."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Optional

from .exceptions import SeriesError
from .series import Frequency, PeriodId, Series

__all__ = [
    "load_series_csv",
    "write_series_csv",
    "file_digest",
    "Stat",
    "PValue",
    "dumps_report",
]


def load_series_csv(path, frequency: Optional[Frequency] = None) -> Series:
    """Read a ``period,value`` CSV into a contiguous Series."""
    path = Path(path)
    periods: list[PeriodId] = []
    values: list[float] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["period", "value"]:
            raise SeriesError(f"{path}: expected header 'period,value'")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise SeriesError(f"{path}:{line}: expected 2 fields, got {len(row)}")
            try:
                p = PeriodId.parse(row[0])
            except SeriesError as exc:
                raise SeriesError(f"{path}:{line}: {exc}") from None
            try:
                v = float(row[1].strip())
            except ValueError:
                raise SeriesError(f"{path}:{line}: malformed value {row[1]!r}") from None
            if frequency is not None and p.freq != Frequency(frequency):
                raise SeriesError(
                    f"{path}:{line}: period {p} is not {Frequency(frequency).name.lower()}"
                )
            if periods:
                prev = periods[-1]
                if p.freq != prev.freq:
                    raise SeriesError(f"{path}:{line}: mixed frequencies")
                if p <= prev:
                    raise SeriesError(f"{path}:{line}: periods not strictly increasing")
                if p != prev.successor():
                    raise SeriesError(
                        f"{path}:{line}: non-contiguous series, first missing period "
                        f"{prev.successor()}"
                    )
            periods.append(p)
            values.append(v)
    if not periods:
        raise SeriesError(f"{path}: no observations")
    return Series(periods[0].freq, periods[0], values)


def write_series_csv(series: Series, path) -> None:
    lines = ["period,value"]
    lines += [f"{p},{float(v)!r}" for p, v in zip(series.periods, series.values)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Stat(float):
    """A statistic, serialized with 6 fixed decimals."""


class PValue(float):
    """A p-value, serialized with 3 decimals and values >= 0.9995 as 1."""


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (Stat, PValue)) and not math.isfinite(v):
        return "null"
    if isinstance(v, PValue):
        return "1" if v >= 0.9995 else f"{float(v):.3f}"
    if isinstance(v, Stat):
        return f"{float(v):.6f}"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return json.dumps(v) if math.isfinite(v) else "null"
    return json.dumps(str(v), ensure_ascii=False)


def _dump(obj, indent: int) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple)) for x in obj):
            return "[" + ", ".join(_scalar(x) for x in obj) + "]"
        return "[\n" + ",\n".join(inner + _dump(x, indent + 1) for x in obj) + "\n" + pad + "]"
    return _scalar(obj)


def dumps_report(obj) -> str:
    """Serialize nested dicts/lists; key order is insertion order."""
    return _dump(obj, 0) + "\n"
