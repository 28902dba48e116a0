"""Job configuration files for the batch runner."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .engine import DEFAULT_RHO_BOUNDS, Method, ModelSpec
from .exceptions import ConfigError, TempdisError
from .series import PeriodId

RHO_RANGES = {"full": DEFAULT_RHO_BOUNDS, "nonnegative": (0.0, 0.99)}

_JOB_KEYS = {
    "name", "constraint", "indicators", "sum_indicators", "sum_label", "arrears",
    "method", "intercept", "rho", "rho_range", "dummies", "target_span",
    "output_dir", "diagnostics",
}


@dataclass(frozen=True)
class IndicatorSource:
    label: str
    path: Path
    arrears: Optional[Path] = None


@dataclass(frozen=True)
class JobConfig:
    name: str
    constraint: Path
    indicators: tuple[IndicatorSource, ...]
    method: Method
    intercept: bool = True
    rho: Union[float, str] = "estimate"
    rho_range: str = "full"
    dummies: tuple[tuple[int, int], ...] = ()
    sum_indicators: bool = False
    sum_label: str = "indicator"
    arrears: Optional[Path] = None
    target_span: Optional[tuple[PeriodId, PeriodId]] = None
    output_dir: Path = Path("output")
    ljung_box_lags: int = 7
    whitened: bool = True
    config_dir: Path = field(default=Path("."), compare=False)

    @property
    def indicator_names(self) -> tuple[str, ...]:
        if self.sum_indicators:
            return (self.sum_label,)
        return tuple(s.label for s in self.indicators)

    @property
    def spec(self) -> ModelSpec:
        return ModelSpec(
            method=self.method,
            intercept=self.intercept,
            indicator_names=self.indicator_names,
            dummies=self.dummies,
            rho=self.rho,
            rho_bounds=RHO_RANGES[self.rho_range],
        )


def _fail(job, key, msg):
    raise ConfigError(f"job {job!r}, key {key!r}: {msg}")


def _path(base: Path, value, job, key) -> Path:
    if not isinstance(value, str) or not value:
        _fail(job, key, "expected a file path string")
    p = Path(value)
    return p if p.is_absolute() else base / p


def _job(rec: dict, base: Path, index: int, root: Path) -> JobConfig:
    if not isinstance(rec, dict):
        raise ConfigError(f"job #{index}: expected an object")
    name = rec.get("name")
    if not isinstance(name, str) or not name:
        raise ConfigError(f"job #{index}, key 'name': expected a non-empty string")
    if not name.replace("-", "").replace("_", "").isalnum():
        _fail(name, "name", "use letters, digits, '-' or '_' only")
    unknown = sorted(set(rec) - _JOB_KEYS)
    if unknown:
        _fail(name, unknown[0], "unknown key")
    for key in ("constraint", "indicators", "method"):
        if key not in rec:
            _fail(name, key, "missing required key")

    try:
        method = Method.parse(rec["method"])
    except TempdisError:
        _fail(name, "method", f"unknown method {rec['method']!r}")

    inds = rec["indicators"]
    if isinstance(inds, str):
        inds = [{"label": "indicator", "path": inds}]
    if not isinstance(inds, list) or not inds:
        _fail(name, "indicators", "expected a non-empty list")
    sources = []
    for i, ind in enumerate(inds):
        if not isinstance(ind, dict) or "path" not in ind:
            _fail(name, f"indicators[{i}]", "expected an object with 'path'")
        label = ind.get("label", f"indicator{i + 1}" if len(inds) > 1 else "indicator")
        arrears = ind.get("arrears")
        sources.append(
            IndicatorSource(
                str(label),
                _path(base, ind["path"], name, f"indicators[{i}].path"),
                _path(base, arrears, name, f"indicators[{i}].arrears") if arrears else None,
            )
        )
    if len({s.label for s in sources}) != len(sources):
        _fail(name, "indicators", "indicator labels must be unique")

    intercept = rec.get("intercept", True)
    if not isinstance(intercept, bool):
        _fail(name, "intercept", "expected true or false")
    sum_ind = rec.get("sum_indicators", False)
    if not isinstance(sum_ind, bool):
        _fail(name, "sum_indicators", "expected true or false")

    rho = rec.get("rho", "estimate")
    if isinstance(rho, bool) or not (rho == "estimate" or isinstance(rho, (int, float))):
        _fail(name, "rho", "expected a number or \"estimate\"")
    if not isinstance(rho, str) and abs(rho) > 0.999:
        _fail(name, "rho", "rho out of admissible range [-0.999, 0.999]")
    rho_range = rec.get("rho_range", "full")
    if rho_range not in RHO_RANGES:
        _fail(name, "rho_range", f"expected one of {sorted(RHO_RANGES)}")

    dummies = []
    for i, d in enumerate(rec.get("dummies", [])):
        if (
            not isinstance(d, (list, tuple))
            or len(d) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in d)
        ):
            _fail(name, f"dummies[{i}]", "expected [from_year, to_year]")
        if d[0] > d[1]:
            _fail(name, f"dummies[{i}]", "invalid dummy range")
        dummies.append((d[0], d[1]))

    span = rec.get("target_span")
    if span is not None:
        if not isinstance(span, list) or len(span) != 2:
            _fail(name, "target_span", "expected [first_quarter, last_quarter]")
        try:
            span = tuple(PeriodId.parse(str(p)) for p in span)
        except TempdisError as exc:
            _fail(name, "target_span", str(exc))
        if span[1] < span[0]:
            _fail(name, "target_span", "last quarter precedes first quarter")

    diag = rec.get("diagnostics", {})
    if not isinstance(diag, dict):
        _fail(name, "diagnostics", "expected an object")
    extra = sorted(set(diag) - {"ljung_box_lags", "whitened"})
    if extra:
        _fail(name, f"diagnostics.{extra[0]}", "unknown key")
    lags = diag.get("ljung_box_lags", 7)
    if not isinstance(lags, int) or isinstance(lags, bool) or lags < 1:
        _fail(name, "diagnostics.ljung_box_lags", "expected a positive integer")
    whitened = diag.get("whitened", True)
    if not isinstance(whitened, bool):
        _fail(name, "diagnostics.whitened", "expected true or false")

    arrears = rec.get("arrears")
    out = rec.get("output_dir")
    try:
        cfg = JobConfig(
            name=name,
            constraint=_path(base, rec["constraint"], name, "constraint"),
            indicators=tuple(sources),
            method=method,
            intercept=intercept,
            rho=rho if isinstance(rho, str) else float(rho),
            rho_range=rho_range,
            dummies=tuple(dummies),
            sum_indicators=sum_ind,
            sum_label=str(rec.get("sum_label", "indicator")),
            arrears=_path(base, arrears, name, "arrears") if arrears else None,
            target_span=span,
            output_dir=_path(base, out, name, "output_dir") if out else root / name,
            ljung_box_lags=lags,
            whitened=whitened,
            config_dir=base,
        )
        cfg.spec
    except ConfigError:
        raise
    except TempdisError as exc:
        raise ConfigError(f"job {name!r}: {exc}") from None
    return cfg


def parse_config(path) -> list[JobConfig]:
    """Load and validate a JSON job configuration file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"config {path} is not valid UTF-8 JSON: {exc}") from None
    if isinstance(raw, list):
        raw = {"jobs": raw}
    if not isinstance(raw, dict) or not isinstance(raw.get("jobs"), list):
        raise ConfigError(f"config {path}: expected an object with a 'jobs' list")
    base = path.parent
    root = raw.get("output_dir", "output")
    if not isinstance(root, str) or not root:
        raise ConfigError(f"config {path}, key 'output_dir': expected a directory path")
    root = Path(root) if Path(root).is_absolute() else base / root
    jobs = [_job(rec, base, i, root) for i, rec in enumerate(raw["jobs"])]
    names = [j.name for j in jobs]
    dup = sorted({n for n in names if names.count(n) > 1})
    if dup:
        raise ConfigError(f"duplicate job name {dup[0]!r}")
    return jobs
