"""Batch runner: one disaggregation job per target series."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .config import JobConfig
from .diagnostics import DiagnosticsReport, MovementStats, diagnose, movement_stats
from .engine import FitResult, disaggregate
from .exceptions import TempdisError
from .indicators import (
    IndicatorQuality,
    adjust_for_arrears,
    indicator_quality,
    load_events_json,
)
from .io import PValue, Stat, dumps_report, file_digest, load_series_csv, write_series_csv
from .series import Frequency, Series

log = logging.getLogger(__name__)


class JobError(TempdisError):
    def __init__(self, job: str, stage: str, message: str):
        super().__init__(f"[{job}] {stage}: {message}")
        self.job = job
        self.stage = stage


@dataclass(frozen=True)
class RunReport:
    job: str
    config: JobConfig
    fit: FitResult
    diagnostics: DiagnosticsReport
    movement: Optional[MovementStats]
    quality: Optional[IndicatorQuality]
    indicator: Series
    digests: dict
    notes: tuple = ()

    def to_dict(self) -> dict:
        return report_dict(self)


class _Stage:
    def __init__(self, job: str):
        self.job = job
        self.name = "init"

    def __call__(self, name: str):
        self.name = name
        return self

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, JobError):
            if isinstance(exc, (TempdisError, OSError, ValueError, np.linalg.LinAlgError)):
                raise JobError(self.job, self.name, str(exc)) from exc
        return False


def _load_indicators(cfg: JobConfig, digests: dict) -> dict[str, Series]:
    out = {}
    for src in cfg.indicators:
        s = load_series_csv(src.path, Frequency.QUARTERLY)
        digests[src.path.name] = file_digest(src.path)
        if src.arrears is not None:
            digests[src.arrears.name] = file_digest(src.arrears)
            s = adjust_for_arrears(s, load_events_json(src.arrears))
        out[src.label] = s
    if cfg.sum_indicators:
        first = max(s.start for s in out.values())
        last = min(s.end for s in out.values())
        if last < first:
            raise TempdisError("indicators to be summed do not overlap")
        total = sum(s.slice(first, last).values for s in out.values())
        out = {cfg.sum_label: Series.quarterly(first, total)}
    if cfg.arrears is not None:
        digests[cfg.arrears.name] = file_digest(cfg.arrears)
        events = load_events_json(cfg.arrears)
        out = {k: adjust_for_arrears(v, events) for k, v in out.items()}
    return out


def compute_job(cfg: JobConfig) -> RunReport:
    """Run every stage of one job without touching the output directory."""
    stage = _Stage(cfg.name)
    digests: dict[str, str] = {}
    with stage("load"):
        y = load_series_csv(cfg.constraint, Frequency.ANNUAL)
        digests[cfg.constraint.name] = file_digest(cfg.constraint)
    with stage("arrears"):
        indicators = _load_indicators(cfg, digests)
    with stage("disaggregate"):
        fit = disaggregate(cfg.spec, y, indicators, cfg.target_span)
    with stage("diagnostics"):
        diag = diagnose(
            fit, ljung_box_lags=cfg.ljung_box_lags, whitened=cfg.whitened, strict=False
        )
    notes = list(diag.notes)
    main = indicators[cfg.indicator_names[0]]
    est = fit.quarterly_estimate
    ind = main.slice(est.start, est.end)
    # descriptive statistics only: too little data leaves them empty
    try:
        quality = indicator_quality(main, y)
    except TempdisError as exc:
        quality = None
        notes.append(f"indicator_quality: {exc}")
    try:
        moves = movement_stats(ind, est)
    except TempdisError as exc:
        moves = None
        notes.append(f"movement_stats: {exc}")
    return RunReport(
        cfg.name, cfg, fit, diag, moves, quality, ind, dict(sorted(digests.items())), tuple(notes)
    )


def _rebased(s: Series) -> np.ndarray:
    if s.values[0] == 0.0:
        raise TempdisError("cannot rebase a series whose first value is zero")
    return 100.0 * s.values / s.values[0]


def _stat(v):
    return None if v is None else Stat(v)


def _pval(v):
    return None if v is None else PValue(v)


def report_dict(rep: RunReport) -> dict:
    fit, d, m, q = rep.fit, rep.diagnostics, rep.movement, rep.quality
    est = fit.quarterly_estimate
    return {
        "tool": {"name": "tempdis", "version": __version__},
        "job": rep.job,
        "inputs": {"sha256": rep.digests},
        "model": {
            "method": fit.method.display_name,
            "intercept": fit.intercept,
            "regressors": [c.label for c in fit.coefficients],
            "rho": Stat(fit.rho),
            "rho_display": fit.rho_display,
            "rho_estimated": fit.rho_estimated,
            "sigma2": Stat(fit.sigma2),
            "log_likelihood": Stat(fit.log_likelihood),
            "n_years": fit.n_years,
            "degrees_of_freedom": fit.df,
            "first_quarter": str(est.start),
            "last_quarter": str(est.end),
            "last_constrained_year": fit.low_freq_residuals.end.year,
        },
        "coefficients": [
            {
                "label": c.label,
                "estimate": Stat(c.estimate),
                "standard_error": Stat(c.std_error),
                "t_statistic": _stat(c.t_stat),
                "p_value": _pval(c.p_value),
            }
            for c in fit.coefficients
        ],
        "diagnostics": {
            "residuals": "whitened" if d.whitened else "raw",
            "rho": fit.rho_display,
            "r_squared": _stat(d.r_squared),
            "standard_error": Stat(d.standard_error),
            "f_test": {"statistic": _stat(d.f_statistic), "p_value": _pval(d.f_pvalue)},
            "durbin_watson": _stat(d.durbin_watson),
            "jarque_bera": {
                "statistic": _stat(d.jarque_bera),
                "p_value": _pval(d.jarque_bera_pvalue),
            },
            "h_test": {
                "statistic": _stat(d.h_statistic),
                "p_value": _pval(d.h_pvalue),
                "block": d.h_block,
            },
            "ljung_box": {
                "statistic": _stat(d.ljung_box_q),
                "p_value": _pval(d.ljung_box_pvalue),
                "lags": d.ljung_box_lags,
            },
        },
        "movement": None if m is None else {
            "corr_qopq": Stat(m.corr_qopq),
            "corr_qosq": Stat(m.corr_qosq),
            "rmse_qopq": Stat(m.rmse_qopq),
            "rmse_qosq": Stat(m.rmse_qosq),
            "max_discrepancy_qopq": Stat(m.max_discrepancy_qopq),
            "max_discrepancy_qosq": Stat(m.max_discrepancy_qosq),
        },
        "indicator_quality": None if q is None else {
            "correlation": Stat(q.correlation),
            "coverage_rate_pct": Stat(q.coverage_rate_pct),
            "total_coverage_pct": Stat(q.total_coverage_pct),
            "per_year_coverage": [
                {"year": y, "coverage_pct": Stat(c)}
                for y, c in zip(q.years, q.per_year_coverage)
            ],
        },
        "notes": list(rep.notes),
    }


def emit_report(report: RunReport, directory) -> list[Path]:
    """Write the quarterly estimate, JSON report and plot data for one job."""
    directory = Path(directory)
    name = report.job
    try:
        directory.mkdir(parents=True, exist_ok=True)
        quarterly = directory / f"{name}_quarterly.csv"
        write_series_csv(report.fit.quarterly_estimate, quarterly)

        rep_path = directory / f"{name}_report.json"
        rep_path.write_text(dumps_report(report_dict(report)), encoding="utf-8")

        est = report.fit.quarterly_estimate
        ind_r, est_r = _rebased(report.indicator), _rebased(est)
        rows = ["period,indicator_rebased,estimate_rebased"]
        rows += [f"{p},{a!r},{b!r}" for p, a, b in zip(est.periods, ind_r.tolist(), est_r.tolist())]
        plot = directory / f"{name}_plot.csv"
        plot.write_text("\n".join(rows) + "\n", encoding="utf-8")
    except OSError as exc:
        raise JobError(name, "write", f"{exc.filename}: {exc.strerror}") from exc
    return [quarterly, rep_path, plot]


def job_output_dir(cfg: JobConfig, out: Optional[Path]) -> Path:
    if out is not None:
        return Path(out) / cfg.name
    return cfg.output_dir


def run_job(cfg: JobConfig, out: Optional[Path] = None) -> RunReport:
    report = compute_job(cfg)
    emit_report(report, job_output_dir(cfg, out))
    return report


@dataclass
class JobOutcome:
    name: str
    report: Optional[RunReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def run_jobs(
    jobs: Sequence[JobConfig], out: Optional[Path] = None, workers: int = 1
) -> list[JobOutcome]:
    """Run jobs independently; one failing job does not stop the others."""

    def one(cfg: JobConfig) -> JobOutcome:
        try:
            rep = run_job(cfg, out)
        except TempdisError as exc:
            log.error("%s", exc)
            return JobOutcome(cfg.name, error=str(exc))
        log.info("job %s done", cfg.name)
        return JobOutcome(cfg.name, report=rep)

    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, jobs))
    return [one(cfg) for cfg in jobs]
