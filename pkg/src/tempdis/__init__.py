"""Regression-based temporal disaggregation of annual totals to quarters."""

__version__ = "0.1.0"

from .diagnostics import DiagnosticsReport, MovementStats, diagnose, movement_stats
from .engine import FitResult, Method, ModelSpec, disaggregate, estimate_rho
from .estimator import TemporalDisaggregator
from .exceptions import TempdisError
from .indicators import ArrearsEvent, adjust_for_arrears, indicator_quality, step_dummy
from .series import Frequency, PeriodId, Series, annualize

__all__ = [
    "ArrearsEvent",
    "DiagnosticsReport",
    "FitResult",
    "Frequency",
    "Method",
    "ModelSpec",
    "MovementStats",
    "PeriodId",
    "Series",
    "TempdisError",
    "TemporalDisaggregator",
    "adjust_for_arrears",
    "annualize",
    "diagnose",
    "disaggregate",
    "estimate_rho",
    "indicator_quality",
    "movement_stats",
    "step_dummy",
]
