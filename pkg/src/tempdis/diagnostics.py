"""Fit statistics, residual tests and indicator/estimate movement checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .engine import FitResult
from .exceptions import DiagnosticsError
from .series import Series, pct_change_prev, pct_change_year_ago

__all__ = [
    "chi2_sf",
    "f_sf",
    "t_sf_two_sided",
    "r2_and_f",
    "durbin_watson",
    "jarque_bera",
    "het_ratio_test",
    "ljung_box",
    "coef_t_tests",
    "movement_stats",
    "diagnose",
    "DiagnosticsReport",
    "MovementStats",
    "format_pvalue",
]


def chi2_sf(x: float, df: float) -> float:
    return float(special.chdtrc(df, max(x, 0.0)))


def f_sf(x: float, dfn: float, dfd: float) -> float:
    if x <= 0:
        return 1.0
    return float(special.fdtrc(dfn, dfd, x))


def t_sf_two_sided(t: float, df: float) -> float:
    return float(min(1.0, 2.0 * special.stdtr(df, -abs(t))))


def format_pvalue(p: Optional[float]) -> Optional[str]:
    """Three decimals; anything at or above 0.9995 displays as ``1``."""
    if p is None or (isinstance(p, float) and math.isnan(p)):
        return None
    if p >= 0.9995:
        return "1"
    return f"{p:.3f}"


def _resid(e) -> np.ndarray:
    return np.asarray(getattr(e, "values", e), dtype=float).reshape(-1)


def r2_and_f(y, fitted, k: int, intercept: bool):
    """R-squared, overall F and its upper-tail p-value.

    F and p are ``None`` when the fit is exact or there is nothing to test
    (intercept-only model).
    """
    y, fitted = _resid(y), _resid(fitted)
    n = y.size
    if n <= k:
        raise DiagnosticsError(f"need more observations ({n}) than regressors ({k})")
    rss = float(np.sum((y - fitted) ** 2))
    tss = float(np.sum((y - y.mean()) ** 2)) if intercept else float(np.sum(y**2))
    if tss == 0.0:
        raise DiagnosticsError("degenerate constraint series: zero total sum of squares")
    r2 = 1.0 - rss / tss
    dfn = k - 1 if intercept else k
    dfd = n - k
    if rss == 0.0 or dfn == 0:
        return r2, None, None
    f = ((tss - rss) / dfn) / (rss / dfd)
    return r2, f, f_sf(f, dfn, dfd)


def durbin_watson(residuals) -> float:
    e = _resid(residuals)
    if e.size < 2:
        raise DiagnosticsError("Durbin-Watson needs at least 2 residuals")
    ss = float(e @ e)
    if ss == 0.0:
        raise DiagnosticsError("degenerate residuals: all zero")
    return float(np.sum(np.diff(e) ** 2) / ss)


def jarque_bera(residuals) -> tuple[float, float]:
    e = _resid(residuals)
    n = e.size
    if n < 4:
        raise DiagnosticsError("Jarque-Bera needs at least 4 residuals")
    d = e - e.mean()
    m2 = float(np.mean(d**2))
    if m2 <= 1e-30 * max(1.0, float(np.mean(e**2))):
        raise DiagnosticsError("degenerate residuals: zero variance")
    skew = float(np.mean(d**3)) / m2**1.5
    kurt = float(np.mean(d**4)) / m2**2
    jb = n / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    return jb, chi2_sf(jb, 2)


def het_ratio_test(residuals) -> tuple[float, float, int]:
    """Ratio of squared residuals, last third over first third, vs F(m, m)."""
    e = _resid(residuals)
    if e.size < 6:
        raise DiagnosticsError("heteroscedasticity test needs at least 6 residuals")
    m = e.size // 3
    den = float(np.sum(e[:m] ** 2))
    if den == 0.0:
        raise DiagnosticsError("degenerate residuals: zero sum of squares in first block")
    h = float(np.sum(e[-m:] ** 2)) / den
    return h, f_sf(h, m, m), m


def ljung_box(residuals, max_lag: int = 7) -> tuple[float, float]:
    e = _resid(residuals)
    n = e.size
    if max_lag < 1 or max_lag >= n - 1:
        raise DiagnosticsError(f"lag too large: {max_lag} for {n} residuals")
    d = e - e.mean()
    den = float(d @ d)
    if den == 0.0:
        raise DiagnosticsError("degenerate residuals: zero variance")
    q = 0.0
    for j in range(1, max_lag + 1):
        r = float(d[j:] @ d[:-j]) / den
        q += r * r / (n - j)
    q *= n * (n + 2)
    return q, chi2_sf(q, max_lag)


def coef_t_tests(fit: FitResult, df: Optional[int] = None):
    """(label, t, p) per coefficient; t and p are None when se is zero."""
    df = fit.df if df is None else df
    if df < 1:
        raise DiagnosticsError("t tests need at least one degree of freedom")
    out = []
    for c in fit.coefficients:
        if c.std_error > 0:
            t = c.estimate / c.std_error
            out.append((c.label, t, t_sf_two_sided(t, df)))
        else:
            out.append((c.label, None, None))
    return out


@dataclass(frozen=True)
class MovementStats:
    corr_qopq: float
    corr_qosq: float
    rmse_qopq: float
    rmse_qosq: float
    max_discrepancy_qopq: float
    max_discrepancy_qosq: float


def _pearson(a, b) -> float:
    if np.array_equal(a, b):
        return 1.0
    if np.ptp(a) == 0.0 or np.ptp(b) == 0.0:
        return float("nan")
    return float(np.clip(np.corrcoef(a, b)[0, 1], -1.0, 1.0))


def _compare(ind: Series, est: Series):
    diff = est.values - ind.values
    i = int(np.argmax(np.abs(diff)))
    return _pearson(ind.values, est.values), float(np.sqrt(np.mean(diff**2))), float(diff[i])


def movement_stats(indicator: Series, estimate: Series) -> MovementStats:
    """Compare growth rates of the estimate against those of the indicator.

    Discrepancies are estimate growth minus indicator growth, so a negative
    maximum means the estimate grew less than the indicator.
    """
    first = max(indicator.start, estimate.start)
    last = min(indicator.end, estimate.end)
    if last - first + 1 < 9:
        raise DiagnosticsError("movement statistics need at least 9 common quarters")
    ind, est = indicator.slice(first, last), estimate.slice(first, last)
    c1, r1, m1 = _compare(pct_change_prev(ind), pct_change_prev(est))
    c4, r4, m4 = _compare(pct_change_year_ago(ind), pct_change_year_ago(est))
    return MovementStats(c1, c4, r1, r4, m1, m4)


@dataclass(frozen=True)
class DiagnosticsReport:
    """Table of fit and residual statistics for one model.

    Fields are ``None`` when a statistic could not be computed in
    non-strict mode; ``notes`` then says why.
    """

    r_squared: Optional[float]
    standard_error: float
    f_statistic: Optional[float]
    f_pvalue: Optional[float]
    durbin_watson: Optional[float]
    jarque_bera: Optional[float]
    jarque_bera_pvalue: Optional[float]
    h_statistic: Optional[float]
    h_pvalue: Optional[float]
    h_block: Optional[int]
    ljung_box_q: Optional[float]
    ljung_box_pvalue: Optional[float]
    ljung_box_lags: int
    coefficient_tests: tuple
    whitened: bool
    notes: tuple[str, ...] = ()


def diagnose(
    fit: FitResult,
    *,
    ljung_box_lags: int = 7,
    whitened: bool = True,
    strict: bool = True,
) -> DiagnosticsReport:
    """Run the full battery on one fit.

    Residual tests use the GLS-whitened annual residuals unless
    ``whitened=False``, in which case the raw annual residuals are used.
    R-squared compares the constraint with the fitted annual regression
    part in original units. With ``strict=False`` a test that cannot be
    computed (too few years, zero residuals) is reported as ``None``.
    """
    e = fit.whitened_residuals if whitened else fit.low_freq_residuals.values
    notes: list[str] = []

    def attempt(name, func, *args, empty):
        try:
            return func(*args)
        except DiagnosticsError as exc:
            if strict:
                raise
            notes.append(f"{name}: {exc}")
            return empty

    r2, f, fp = attempt(
        "r_squared", r2_and_f, fit.constraint.values, fit.fitted_annual.values, fit.k,
        fit.intercept, empty=(None, None, None),
    )
    dw = attempt("durbin_watson", durbin_watson, e, empty=None)
    jb, jbp = attempt("jarque_bera", jarque_bera, e, empty=(None, None))
    h, hp, m = attempt("h_test", het_ratio_test, e, empty=(None, None, None))
    q, qp = attempt("ljung_box", ljung_box, e, ljung_box_lags, empty=(None, None))
    tests = attempt("t_tests", coef_t_tests, fit, empty=())
    return DiagnosticsReport(
        r_squared=r2,
        standard_error=math.sqrt(fit.sigma2),
        f_statistic=f,
        f_pvalue=fp,
        durbin_watson=dw,
        jarque_bera=jb,
        jarque_bera_pvalue=jbp,
        h_statistic=h,
        h_pvalue=hp,
        h_block=m,
        ljung_box_q=q,
        ljung_box_pvalue=qp,
        ljung_box_lags=ljung_box_lags,
        coefficient_tests=tuple(tests),
        whitened=whitened,
        notes=tuple(notes),
    )
