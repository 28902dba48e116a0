"""GLS temporal disaggregation: Chow-Lin, Fernandez and Litterman.

All three models regress the annual constraint on annual sums of the
quarterly regressors and differ only in the covariance assumed for the
quarterly disturbance:

* Chow-Lin:  stationary AR(1), ``V[i, j] = rho**|i-j| / (1 - rho**2)``
* Fernandez: random walk, ``V = inv(D'D)``
* Litterman: random walk with AR(1) increments, ``V = inv(D'H'HD)``

The quarterly estimate is ``X b + V C' inv(C V C') u`` where ``u`` are
the annual GLS residuals. Quarters past the last constrained year have
zero columns in ``C`` so the same expression extrapolates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy import linalg, special

from .exceptions import EstimationError, SeriesError
from .indicators import step_dummy
from .series import Frequency, PeriodId, Series

__all__ = [
    "Method",
    "ModelSpec",
    "Coefficient",
    "FitResult",
    "RhoProfile",
    "aggregation_matrix",
    "covariance_matrix",
    "gls_fit_given_rho",
    "estimate_rho",
    "build_design",
    "disaggregate",
]

RHO_LIMIT = 0.999
DEFAULT_RHO_BOUNDS = (-0.99, 0.99)


class Method(str, Enum):
    CHOW_LIN = "chowlin"
    FERNANDEZ = "fernandez"
    LITTERMAN = "litterman"

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, Method):
            return value
        key = str(value).lower().replace("-", "").replace("_", "").replace(" ", "")
        key = key.replace("á", "a")
        try:
            return cls(key)
        except ValueError:
            raise EstimationError(f"unknown method {value!r}") from None

    @property
    def has_rho(self) -> bool:
        return self is not Method.FERNANDEZ

    @property
    def display_name(self) -> str:
        return {"chowlin": "Chow-Lin", "fernandez": "Fernandez", "litterman": "Litterman"}[
            self.value
        ]


def aggregation_matrix(n_years: int, n_quarters: int) -> np.ndarray:
    """Annual-sum map; columns past ``4 * n_years`` are zero."""
    if n_years < 1:
        raise EstimationError("insufficient quarters: need at least one year")
    if n_quarters < 4 * n_years:
        raise EstimationError(
            f"insufficient quarters: {n_quarters} quarters for {n_years} years"
        )
    C = np.zeros((n_years, n_quarters))
    for y in range(n_years):
        C[y, 4 * y : 4 * y + 4] = 1.0
    return C


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not math.isfinite(rho) or abs(rho) > RHO_LIMIT:
        raise EstimationError(f"rho out of admissible range: {rho!r}")
    return rho


def covariance_matrix(method, rho: float, n: int) -> np.ndarray:
    """Quarterly disturbance covariance, up to the scale sigma^2."""
    method = Method.parse(method)
    if n < 1:
        raise EstimationError("covariance size must be positive")
    idx = np.arange(n)
    if method is Method.FERNANDEZ:
        # inv(D'D) with D the first-difference matrix anchored at the first obs
        return np.minimum.outer(idx, idx) + 1.0
    rho = _check_rho(rho)
    if method is Method.CHOW_LIN:
        return rho ** np.abs(np.subtract.outer(idx, idx)) / (1.0 - rho**2)
    # inv(HD) is lower triangular with A[i, j] = sum_{m=0}^{i-j} rho**m
    lag = np.subtract.outer(idx, idx)
    A = np.zeros((n, n))
    low = lag >= 0
    if rho == 0.0:
        A[low] = 1.0
    else:
        A[low] = (1.0 - rho ** (lag[low] + 1.0)) / (1.0 - rho)
    return A @ A.T


def _aggregate_cov(V: np.ndarray, n_years: int) -> tuple[np.ndarray, np.ndarray]:
    """Return ``C V C'`` and ``V C'`` without forming ``C``."""
    nq = V.shape[0]
    VC = V[:, : 4 * n_years].reshape(nq, n_years, 4).sum(axis=2)
    VL = VC[: 4 * n_years].reshape(n_years, 4, n_years).sum(axis=1)
    return 0.5 * (VL + VL.T), VC


def low_freq_covariance(method, rho: float, n_years: int) -> np.ndarray:
    """``C V C'`` computed directly from the model structure.

    Only the first ``4 * n_years`` quarters enter the annual covariance,
    so this does not depend on how far the quarterly span extends.
    """
    method = Method.parse(method)
    n = 4 * n_years
    if method is Method.FERNANDEZ:
        return _aggregate_cov(covariance_matrix(method, 1.0, n), n_years)[0]
    rho = _check_rho(rho)
    if method is Method.CHOW_LIN:
        # Toeplitz in years: f(d) = sum_{a,b} v(4d + a - b), v(k) = rho^|k| / (1 - rho^2)
        k = np.arange(-3, n + 4)
        v = rho ** np.abs(k).astype(float) / (1.0 - rho**2)
        ab = (np.arange(4)[:, None] - np.arange(4)[None, :]).ravel()
        f = v[(4 * np.arange(n_years))[:, None] + ab[None, :] + 3].sum(axis=1)
        return linalg.toeplitz(f)
    # Litterman: V = A A', so C V C' = (C A)(C A)'
    pw = rho ** np.arange(n + 1, dtype=float)
    lag = np.subtract.outer(np.arange(n), np.arange(n))
    if rho == 0.0:
        A = (lag >= 0).astype(float)
    else:
        A = np.where(lag >= 0, (1.0 - pw[np.clip(lag + 1, 0, n)]) / (1.0 - rho), 0.0)
    B = A.reshape(n_years, 4, n).sum(axis=1)
    VL = B @ B.T
    return 0.5 * (VL + VL.T)


def _annual_sums(X: np.ndarray, n_years: int) -> np.ndarray:
    return X[: 4 * n_years].reshape(n_years, 4, -1).sum(axis=1)


@dataclass(frozen=True)
class _GLS:
    beta: np.ndarray
    cov_unscaled: np.ndarray
    resid: np.ndarray
    whitened: np.ndarray
    rss: float
    loglik: float
    chol: np.ndarray


def _gls(y: np.ndarray, XL: np.ndarray, VL: np.ndarray) -> _GLS:
    n = y.size
    try:
        L = linalg.cholesky(VL, lower=True)
    except linalg.LinAlgError:
        raise EstimationError("covariance not positive definite") from None
    Xw = linalg.solve_triangular(L, XL, lower=True)
    yw = linalg.solve_triangular(L, y, lower=True)
    Q, R = np.linalg.qr(Xw)
    beta = linalg.solve_triangular(R, Q.T @ yw)
    Rinv = linalg.solve_triangular(R, np.eye(R.shape[0]))
    ew = yw - Xw @ beta
    resid = y - XL @ beta
    rss = float(ew @ ew)
    if rss <= 1e-26 * max(float(yw @ yw), np.finfo(float).tiny):
        # exact fit up to rounding
        rss = 0.0
        ew, resid = np.zeros_like(ew), np.zeros_like(resid)
    logdet = 2.0 * float(np.log(np.diag(L)).sum())
    if rss == 0.0:
        loglik = math.inf
    else:
        loglik = -0.5 * n * (math.log(2.0 * math.pi) + math.log(rss / n) + 1.0) - 0.5 * logdet
    return _GLS(beta, Rinv @ Rinv.T, resid, ew, rss, loglik, L)


def _check_design(y: np.ndarray, X: np.ndarray) -> tuple[int, int, int]:
    if X.ndim != 2:
        raise EstimationError("regressor matrix must be 2-dimensional")
    n_years, (nq, k) = y.size, X.shape
    if k < 1:
        raise EstimationError("at least one regressor is required")
    if nq < 4 * n_years:
        raise EstimationError(
            f"insufficient quarters: {nq} quarters for {n_years} constraint years"
        )
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise EstimationError("non-finite values in regressors or constraint")
    if n_years <= k:
        raise EstimationError(
            f"insufficient degrees of freedom: {n_years} years for {k} regressors"
        )
    if np.linalg.matrix_rank(_annual_sums(X, n_years)) < k:
        raise EstimationError("collinear regressors after annual aggregation")
    return n_years, nq, k


@dataclass(frozen=True)
class Coefficient:
    label: str
    estimate: float
    std_error: float
    t_stat: Optional[float]
    p_value: Optional[float]


@dataclass(frozen=True)
class RhoProfile:
    rho: np.ndarray
    loglik: np.ndarray


@dataclass(frozen=True)
class FitResult:
    """Estimated model plus everything the diagnostics need."""

    method: Method
    coefficients: tuple[Coefficient, ...]
    rho: float
    rho_estimated: bool
    sigma2: float
    low_freq_residuals: Series
    fitted_annual: Series
    quarterly_estimate: Series
    log_likelihood: float
    whitened_residuals: np.ndarray
    n_years: int
    intercept: bool = False
    rho_profile: Optional[RhoProfile] = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.coefficients)

    @property
    def df(self) -> int:
        return self.n_years - self.k

    @property
    def params(self) -> dict[str, float]:
        return {c.label: c.estimate for c in self.coefficients}

    @property
    def rho_display(self) -> str:
        if self.method is Method.FERNANDEZ:
            return "1 (fixed, Fernandez)"
        return f"{self.rho:.3f}"

    @property
    def constraint(self) -> Series:
        return self.fitted_annual + self.low_freq_residuals


def _coefficients(labels, beta, cov_unscaled, sigma2, df) -> tuple[Coefficient, ...]:
    se = np.sqrt(np.maximum(np.diag(cov_unscaled) * sigma2, 0.0))
    out = []
    for label, b, s in zip(labels, beta, se):
        if s > 0:
            t = float(b / s)
            p = float(2.0 * special.stdtr(df, -abs(t)))
            out.append(Coefficient(label, float(b), float(s), t, p))
        else:
            out.append(Coefficient(label, float(b), float(s), None, None))
    return tuple(out)


def _fit_arrays(
    y: np.ndarray,
    X: np.ndarray,
    method: Method,
    rho: float,
) -> tuple[_GLS, np.ndarray]:
    n_years = y.size
    V = covariance_matrix(method, rho, X.shape[0])
    VL, VC = _aggregate_cov(V, n_years)
    g = _gls(y, _annual_sums(X, n_years), VL)
    smooth = VC @ linalg.cho_solve((g.chol, True), g.resid)
    return g, X @ g.beta + smooth


def gls_fit_given_rho(
    y_annual: Series,
    X,
    method,
    rho: Optional[float] = None,
    *,
    labels: Optional[Sequence[str]] = None,
    intercept: bool = False,
    rho_estimated: bool = False,
    rho_profile: Optional[RhoProfile] = None,
) -> FitResult:
    """Fit the model for a known ``rho``.

    ``X`` holds one column per regressor and one row per quarter, starting
    at Q1 of the first constraint year. Rows past the last constraint year
    are extrapolated.
    """
    method = Method.parse(method)
    if y_annual.freq != Frequency.ANNUAL:
        raise SeriesError("constraint must be an annual series")
    y = np.asarray(y_annual.values, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n_years, nq, k = _check_design(y, X)
    if method is Method.FERNANDEZ:
        rho = 1.0
    elif rho is None:
        raise EstimationError(f"{method.display_name} requires a rho value")
    else:
        rho = _check_rho(rho)
    labels = list(labels) if labels is not None else [f"x{i}" for i in range(k)]
    if len(labels) != k:
        raise EstimationError("one label per regressor column is required")

    g, yq = _fit_arrays(y, X, method, rho)
    df = n_years - k
    sigma2 = g.rss / df
    q_start = PeriodId(y_annual.start.year, 1)
    return FitResult(
        method=method,
        coefficients=_coefficients(labels, g.beta, g.cov_unscaled, sigma2, df),
        rho=float(rho),
        rho_estimated=rho_estimated,
        sigma2=sigma2,
        low_freq_residuals=y_annual.with_values(g.resid),
        fitted_annual=y_annual.with_values(y - g.resid),
        quarterly_estimate=Series.quarterly(q_start, yq),
        log_likelihood=g.loglik,
        whitened_residuals=g.whitened,
        n_years=n_years,
        intercept=intercept,
        rho_profile=rho_profile,
    )


def _rho_grid(lo: float, hi: float, step: float) -> np.ndarray:
    scale = round(1.0 / step)
    ks = np.arange(math.ceil(lo * scale - 1e-9), math.floor(hi * scale + 1e-9) + 1)
    return ks / scale


def _pick(rhos: np.ndarray, lls: np.ndarray) -> int:
    """Index of the best likelihood; near-ties go to the smallest |rho|."""
    best = np.max(lls)
    if best == math.inf:
        cand = np.flatnonzero(lls == math.inf)
    else:
        cand = np.flatnonzero(lls >= best - 1e-10 * max(1.0, abs(best)))
    return int(min(cand, key=lambda i: (abs(rhos[i]), -rhos[i])))


def estimate_rho(
    y_annual: Series,
    X,
    method,
    bounds: tuple[float, float] = DEFAULT_RHO_BOUNDS,
) -> tuple[float, RhoProfile]:
    """Maximise the concentrated Gaussian log-likelihood over rho.

    Coarse grid with step 0.01 over ``bounds``, then a 0.001 grid within one
    coarse step of the best point.
    """
    method = Method.parse(method)
    if not method.has_rho:
        raise EstimationError("rho not applicable to the Fernandez model")
    lo, hi = (float(b) for b in bounds)
    if not -RHO_LIMIT <= lo <= hi <= RHO_LIMIT:
        raise EstimationError(f"rho out of admissible range: bounds {bounds!r}")
    y = np.asarray(y_annual.values, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n_years, nq, _ = _check_design(y, X)
    XL = _annual_sums(X, n_years)

    cache: dict[float, float] = {}

    def loglik(r: float) -> float:
        r = round(r, 3)
        if r not in cache:
            VL = low_freq_covariance(method, r, n_years)
            try:
                ll = _gls(y, XL, VL).loglik
            except EstimationError:
                ll = -math.inf
            cache[r] = ll if not math.isnan(ll) else -math.inf
        return cache[r]

    coarse = _rho_grid(lo, hi, 0.01)
    lls = np.array([loglik(r) for r in coarse])
    if not np.any(np.isfinite(lls) | (lls == math.inf)) or np.all(lls == -math.inf):
        raise EstimationError("likelihood evaluation failed on the whole rho grid")
    centre = coarse[_pick(coarse, lls)]
    fine = _rho_grid(max(lo, centre - 0.01), min(hi, centre + 0.01), 0.001)
    for r in fine:
        loglik(r)

    rhos = np.array(sorted(cache))
    lls = np.array([cache[r] for r in rhos])
    return float(rhos[_pick(rhos, lls)]), RhoProfile(rhos, lls)


@dataclass(frozen=True)
class ModelSpec:
    """Declarative model description.

    ``dummies`` are ``(from_year, to_year)`` step dummies. ``rho`` is a
    number or ``"estimate"``; it is ignored for Fernandez.
    """

    method: Method = Method.CHOW_LIN
    intercept: bool = True
    indicator_names: tuple[str, ...] = ()
    dummies: tuple[tuple[int, int], ...] = ()
    rho: Union[float, str] = "estimate"
    rho_bounds: tuple[float, float] = DEFAULT_RHO_BOUNDS

    def __post_init__(self):
        object.__setattr__(self, "method", Method.parse(self.method))
        object.__setattr__(self, "indicator_names", tuple(self.indicator_names))
        object.__setattr__(
            self, "dummies", tuple((int(a), int(b)) for a, b in self.dummies)
        )
        if not (self.intercept or self.indicator_names or self.dummies):
            raise EstimationError("model needs at least one regressor")
        for a, b in self.dummies:
            if a > b:
                raise SeriesError(f"invalid dummy range ({a}, {b})")
        if isinstance(self.rho, str):
            if self.rho != "estimate":
                raise EstimationError(f"rho must be a number or 'estimate', got {self.rho!r}")
        else:
            _check_rho(self.rho)

    @property
    def n_regressors(self) -> int:
        return int(self.intercept) + len(self.indicator_names) + len(self.dummies)

    @property
    def labels(self) -> list[str]:
        out = ["intercept"] if self.intercept else []
        out += list(self.indicator_names)
        out += [f"SD({a},{b})" for a, b in self.dummies]
        return out


def _resolve_span(y_annual: Series, indicators: Mapping[str, Series], target_span):
    first_q = PeriodId(y_annual.start.year, 1)
    last_needed = PeriodId(y_annual.end.year, 4)
    if target_span is None:
        if indicators:
            last = min(s.end for s in indicators.values())
        else:
            last = last_needed
        first = first_q
    else:
        first, last = (
            p if isinstance(p, PeriodId) else PeriodId.parse(str(p)) for p in target_span
        )
    if first != first_q:
        raise SeriesError(
            f"target span must start at {first_q}, the first quarter of the constraint"
        )
    if last < last_needed:
        raise SeriesError(
            f"target span {first}..{last} does not cover constraint years up to "
            f"{y_annual.end.year}"
        )
    return first, last


def build_design(
    spec: ModelSpec,
    indicators: Mapping[str, Series],
    first: PeriodId,
    last: PeriodId,
) -> np.ndarray:
    """Regressor matrix over ``first..last`` in ``spec.labels`` order."""
    n = last - first + 1
    span = Series.quarterly(first, np.zeros(n))
    cols = []
    if spec.intercept:
        cols.append(np.ones(n))
    for name in spec.indicator_names:
        if name not in indicators:
            raise SeriesError(f"indicator {name!r} not supplied")
        s = indicators[name]
        if s.freq != Frequency.QUARTERLY:
            raise SeriesError(f"indicator {name!r} must be quarterly")
        if not (s.contains(first) and s.contains(last)):
            raise SeriesError(
                f"indicator {name!r} ({s.start}..{s.end}) does not cover {first}..{last}"
            )
        cols.append(s.slice(first, last).values)
    for a, b in spec.dummies:
        d = step_dummy(a, b, span).values
        if not d.any():
            raise SeriesError(f"dummy outside span: SD({a},{b}) vs {first}..{last}")
        cols.append(d)
    return np.column_stack(cols)


def disaggregate(
    spec: ModelSpec,
    y_annual: Series,
    indicators: Mapping[str, Series],
    target_span=None,
) -> FitResult:
    """Quarterly estimates over ``target_span`` (first, last quarter).

    The span must start at Q1 of the first constraint year and reach at
    least Q4 of the last one; any further quarters are extrapolated. When
    omitted, it runs to the end of the shortest indicator.
    """
    first, last = _resolve_span(y_annual, indicators, target_span)
    X = build_design(spec, indicators, first, last)
    profile = None
    if not spec.method.has_rho:
        rho = None
    elif spec.rho == "estimate":
        rho, profile = estimate_rho(y_annual, X, spec.method, spec.rho_bounds)
    else:
        rho = float(spec.rho)
    return gls_fit_given_rho(
        y_annual,
        X,
        spec.method,
        rho,
        labels=spec.labels,
        intercept=spec.intercept,
        rho_estimated=profile is not None,
        rho_profile=profile,
    )
