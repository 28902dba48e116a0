"""scikit-learn style front end to the disaggregation engine."""

from __future__ import annotations

import numpy as np
from scipy import linalg
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .engine import (
    DEFAULT_RHO_BOUNDS,
    Method,
    _aggregate_cov,
    covariance_matrix,
    estimate_rho,
    gls_fit_given_rho,
)
from .exceptions import EstimationError
from .series import Series


def check_quarterly_design(X, n_years=None):
    """Validate a quarterly regressor matrix (rows are quarters)."""
    X = check_array(X, ensure_2d=False, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if n_years is not None and X.shape[0] < 4 * n_years:
        raise EstimationError(
            f"insufficient quarters: {X.shape[0]} rows for {n_years} annual values"
        )
    return X


def check_annual_target(y):
    y = check_array(y, ensure_2d=False, dtype=np.float64)
    if y.ndim != 1:
        raise EstimationError("annual target must be one-dimensional")
    return y


class TemporalDisaggregator(BaseEstimator):
    """Distribute annual totals over quarters using related indicators.

    Parameters
    ----------
    method : {"chowlin", "fernandez", "litterman"}
    fit_intercept : bool, default=True
        Prepend a constant column to ``X``.
    rho : float or "estimate", default="estimate"
        Autoregressive parameter of the quarterly disturbance. Ignored for
        Fernandez.
    rho_bounds : tuple, default=(-0.99, 0.99)
        Search interval when ``rho="estimate"``.
    start_year : int, default=2000
        Calendar label of the first annual value; only used for the
        :class:`~tempdis.series.Series` held in ``result_``.

    ``fit(X, y)`` takes quarterly regressors ``X`` (rows are quarters
    starting at Q1 of the first year) and annual totals ``y``; rows of ``X``
    beyond ``4 * len(y)`` are extrapolated.

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    intercept_ : float
    rho_ : float
    sigma2_ : float
    result_ : FitResult
    """

    def __init__(
        self,
        method="chowlin",
        fit_intercept=True,
        rho="estimate",
        rho_bounds=DEFAULT_RHO_BOUNDS,
        start_year=2000,
    ):
        self.method = method
        self.fit_intercept = fit_intercept
        self.rho = rho
        self.rho_bounds = rho_bounds
        self.start_year = start_year

    def _design(self, X):
        if self.fit_intercept:
            return np.column_stack([np.ones(X.shape[0]), X])
        return X

    def fit(self, X, y):
        y = check_annual_target(y)
        X = check_quarterly_design(X, y.size)
        method = Method.parse(self.method)
        self.n_features_in_ = X.shape[1]
        Z = self._design(X)
        y_s = Series.annual(int(self.start_year), y)
        labels = (["intercept"] if self.fit_intercept else []) + [
            f"x{i}" for i in range(X.shape[1])
        ]
        profile = None
        if not method.has_rho:
            rho = None
        elif isinstance(self.rho, str):
            if self.rho != "estimate":
                raise EstimationError(f"rho must be a number or 'estimate', got {self.rho!r}")
            rho, profile = estimate_rho(y_s, Z, method, tuple(self.rho_bounds))
        else:
            rho = float(self.rho)
        res = gls_fit_given_rho(
            y_s,
            Z,
            method,
            rho,
            labels=labels,
            intercept=self.fit_intercept,
            rho_estimated=profile is not None,
            rho_profile=profile,
        )
        beta = np.array([c.estimate for c in res.coefficients])
        self.result_ = res
        self.intercept_ = float(beta[0]) if self.fit_intercept else 0.0
        self.coef_ = beta[1:] if self.fit_intercept else beta
        self.rho_ = res.rho
        self.sigma2_ = res.sigma2
        self.n_years_ = y.size
        self.residuals_ = np.array(res.low_freq_residuals.values)
        return self

    def predict(self, X=None):
        """Quarterly estimates.

        With ``X=None`` returns the estimates over the span seen in ``fit``.
        A new ``X`` must start at the same quarter and may be longer, in
        which case the extra quarters are extrapolated.
        """
        check_is_fitted(self, "result_")
        if X is None:
            return np.array(self.result_.quarterly_estimate.values)
        X = check_quarterly_design(X, self.n_years_)
        if X.shape[1] != self.n_features_in_:
            raise EstimationError(
                f"X has {X.shape[1]} features, model was fitted with {self.n_features_in_}"
            )
        method = Method.parse(self.method)
        Z = self._design(X)
        V = covariance_matrix(method, self.rho_, Z.shape[0])
        VL, VC = _aggregate_cov(V, self.n_years_)
        beta = np.r_[self.intercept_, self.coef_] if self.fit_intercept else self.coef_
        smooth = VC @ linalg.solve(VL, self.residuals_, assume_a="pos")
        return Z @ beta + smooth

    def fit_predict(self, X, y):
        return self.fit(X, y).predict()
