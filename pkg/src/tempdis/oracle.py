"""Dense reference implementation of :func:`tempdis.engine.disaggregate`.

Every matrix is built element by element and every inverse is taken
explicitly. It is slow and only meant to check the production path on
small problems.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .engine import Coefficient, FitResult, Method, ModelSpec, RhoProfile
from .exceptions import EstimationError, SeriesError
from .series import PeriodId, Series

MAX_QUARTERS = 64


def _conversion(n_years, n_quarters):
    C = np.zeros((n_years, n_quarters))
    for y in range(n_years):
        for q in range(n_quarters):
            if 4 * y <= q < 4 * y + 4:
                C[y, q] = 1.0
    return C


def _difference(n, rho):
    D = np.eye(n)
    for i in range(1, n):
        D[i, i - 1] = -rho
    return D


def _cov(method, rho, n):
    if method is Method.CHOW_LIN:
        V = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                V[i, j] = rho ** abs(i - j) / (1.0 - rho**2)
        return V
    D = _difference(n, 1.0)
    if method is Method.FERNANDEZ:
        return np.linalg.inv(D.T @ D)
    H = _difference(n, rho)
    return np.linalg.inv(D.T @ H.T @ H @ D)


def _solve(y, X, C, V):
    VL = C @ V @ C.T
    W = np.linalg.inv(VL)
    XL = C @ X
    M = np.linalg.inv(XL.T @ W @ XL)
    beta = M @ XL.T @ W @ y
    u = y - XL @ beta
    rss = float(u @ W @ u)
    return beta, M, u, rss, VL, W


def _loglik(y, X, C, V):
    beta, M, u, rss, VL, W = _solve(y, X, C, V)
    n = y.size
    sign, logdet = np.linalg.slogdet(VL)
    if sign <= 0:
        return -math.inf
    if rss <= 1e-26 * float(y @ W @ y):
        return math.inf
    return -n / 2 * (math.log(2 * math.pi) + math.log(rss / n) + 1) - logdet / 2


def brute_force_oracle(spec: ModelSpec, y_annual: Series, indicators, target_span=None):
    """Same contract as ``disaggregate`` for at most 64 quarters."""
    y = np.array(y_annual.values, dtype=float)
    n_years = y.size
    first = PeriodId(y_annual.start.year, 1)
    if target_span is None:
        last = min(s.end for s in indicators.values()) if indicators else PeriodId(
            y_annual.end.year, 4
        )
    else:
        first_given, last = (PeriodId.parse(str(p)) for p in target_span)
        if first_given != first:
            raise SeriesError("target span must start at the first constraint quarter")
    nq = last - first + 1
    if nq > MAX_QUARTERS:
        raise EstimationError(f"oracle limited to {MAX_QUARTERS} quarters")
    if nq < 4 * n_years:
        raise SeriesError("target span does not cover all constraint years")

    columns = []
    if spec.intercept:
        columns.append([1.0] * nq)
    for name in spec.indicator_names:
        s = indicators[name]
        off = first - s.start
        columns.append([float(s.values[off + q]) for q in range(nq)])
    for a, b in spec.dummies:
        col = []
        for q in range(nq):
            year = first.shift(q).year
            col.append(1.0 if a <= year <= b else 0.0)
        columns.append(col)
    X = np.array(columns).T
    k = X.shape[1]
    C = _conversion(n_years, nq)
    if n_years <= k:
        raise EstimationError("insufficient degrees of freedom")
    if np.linalg.matrix_rank(C @ X) < k:
        raise EstimationError("collinear regressors")

    method = spec.method
    profile = None
    if method is Method.FERNANDEZ:
        rho = 1.0
    elif spec.rho == "estimate":
        lo, hi = spec.rho_bounds
        coarse = [r / 100 for r in range(round(lo * 100), round(hi * 100) + 1)]
        seen = {r: _loglik(y, X, C, _cov(method, r, nq)) for r in coarse}

        def best(pts):
            top = max(seen[r] for r in pts)
            tol = 0 if top == math.inf else 1e-10 * max(1.0, abs(top))
            ties = [r for r in pts if seen[r] >= top - tol]
            return min(ties, key=lambda r: (abs(r), -r))

        c = best(coarse)
        for j in range(-10, 11):
            r = round(c + j / 1000, 3)
            if lo <= r <= hi and r not in seen:
                seen[r] = _loglik(y, X, C, _cov(method, r, nq))
        rho = best(sorted(seen))
        pts = sorted(seen)
        profile = RhoProfile(np.array(pts), np.array([seen[r] for r in pts]))
    else:
        rho = float(spec.rho)

    V = _cov(method, rho, nq)
    beta, M, u, rss, VL, W = _solve(y, X, C, V)
    yq = X @ beta + V @ C.T @ W @ u
    df = n_years - k
    sigma2 = rss / df
    coefs = []
    for label, b, m in zip(spec.labels, beta, np.diag(M)):
        se = math.sqrt(max(sigma2 * m, 0.0))
        if se > 0:
            t = b / se
            coefs.append(Coefficient(label, b, se, t, 2 * stats.t.sf(abs(t), df)))
        else:
            coefs.append(Coefficient(label, b, se, None, None))
    P = np.linalg.inv(np.linalg.cholesky(VL))
    return FitResult(
        method=method,
        coefficients=tuple(coefs),
        rho=float(rho),
        rho_estimated=profile is not None,
        sigma2=sigma2,
        low_freq_residuals=y_annual.with_values(u),
        fitted_annual=y_annual.with_values(y - u),
        quarterly_estimate=Series.quarterly(first, yq),
        log_likelihood=_loglik(y, X, C, V),
        whitened_residuals=P @ u,
        n_years=n_years,
        intercept=spec.intercept,
        rho_profile=profile,
    )
