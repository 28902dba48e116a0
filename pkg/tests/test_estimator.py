import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from tempdis import ModelSpec, Series, TemporalDisaggregator, disaggregate
from tempdis.exceptions import EstimationError


@pytest.fixture
def data():
    rng = np.random.default_rng(8)
    x = 100 + np.cumsum(rng.normal(1, 2, 42))
    y = x[:40].reshape(10, 4).sum(axis=1) * 1.1 + rng.normal(0, 5, 10)
    return x, y


def test_params_roundtrip():
    est = TemporalDisaggregator(method="litterman", rho=0.3)
    assert est.get_params()["rho"] == 0.3
    c = clone(est.set_params(fit_intercept=False))
    assert c.get_params()["fit_intercept"] is False


@pytest.mark.parametrize("method", ["chowlin", "fernandez", "litterman"])
def test_matches_functional_api(method, data):
    x, y = data
    est = TemporalDisaggregator(method=method).fit(x, y)
    fit = disaggregate(
        ModelSpec(method, True, ("x",)),
        Series.annual(2000, y),
        {"x": Series.quarterly("2000Q1", x)},
    )
    np.testing.assert_allclose(est.predict(), fit.quarterly_estimate.values)
    assert est.intercept_ == pytest.approx(fit.params["intercept"])
    assert est.coef_[0] == pytest.approx(fit.params["x"])
    assert est.rho_ == fit.rho


def test_predict_extends_span(data):
    x, y = data
    est = TemporalDisaggregator(method="chowlin", rho=0.6).fit(x[:40], y)
    np.testing.assert_allclose(est.predict(x[:40]), est.predict())
    full = TemporalDisaggregator(method="chowlin", rho=0.6).fit(x, y)
    np.testing.assert_allclose(est.predict(x), full.predict(), rtol=1e-10)


def test_validation(data):
    x, y = data
    with pytest.raises(NotFittedError):
        TemporalDisaggregator().predict()
    with pytest.raises(EstimationError, match="insufficient quarters"):
        TemporalDisaggregator().fit(x[:30], y)
    with pytest.raises(ValueError):
        TemporalDisaggregator().fit(np.r_[x[:-1], np.nan], y)
    est = TemporalDisaggregator(method="fernandez").fit(x, y)
    with pytest.raises(EstimationError, match="features"):
        est.predict(np.column_stack([x, x]))
