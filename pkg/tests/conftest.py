import numpy as np
import pytest

from tempdis.engine import Method, ModelSpec
from tempdis.series import Series

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    def _record(label: str, ok: bool, detail: str = ""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_instance(rng, n_years, n_quarters, n_ind, method, rho="estimate", intercept=None):
    """Random constraint, indicators and spec for a desk-scale problem."""
    if intercept is None:
        intercept = bool(rng.integers(2))
    names = tuple(f"i{j}" for j in range(n_ind))
    indicators = {
        n: Series.quarterly("2001Q1", 50 + np.cumsum(rng.normal(0.5, 2.0, n_quarters)))
        for n in names
    }
    y = Series.annual(2001, rng.normal(4 * 60 * (n_ind or 1), 20, n_years))
    spec = ModelSpec(Method.parse(method), intercept, names, (), rho)
    return spec, y, indicators


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
