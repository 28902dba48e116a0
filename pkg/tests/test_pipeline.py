import json
import math
from pathlib import Path

import numpy as np
import pytest

from tempdis import __version__
from tempdis.cli import main
from tempdis.config import parse_config
from tempdis.exceptions import ConfigError, SeriesError
from tempdis.io import PValue, Stat, dumps_report, load_series_csv, write_series_csv
from tempdis.pipeline import compute_job, emit_report, run_job
from tempdis.series import Frequency, PeriodId, Series


def write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def q_csv(path, start, values):
    s = Series.quarterly(start, values)
    write_series_csv(s, path)
    return path


def a_csv(path, start, values):
    write_series_csv(Series.annual(start, values), path)
    return path


def config(tmp_path, jobs, **top):
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"jobs": jobs, **top}), encoding="utf-8")
    return cfg


# --- CSV ---------------------------------------------------------------------

def test_load_quarterly(tmp_path):
    p = write(tmp_path / "q.csv", "period,value\n1999Q1,100.5\n1999Q2,101.0")
    s = load_series_csv(p, Frequency.QUARTERLY)
    assert s.freq == Frequency.QUARTERLY and len(s) == 2 and s.values[0] == 100.5


def test_load_annual_with_whitespace_and_blank_line(tmp_path):
    p = write(tmp_path / "a.csv", "period,value\n 1999 , 400\n2000,410\n\n")
    s = load_series_csv(p)
    assert s.freq == Frequency.ANNUAL and s.values.tolist() == [400, 410]


def test_load_gap(tmp_path):
    p = write(tmp_path / "g.csv", "period,value\n1999Q1,1\n1999Q3,2\n")
    with pytest.raises(SeriesError, match="non-contiguous series.*1999Q2"):
        load_series_csv(p)


def test_load_malformed_period_reports_line(tmp_path):
    p = write(tmp_path / "m.csv", "period,value\n1999Q1,1\n1999-Q2,2\n")
    with pytest.raises(SeriesError, match=r"m\.csv:3"):
        load_series_csv(p)


def test_load_wrong_frequency(tmp_path):
    p = write(tmp_path / "w.csv", "period,value\n1999,1\n")
    with pytest.raises(SeriesError, match="not quarterly"):
        load_series_csv(p, Frequency.QUARTERLY)


def test_csv_roundtrip_is_exact(tmp_path):
    s = Series.quarterly("2001Q3", np.random.default_rng(0).normal(size=9))
    write_series_csv(s, tmp_path / "r.csv")
    assert load_series_csv(tmp_path / "r.csv") == s


# --- JSON formatting ----------------------------------------------------------

def test_report_number_formatting():
    text = dumps_report({"q": Stat(13.4239), "p": PValue(0.9996), "p2": PValue(0.0621), "n": None})
    assert '"q": 13.423900' in text
    assert '"p": 1,' in text
    assert '"p2": 0.062' in text
    assert '"n": null' in text
    assert json.loads(text)["q"] == 13.4239
    assert dumps_report({"x": Stat(math.nan)}).strip() == '{\n  "x": null\n}'


# --- config -------------------------------------------------------------------

def _job(**kw):
    job = {"name": "J", "constraint": "c.csv", "indicators": [{"label": "i", "path": "i.csv"}]}
    job.update(kw)
    return job


def test_parse_cg_style(tmp_path):
    cfg = config(tmp_path, [_job(method="fernandez", intercept=True, dummies=[[2012, 2015], [2021, 2024]])])
    (job,) = parse_config(cfg)
    assert job.spec.n_regressors == 4
    assert job.ljung_box_lags == 7 and job.whitened is True
    assert job.constraint == tmp_path / "c.csv"
    assert job.output_dir == tmp_path / "output" / "J"


def test_parse_ssf_style(tmp_path):
    (job,) = parse_config(config(tmp_path, [_job(method="chowlin", intercept=False, rho="estimate")]))
    assert job.spec.n_regressors == 1 and job.rho == "estimate"


@pytest.mark.parametrize(
    "job, match",
    [
        (_job(method="denton"), "unknown method"),
        ({"name": "J", "method": "fernandez", "indicators": []}, "'constraint'"),
        (_job(method="fernandez", dummies=[[2015, 2012]]), "invalid dummy range"),
        (_job(method="fernandez", colour="red"), "'colour'"),
        (_job(method="chowlin", rho=1.5), "admissible"),
        (_job(method="chowlin", diagnostics={"ljung_box_lags": 0}), "ljung_box_lags"),
        (_job(method="fernandez", intercept=False, indicators=[]), "non-empty"),
    ],
)
def test_parse_rejects(tmp_path, job, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(config(tmp_path, [job]))


def test_parse_duplicate_names(tmp_path):
    with pytest.raises(ConfigError, match="duplicate job name"):
        parse_config(config(tmp_path, [_job(method="fernandez"), _job(method="chowlin")]))


# --- running jobs ---------------------------------------------------------------

def test_toy_perfect_indicator(tmp_path):
    ind = [1, 2, 3, 4, 2, 3, 4, 5]
    q_csv(tmp_path / "i.csv", "2000Q1", ind)
    a_csv(tmp_path / "c.csv", 2000, [10, 14])
    (job,) = parse_config(config(tmp_path, [_job(method="chowlin", intercept=False, rho=0.0)]))
    rep = run_job(job)
    out = load_series_csv(tmp_path / "output" / "J" / "J_quarterly.csv")
    np.testing.assert_allclose(out.values, ind, rtol=1e-12)
    data = json.loads((tmp_path / "output" / "J" / "J_report.json").read_text())
    assert data["diagnostics"]["r_squared"] == 1.0
    assert data["diagnostics"]["durbin_watson"] is None
    assert data["indicator_quality"] is None and data["notes"]
    assert rep.fit.sigma2 == 0.0


def test_toy_arrears_job(tmp_path):
    q_csv(tmp_path / "i.csv", "2000Q1", [100, 100, 100, 100, 150, 110, 110, 110, 110, 110, 110, 110])
    a_csv(tmp_path / "c.csv", 2000, [440, 440, 440])
    events = [{
        "label": "agreement",
        "disbursements": [{"period": "2001Q1", "amount": 40}],
        "accruals": [{"year": 2000, "allocation": 40, "weights": [0.25, 0.25, 0.25, 0.25]}],
    }]
    write(tmp_path / "ev.json", json.dumps(events))
    job = _job(method="chowlin", intercept=False, rho=0.0, arrears="ev.json")
    (cfg,) = parse_config(config(tmp_path, [job]))
    rep = compute_job(cfg)
    assert rep.indicator.values.tolist() == [110.0] * 12
    assert rep.quality.coverage_rate_pct == pytest.approx(100.0)
    assert rep.quality.per_year_coverage == pytest.approx((100.0,) * 3)


def test_plot_file_rebased(tmp_path):
    rng = np.random.default_rng(4)
    x = 100 + np.cumsum(rng.normal(1, 1, 24))
    q_csv(tmp_path / "i.csv", "2000Q1", x)
    a_csv(tmp_path / "c.csv", 2000, x.reshape(6, 4).sum(1) * 1.05 + rng.normal(0, 1, 6))
    (cfg,) = parse_config(config(tmp_path, [_job(method="fernandez")]))
    run_job(cfg, tmp_path / "out")
    lines = (tmp_path / "out" / "J" / "J_plot.csv").read_text().splitlines()
    assert lines[0] == "period,indicator_rebased,estimate_rebased"
    assert lines[1] == "2000Q1,100.0,100.0"
    assert len(lines) == 25


def test_summed_indicators_with_per_file_arrears(tmp_path):
    rng = np.random.default_rng(5)
    a = 50 + np.cumsum(rng.normal(1, 1, 20))
    b = 80 + np.cumsum(rng.normal(1, 1, 20))
    b_raw = b.copy()
    b_raw[7] += 12.0
    b_raw[4:7] -= 4.0
    q_csv(tmp_path / "a.csv", "2000Q1", a)
    q_csv(tmp_path / "b.csv", "2000Q1", b_raw)
    a_csv(tmp_path / "c.csv", 2000, (a + b).reshape(5, 4).sum(1) + rng.normal(0, 1, 5))
    ev = [{"label": "p", "disbursements": [{"period": "2001Q4", "amount": 12}],
           "accruals": [{"year": 2001, "allocation": 12, "weights": [1 / 3, 1 / 3, 1 / 3, 0]}]}]
    write(tmp_path / "ev.json", json.dumps(ev))
    job = {"name": "LG", "constraint": "c.csv", "method": "fernandez", "sum_indicators": True,
           "indicators": [{"label": "a", "path": "a.csv"}, {"label": "b", "path": "b.csv", "arrears": "ev.json"}]}
    (cfg,) = parse_config(config(tmp_path, [job]))
    rep = compute_job(cfg)
    np.testing.assert_allclose(rep.indicator.values, a + b, rtol=1e-12)
    assert [c.label for c in rep.fit.coefficients] == ["intercept", "indicator"]


def test_failed_job_does_not_stop_others(tmp_path, capsys):
    rng = np.random.default_rng(6)
    x = 100 + np.cumsum(rng.normal(1, 1, 24))
    q_csv(tmp_path / "i.csv", "2000Q1", x)
    a_csv(tmp_path / "c.csv", 2000, x.reshape(6, 4).sum(1))
    jobs = [_job(name="good", method="fernandez"), _job(name="bad", method="fernandez", constraint="missing.csv")]
    cfg = config(tmp_path, jobs)
    assert main(["run", "--config", str(cfg)]) == 1
    err = capsys.readouterr().err
    assert "[bad] load" in err
    assert (tmp_path / "output" / "good" / "good_quarterly.csv").exists()


def test_job_isolation(tmp_path):
    rng = np.random.default_rng(7)
    x = 100 + np.cumsum(rng.normal(1, 1, 24))
    q_csv(tmp_path / "i.csv", "2000Q1", x)
    a_csv(tmp_path / "c.csv", 2000, x.reshape(6, 4).sum(1) + rng.normal(0, 2, 6))
    one = config(tmp_path, [_job(name="A", method="litterman")], output_dir="o1")
    assert main(["run", "--config", str(one)]) == 0
    two = config(tmp_path, [_job(name="A", method="litterman"), _job(name="B", method="chowlin")], output_dir="o2")
    assert main(["run", "--config", str(two), "--workers", "2"]) == 0
    for f in ("A_report.json", "A_quarterly.csv", "A_plot.csv"):
        assert (tmp_path / "o1" / "A" / f).read_bytes() == (tmp_path / "o2" / "A" / f).read_bytes()


def test_cli_validate_and_exit_codes(tmp_path, capsys):
    good = config(tmp_path, [_job(method="fernandez", dummies=[[2012, 2015]])])
    assert main(["validate", "--config", str(good)]) == 0
    assert "3 regressors" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"jobs": [_job(method="denton")]}))
    assert main(["validate", "--config", str(bad)]) == 2
    assert main(["run", "--config", str(good), "--jobs", "nope"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_emit_report_io_error(tmp_path):
    rng = np.random.default_rng(8)
    x = 100 + np.cumsum(rng.normal(1, 1, 24))
    q_csv(tmp_path / "i.csv", "2000Q1", x)
    a_csv(tmp_path / "c.csv", 2000, x.reshape(6, 4).sum(1) + rng.normal(0, 2, 6))
    (cfg,) = parse_config(config(tmp_path, [_job(method="fernandez")]))
    rep = compute_job(cfg)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(Exception, match="write"):
        emit_report(rep, blocker / "sub")
