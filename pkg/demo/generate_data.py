"""Regenerate the synthetic demo inputs in ``demo/data``.

The series imitate the three model set-ups of a general government
compensation-of-employees exercise (central, local, social security) but
are entirely synthetic.
"""

import json
from pathlib import Path

import numpy as np

OUT = Path(__file__).parent / "data"
YEARS = np.arange(1999, 2025)
NQ = 4 * YEARS.size + 1  # one extrapolated quarter, 2025Q1
SEASON = np.array([0.97, 1.01, 0.96, 1.06])


def periods(n, start=1999):
    return [f"{start + i // 4}Q{i % 4 + 1}" for i in range(n)]


def write_q(name, values):
    rows = ["period,value"] + [f"{p},{v:.1f}" for p, v in zip(periods(len(values)), values)]
    (OUT / name).write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_a(name, values):
    rows = ["period,value"] + [f"{y},{v:.1f}" for y, v in zip(YEARS, values)]
    (OUT / name).write_text("\n".join(rows) + "\n", encoding="utf-8")


def trend(rng, level, drift, vol):
    return level * np.exp(np.cumsum(rng.normal(drift, vol, NQ))) * np.resize(SEASON, NQ)


def year_dummy(a, b):
    yr = 1999 + np.arange(NQ) // 4
    return ((yr >= a) & (yr <= b)).astype(float)


def annual(q):
    return q[: 4 * YEARS.size].reshape(-1, 4).sum(axis=1)


def main():
    OUT.mkdir(exist_ok=True)
    rng = np.random.default_rng(2025)

    # central government: state payroll with a 2016-2017 agreement paid in 2018Q2
    cg_true = trend(rng, 9000.0, 0.006, 0.004)
    cg_raw = cg_true.copy()
    paid = 1200.0
    cg_raw[periods(NQ).index("2016Q1") : periods(NQ).index("2017Q4") + 1] -= paid / 8
    cg_raw[periods(NQ).index("2018Q2")] += paid
    noise = np.cumsum(rng.normal(0.0, 25.0, NQ))
    cg_q = 2478.6 / 4 + 0.917 * cg_true - 75.2 * year_dummy(2012, 2015) + 207.6 * year_dummy(2021, 2024) + noise
    write_q("cg_indicator.csv", cg_raw)
    write_a("cg_constraint.csv", annual(cg_q))
    events = [{
        "label": "state agreement 2016-2017",
        "disbursements": [{"period": "2018Q2", "amount": paid}],
        "accruals": [
            {"year": 2016, "allocation": paid / 2, "weights": [0.25, 0.25, 0.25, 0.25]},
            {"year": 2017, "allocation": paid / 2, "weights": [0.25, 0.25, 0.25, 0.25]},
        ],
    }]
    (OUT / "cg_arrears.json").write_text(json.dumps(events, indent=2) + "\n", encoding="utf-8")

    # local government: three unit groups summed into one indicator
    parts = {
        "regions": trend(rng, 1500.0, 0.005, 0.005),
        "municipalities": trend(rng, 2500.0, 0.004, 0.005),
        "health_units": trend(rng, 4000.0, 0.007, 0.004),
    }
    lhu_raw = parts["health_units"].copy()
    i4 = periods(NQ).index("2019Q4")
    provision = 300.0
    lhu_raw[i4 - 3 : i4] -= provision / 3
    lhu_raw[i4] += provision
    for name, v in parts.items():
        write_q(f"lg_{name}.csv", lhu_raw if name == "health_units" else v)
    lhu_events = [{
        "label": "health units provision 2019",
        "disbursements": [{"period": "2019Q4", "amount": provision}],
        "accruals": [{"year": 2019, "allocation": provision, "weights": [1 / 3, 1 / 3, 1 / 3, 0.0]}],
    }]
    (OUT / "lg_health_units_arrears.json").write_text(
        json.dumps(lhu_events, indent=2) + "\n", encoding="utf-8"
    )
    lg_ind = sum(parts.values())
    lg_q = 70.0 / 4 + 1.021 * lg_ind - 12.0 * year_dummy(2012, 2020) + np.cumsum(rng.normal(0.0, 4.0, NQ))
    write_a("lg_constraint.csv", annual(lg_q))

    # social security funds: slope-only model with AR(1) disturbance
    ssf_ind = trend(rng, 600.0, 0.004, 0.01)
    u = np.zeros(NQ + 100)
    e = rng.normal(0.0, 5.0, NQ + 100)
    for t in range(1, u.size):
        u[t] = 0.73 * u[t - 1] + e[t]
    write_q("ssf_indicator.csv", ssf_ind)
    write_a("ssf_constraint.csv", annual(1.022 * ssf_ind + u[100:]))


if __name__ == "__main__":
    main()
