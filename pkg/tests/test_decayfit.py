import io
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscidecay.decayfit import (
    SweepConfig,
    SweepRow,
    fit_power_law,
    fit_to_json,
    geometric_lambdas,
    render_svg,
    rows_from_csv,
    rows_to_csv,
    sweep,
)
from oscidecay.errors import ValidationError
from oscidecay.normest import NormConfig
from oscidecay.phase import case_c
from oscidecay.testfn import ExtremalParams, l2_norm, make_extremal

LAMS = np.geomspace(1e2, 1e5, 10)
# slope of log(lam**-0.5 log lam) on log lam over LAMS, from an independent
# regression (scipy.stats.linregress)
LOG_CORRECTED_SLOPE = -0.36983371328629455


def test_exact_power_law():
    fit = fit_power_law((LAMS, 7 * LAMS ** -0.375))
    assert fit.slope == pytest.approx(-0.375, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log(7), abs=1e-11)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.max_abs_residual < 1e-12
    assert fit.n == 10


def test_log_corrected_rate_reads_as_shallower_power():
    fit = fit_power_law((LAMS, LAMS ** -0.5 * np.log(LAMS)))
    assert -0.5 < fit.slope < -0.35
    assert fit.slope == pytest.approx(LOG_CORRECTED_SLOPE, abs=1e-12)


def test_power_with_log_recovers_both_exponents():
    fit = fit_power_law((LAMS, 3 * LAMS ** -0.5 * np.log(LAMS) ** 1.5), "power_with_log")
    assert fit.slope == pytest.approx(-0.5, abs=1e-10)
    assert fit.log_coef == pytest.approx(1.5, abs=1e-10)
    assert fit.predict(LAMS[3]) == pytest.approx(3 * LAMS[3] ** -0.5 * np.log(LAMS[3]) ** 1.5, rel=1e-10)


def test_constant_has_zero_slope():
    fit = fit_power_law((LAMS, np.full(10, 2.5)))
    assert fit.slope == pytest.approx(0.0, abs=1e-13)
    assert fit.r_squared == 1.0


@settings(max_examples=60, deadline=None)
@given(
    c=st.floats(1e-3, 1e3),
    k=st.floats(-2.0, 2.0),
    seed=st.integers(0, 2 ** 16),
)
def test_fit_equivariance_and_order_invariance(c, k, seed):
    rng = np.random.default_rng(seed)
    ys = np.exp(rng.normal(size=10)) * LAMS ** -0.4
    base = fit_power_law((LAMS, ys))
    scaled = fit_power_law((LAMS, c * ys))
    tilted = fit_power_law((LAMS, LAMS ** k * ys))
    perm = rng.permutation(10)
    shuffled = fit_power_law([SweepRow(LAMS[i], ys[i], "opnorm") for i in perm])
    assert scaled.slope == pytest.approx(base.slope, abs=1e-9)
    assert tilted.slope == pytest.approx(base.slope + k, abs=1e-9)
    assert shuffled.slope == pytest.approx(base.slope, abs=1e-9)


@pytest.mark.parametrize("n", [0, 4])
def test_too_few_rows(n):
    with pytest.raises(ValidationError):
        fit_power_law((LAMS[:n], LAMS[:n] ** -0.5))


def test_failed_rows_are_skipped():
    rows = [SweepRow(lam, lam ** -0.25, "norm_f") for lam in LAMS[:6]]
    rows.append(SweepRow(1e6, float("nan"), "norm_f", error="NonConvergenceError: x"))
    assert fit_power_law(rows).n == 6
    with pytest.raises(ValidationError):
        fit_power_law(rows[:4] + rows[-1:])


@pytest.mark.parametrize("bad", [(LAMS, -LAMS), (LAMS * 0, LAMS)])
def test_non_positive_values_rejected(bad):
    with pytest.raises(ValidationError):
        fit_power_law(bad)


def test_identical_lambdas_rejected():
    with pytest.raises(ValidationError, match="degenerate"):
        fit_power_law((np.full(6, 10.0), np.arange(1.0, 7.0)))


def test_unknown_model():
    with pytest.raises(ValidationError):
        fit_power_law((LAMS, LAMS), "exponential")


def test_geometric_lambdas():
    lams = geometric_lambdas(1e2, 1e5, 10)
    assert lams[0] == pytest.approx(1e2) and lams[-1] == pytest.approx(1e5)
    assert lams[3] == pytest.approx(1e3)
    np.testing.assert_allclose(np.diff(np.log(lams)), np.log(10) / 3)
    with pytest.raises(ValidationError):
        geometric_lambdas(1e2, 1e2, 10)
    with pytest.raises(ValidationError):
        geometric_lambdas(1e2, 1e3, 4)


def test_norm_f_sweep_matches_direct_norms():
    rows = sweep(None, LAMS[:6], "norm_f", SweepConfig(eps=0.05))
    for row in rows:
        direct = l2_norm(make_extremal(ExtremalParams(0.05, row.lam)))
        assert row.quantity == pytest.approx(direct, rel=1e-15)
    assert fit_power_law(rows).slope == pytest.approx(-0.25, abs=1e-9)


def test_sweep_validation():
    with pytest.raises(ValidationError):
        sweep(None, [], "rayleigh")
    with pytest.raises(ValidationError):
        sweep(None, LAMS[::-1], "norm_f")
    with pytest.raises(ValidationError):
        sweep(None, LAMS, "spectral")


def test_sweep_records_row_failures():
    cfg = SweepConfig(norm=NormConfig(method="dense", dense_cap=10))
    rows = sweep(case_c(), np.geomspace(10, 20, 5), "opnorm", cfg)
    assert all(not r.ok for r in rows)
    assert rows[0].error.startswith("ValidationError")


def test_opnorm_sweep_small():
    rows = sweep(case_c(), np.geomspace(2, 8, 5), "opnorm")
    assert all(r.ok and r.meta["method"] == "gram" for r in rows)
    assert all(a.quantity > b.quantity for a, b in zip(rows, rows[1:]))


def test_csv_round_trip(tmp_path):
    rows = [
        SweepRow(100.0, 0.1 + 1e-17, "opnorm", {"iterations": 12, "method": "gram", "edge_mass": 1e-300}),
        SweepRow(1000.0 / 3, float("nan"), "opnorm", {}, "NonConvergenceError: residual 1e-3"),
    ]
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == "lambda,quantity,mode,iterations,method,edge_mass,error"
    back = rows_from_csv(io.StringIO(text))
    assert back[0] == rows[0]
    assert back[1].lam == rows[1].lam and back[1].error == rows[1].error
    assert np.isnan(back[1].quantity)
    path = tmp_path / "rows.csv"
    rows_to_csv(back, dest=path)
    assert path.read_text() == text


def test_fit_json_and_svg():
    rows = [SweepRow(lam, lam ** -0.375, "opnorm") for lam in LAMS]
    fit = fit_power_law(rows)
    doc = json.loads(fit_to_json(fit, {"mode": "opnorm"}))
    assert doc["slope"] == pytest.approx(-0.375, abs=1e-12) and doc["mode"] == "opnorm"
    svg = render_svg(rows, [fit, fit_power_law(rows, "power_with_log")], "norm <decay>")
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<circle") == 10 and svg.count("<polyline") == 2
    assert "&lt;decay&gt;" in svg
    with pytest.raises(ValidationError):
        render_svg([SweepRow(1.0, float("nan"), "opnorm")])
