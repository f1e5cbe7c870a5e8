import numpy as np
import pytest

from flrw_blowup.params import DomainError, ModelParams
from flrw_blowup.solver import SolverConfig
from flrw_blowup.sweep import (
    SweepPoint, SweepResult, compare_prediction, fit_scaling, monotonicity_violations,
    predicted_bound, run_sweep,
)

EPS = np.array([0.8, 0.4, 0.2, 0.1, 0.05])
ACCEL = ModelParams(3, 2.0, 1.0, 1.5)


def test_exact_power_law_fit():
    f = fit_scaling(zip(EPS, EPS ** -1.5))
    assert f.slope == pytest.approx(1.5, abs=1e-12) and f.r2 == pytest.approx(1.0, abs=1e-12)


def test_noisy_fit():
    rng = np.random.default_rng(42)
    T = EPS ** -1.5 * (1 + 0.05 * rng.standard_normal(EPS.size))
    assert fit_scaling(zip(EPS, T)).slope == pytest.approx(1.5, abs=0.1)


def test_constant_data_fit():
    assert fit_scaling(zip(EPS, np.full(5, 7.0))).slope == pytest.approx(0.0, abs=1e-12)


def test_fit_rejections():
    with pytest.raises(DomainError, match="at least 4"):
        fit_scaling(zip(EPS[:3], EPS[:3]))
    with pytest.raises(DomainError, match="degenerate"):
        fit_scaling([(0.1, 1.0)] * 5)


def test_epsilon_order_enforced():
    cfg = SolverConfig(ACCEL)
    with pytest.raises(DomainError, match="decreasing"):
        run_sweep(cfg, [0.1, 0.2])
    with pytest.raises(DomainError):
        run_sweep(cfg, [])


def test_single_epsilon_passthrough():
    res = run_sweep(SolverConfig(ACCEL), [0.1], workers=1)
    assert len(res.points) == 1 and res.points[0].blew_up and res.fit is None
    assert compare_prediction(res).verdict == "QUALITATIVE"


def _point(e, T, ok=True):
    return SweepPoint(e, T, T is not None, ok if T is not None else None, 0.0,
                      "threshold" if T is not None else "horizon", 0.02, 10.0)


def test_censored_only_is_qualitative():
    res = SweepResult([_point(e, None) for e in EPS], predicted_bound(SolverConfig(ACCEL)))
    rep = compare_prediction(res)
    assert rep.verdict == "QUALITATIVE" and rep.censored == list(EPS)


def test_verdicts_from_synthetic_points():
    b = predicted_bound(SolverConfig(ACCEL))
    assert b.exponent == pytest.approx(1.0)
    good = SweepResult([_point(e, 3 * e ** -1.1) for e in EPS], b)
    good.fit = fit_scaling(good)
    assert compare_prediction(good).verdict == "PASS"
    warn = SweepResult([_point(e, 3 * e ** -0.5) for e in EPS], b)
    warn.fit = fit_scaling(warn)
    assert compare_prediction(warn).verdict == "WARN"
    fail = SweepResult([_point(e, 1e4 * e ** -1.0) for e in EPS], b)
    fail.fit = fit_scaling(fail)
    assert compare_prediction(fail, slack=1e3).verdict == "FAIL"


def test_monotonicity_report():
    res = SweepResult([_point(0.4, 10.0), _point(0.2, 9.9), _point(0.1, 8.0)], None)
    assert monotonicity_violations(res) == [(0.2, 0.1)]


def test_parallel_matches_serial():
    cfg = SolverConfig(ACCEL)
    eps = [0.2, 0.1, 0.05]
    a = run_sweep(cfg, eps, workers=1)
    b = run_sweep(cfg, eps, workers=2)
    assert a.points == b.points


def test_accelerated_sweep_slope():
    res = run_sweep(SolverConfig(ACCEL), [0.1, 0.05, 0.025, 0.0125], workers=1)
    rep = compare_prediction(res)
    assert all(p.usable for p in res.points)
    assert rep.verdict == "PASS" and not rep.monotonicity_violations
