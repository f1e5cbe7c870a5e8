import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import trapezoid

from flrw_blowup.params import DomainError, ModelParams
from flrw_blowup.solver import (
    BACKEND, Profile, SolverConfig, check_data, convergence_test, dalembert_reference,
    diagnostics, get_kernels, grid, init, run, step, support_check,
)
from flrw_blowup.solver.core import next_dt

LIN = ModelParams(3, 0.0, 0.0, 2.0)


def lin_cfg(**kw):
    kw.setdefault("dr", 0.02)
    kw.setdefault("t_max", 3.0)
    return SolverConfig(kw.pop("model", LIN), nonlinear=False, **kw)


def test_backend_is_known():
    assert BACKEND in ("cython", "numpy")


def test_kernels_agree():
    try:
        fast = get_kernels("cython")
    except ImportError:
        pytest.skip("compiled kernels not built")
    slow = get_kernels("numpy")
    rng = np.random.default_rng(3)
    for mode in (0, 1, 2):
        u, v = rng.standard_normal(300), rng.standard_normal(300)
        a = [u.copy(), v.copy()]
        b = [u.copy(), v.copy()]
        sa = fast.rk4_step(a[0], a[1], np.empty((6, 300)), 1.3, 1e-3, 0.02, 250, 3, 0.4, 1.2, 1.7, mode)
        sb = slow.rk4_step(b[0], b[1], np.empty((6, 300)), 1.3, 1e-3, 0.02, 250, 3, 0.4, 1.2, 1.7, mode)
        np.testing.assert_allclose(a[0], b[0], rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(a[1], b[1], rtol=1e-13, atol=1e-13)
        assert sa == pytest.approx(sb, rel=1e-13)


def test_default_profile():
    cfg = lin_cfg()
    st = init(cfg)
    r = grid(cfg)
    assert st.u[0] == pytest.approx(1.0) and st.v[0] == pytest.approx(3.0)
    assert np.all(st.u[r >= 1.0] == 0.0)


def test_zero_data_stays_zero():
    cfg = lin_cfg(model=LIN.with_(epsilon=1e-300))
    st = init(cfg)
    st.u[:] = 0.0
    st.v[:] = 0.0
    for _ in range(50):
        step(st, cfg)
    assert not np.any(st.u) and not np.any(st.v)


def test_data_conditions():
    m = ModelParams(3, 0.0, 0.0, 3.0)       # above p_0: needs u1 >= u0 >= 0
    with pytest.raises(DomainError, match="u1 >= u0"):
        init(SolverConfig(m, profile=Profile(u1_factor=0.0, u1_bump=0.0)))
    r = np.linspace(0, 1, 11)
    check_data(r * 0, r, ModelParams(3, 0.0, 0.0, 1.2))   # below p_0 only u1 >= 0 is needed
    with pytest.raises(DomainError):
        check_data(-r, r, ModelParams(3, 0.0, 0.0, 1.5, nonlinearity="grad"))


def test_convergence_against_exact_solution():
    rep = convergence_test(lin_cfg(), t_end=2.0)
    assert rep.order >= 1.9
    assert rep.ratios[-1] == pytest.approx(4.0, rel=0.1)


def test_zero_data_has_no_error():
    cfg = lin_cfg(model=LIN.with_(epsilon=1e-300))
    rep = convergence_test(cfg, t_end=1.5)
    assert max(rep.errors) < 1e-290


def test_reference_needs_minkowski():
    with pytest.raises(DomainError):
        dalembert_reference(lin_cfg(model=LIN.with_(mu=1.0)), 2.0, np.array([0.5]))


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 10.0))
def test_linear_scaling_is_exact(scale):
    a = lin_cfg(t_max=1.5)
    b = lin_cfg(t_max=1.5, model=LIN.with_(epsilon=scale))
    oa, ob = run(a, record=False), run(b, record=False)
    sa, sb = init(a), init(b)
    while sa.t < 1.5:
        step(sa, a)
        step(sb, b)
    np.testing.assert_allclose(sb.u, scale * sa.u, rtol=1e-12, atol=1e-300)
    assert not oa.blew_up and not ob.blew_up


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_finite_speed(alpha):
    m = ModelParams(3, alpha, 1.0, 2.0)
    cfg = SolverConfig(m, dr=0.0025, t_max=4.0, nonlinear=False, diag_every=100)
    out = run(cfg)
    assert out.support_violation < 1e-10


def test_dt_never_exceeds_cap():
    cfg = SolverConfig(ModelParams(3, 2.0, 1.0, 1.5), dr=0.05, t_max=40.0, nonlinear=False)
    st = init(cfg)
    while st.t < 40.0:
        assert next_dt(st, cfg) <= cfg.dt_cap * (1 + 1e-15)
        step(st, cfg)


def test_freeze_out_at_large_alpha():
    # speed t^-2 integrates to a finite radius; with damping u_t decays too
    cfg = SolverConfig(ModelParams(3, 2.0, 2.0, 2.0), dr=0.02, t_max=400.0, nonlinear=False)
    st = init(cfg)
    sups = {}
    for t_mark in (50.0, 100.0, 200.0, 400.0):
        while st.t < t_mark:
            step(st, cfg)
        sups[t_mark] = float(np.max(np.abs(st.u)))
    d1 = abs(sups[100.0] - sups[50.0])
    d2 = abs(sups[200.0] - sups[100.0])
    d3 = abs(sups[400.0] - sups[200.0])
    assert d3 < d2 < d1
    assert d3 < 1e-2 * sups[400.0]


def test_subcritical_blowup_and_monotone_lifespan():
    m = ModelParams(3, 1 / 3, 1.0, 1.5, epsilon=0.5)
    a = run(SolverConfig(m, t_max=100.0))
    b = run(SolverConfig(m.with_(epsilon=0.25), t_max=200.0))
    assert a.blew_up and 1 < a.T_num <= 100
    assert a.converged and a.sensitivity < 0.01
    assert b.blew_up and b.T_num > a.T_num
    assert a.min_int_ut > 0


def test_linear_run_reaches_horizon():
    out = run(lin_cfg(t_max=5.0))
    assert not out.blew_up and out.T_num is None and out.reason == "horizon"


def test_initial_diagnostics():
    cfg = lin_cfg(dr=0.005)
    st = init(cfg)
    d = diagnostics(st, cfg)
    r = np.linspace(0, 1, 20001)
    prof = cfg.profile
    exact = trapezoid(4 * math.pi * r ** 2 * prof.u1(r, 1.0), r)
    assert d["int_ut"] == pytest.approx(exact, rel=1e-6)
    assert support_check(st, cfg) == 0.0


def test_config_validation():
    with pytest.raises(DomainError):
        SolverConfig(LIN, dr=0.0)
    with pytest.raises(DomainError):
        SolverConfig(LIN, t_max=1.0)
    with pytest.raises(DomainError, match="light cone"):
        SolverConfig(LIN, t_max=5.0, r_max=2.0)
