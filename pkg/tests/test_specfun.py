import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from flrw_blowup.params import DomainError, ModelParams, lightcone_radius
from flrw_blowup.specfun import (
    BesselContext, TestFunction, bessel_k, bessel_k_derivs, dphi_q_dt, glassey_critical_q,
    identity_residuals, phi, phi_integral_ratio, phi_pde_residual, phi_q_branch,
    phi_q_envelope_ratio, phi_t, phi_t_ratio_residual, q_admissible, ratio_bound,
    sphere_integral, sphere_integral_dr,
)
from flrw_blowup import exponents as ex

NU_GRID = [0.0, 0.3, 0.5, 1.0, 2.7]
T_GRID = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0]
M = ModelParams(3, 1 / 3, 1.0, 2.0)


def test_half_integer_closed_form():
    ctx = BesselContext(0.5)
    assert bessel_k(ctx, 1.0) == pytest.approx(math.sqrt(math.pi / 2) / math.e, abs=1e-10)


def test_k0_against_arbitrary_precision():
    assert bessel_k(BesselContext(0.0), 1.0) == pytest.approx(float(mpmath.besselk(0, 1)), rel=1e-12)
    assert bessel_k(BesselContext(0.0), 1.0) == pytest.approx(0.42102443824, abs=1e-11)


@pytest.mark.parametrize("nu", NU_GRID)
def test_against_scipy(nu):
    t = np.array(T_GRID)
    np.testing.assert_allclose(bessel_k(BesselContext(nu), t), special.kv(nu, t), rtol=1e-11)
    _, d1, _ = bessel_k_derivs(BesselContext(nu), t)
    np.testing.assert_allclose(d1, special.kvp(nu, t, 1), rtol=1e-10)


@pytest.mark.parametrize("nu", NU_GRID)
@pytest.mark.parametrize("t", T_GRID)
def test_identities(nu, t):
    res = identity_residuals(BesselContext(nu), t)
    assert res["ode_B0"] <= 1e-8 and res["recurrence_B2"] <= 1e-8
    assert bessel_k(BesselContext(-nu), t) == pytest.approx(bessel_k(BesselContext(nu), t), rel=1e-12)


def test_large_argument_correction():
    b = [identity_residuals(BesselContext(0.0), t)["asymptotic_B1"] for t in (10.0, 20.0, 40.0)]
    # magnitude shrinks like 1/(8t); sign follows the reference implementation
    assert 0 < abs(b[2]) < 0.01
    assert abs(b[0]) > abs(b[1]) > abs(b[2])
    ref = special.kve(0.0, 40.0) * math.sqrt(80 / math.pi) - 1
    assert b[2] == pytest.approx(ref, rel=1e-8)


def test_ratio_bound_half_order():
    assert ratio_bound(BesselContext(0.5), 1.0) == pytest.approx(2.0, abs=1e-10)


@pytest.mark.parametrize("nu", [0.0, 0.3, 1.0, 2.7])
def test_ratio_bound_dominates_samples(nu):
    ctx = BesselContext(nu)
    Mb = ratio_bound(ctx, 1.0)
    s = np.geomspace(1.0, 500.0, 333)
    assert np.all(special.kve(nu + 1, s) / special.kve(nu, s) <= Mb * (1 + 1e-12))
    with pytest.raises(DomainError):
        ratio_bound(ctx, 0.5)


def test_sphere_integral():
    assert sphere_integral(3, 0.0) == pytest.approx(4 * math.pi)
    assert sphere_integral(3, 1.0) == pytest.approx(4 * math.pi * math.sinh(1.0), rel=1e-14)
    assert sphere_integral(2, 0.0) == pytest.approx(2 * math.pi, rel=1e-14)
    assert sphere_integral(2, 1.3) == pytest.approx(2 * math.pi * special.iv(0, 1.3), rel=1e-13)
    h = 1e-5
    fd = (sphere_integral(4, 0.7 + h) - sphere_integral(4, 0.7 - h)) / (2 * h)
    assert sphere_integral_dr(4, 0.7) == pytest.approx(fd, rel=1e-8)


@pytest.mark.parametrize("n", [2, 3])
def test_phi_solves_adjoint_equation(n):
    rng = np.random.default_rng(7)
    tf = TestFunction.phi(ModelParams(n, 1 / 3, 1.0, 2.0))
    for t, r in zip(rng.uniform(1, 20, 20), rng.uniform(0, 3, 20)):
        assert phi_pde_residual(tf, t, r) <= 1e-8
        assert phi_t_ratio_residual(tf, t) <= 1e-10
        assert phi(tf, t, r) > 0 and phi_t(tf, t, r) < 0


def test_phi_closed_form_half_order():
    # alpha = 0, mu = 2 gives order 1/2 and lambda = sqrt(pi/2) e^-t / t
    tf = TestFunction.phi(ModelParams(3, 0.0, 2.0, 2.0))
    assert tf.ctx.nu == 0.5
    r = [phi(tf, t, 0.4) / (math.exp(-t) / t * sphere_integral(3, 0.4)) for t in (1.0, 3.0, 7.0)]
    assert r[0] == pytest.approx(math.sqrt(math.pi / 2), rel=1e-10)
    assert r[0] == pytest.approx(r[1], rel=1e-10) and r[1] == pytest.approx(r[2], rel=1e-10)


def test_volume_ratio_bounded():
    tf = TestFunction.phi(M)
    v = [phi_integral_ratio(tf, t, 0.5) for t in (1.0, 2.0, 5.0, 10.0, 50.0, 100.0)]
    assert all(x > 0 and math.isfinite(x) for x in v)
    assert max(v) / min(v) < 50
    assert v[-1] <= 2 * v[3]


def test_q_gates():
    assert not q_admissible(-(M.mu + M.alpha) / 2, M).cd1
    with pytest.raises(DomainError, match="mu\\+alpha"):
        TestFunction.phi_q(M, -(M.mu + M.alpha) / 2)
    m = ModelParams(3, 0.6, 0.2, 2.0)
    with pytest.raises(DomainError, match="\\|nu\\|"):
        TestFunction.phi_q(m, -0.3)
    pc = ex.p_c_prime(3, 1 / 3, 1.0).value
    assert q_admissible(glassey_critical_q(3, 1 / 3, 1.0, pc), M).ok


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0, 0.9), st.floats(0, 3))
def test_q_gates_match_inequalities(q, a, mu):
    m = ModelParams(3, a, mu, 2.0)
    nu = (mu - 1) / (2 * (1 - a))
    adm = q_admissible(q, m)
    assert adm.cd1 == (q > -(mu + a) / 2)
    assert adm.cd2 == (q + (mu - 1) / 2 - (1 - a) * abs(nu) > -1)


@pytest.mark.parametrize("q", [-0.4, 0.3])
def test_phi_q_envelope_both_branches(q):
    tf = TestFunction.phi_q(M, q)
    assert phi_q_branch(tf) == (1 if q < 0 else 2)
    for t in (5.0, 10.0, 20.0):
        A = lightcone_radius(t, M.alpha)
        for r in (0.0, A / 2, A):
            assert 1 / 50 <= phi_q_envelope_ratio(tf, t, r) <= 50


def test_phi_q_decreasing_at_start():
    tf = TestFunction.phi_q(M, -0.4)
    assert all(dphi_q_dt(tf, 1.0, x) <= 0 for x in np.linspace(0, 1.5, 7))
