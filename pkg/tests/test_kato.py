import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flrw_blowup.bounds import BoundKind
from flrw_blowup.kato import (
    HorizonExceeded, KatoOrder, KatoProblem, bracket, closed_form, divergence_time, growth_E,
    iterate, lifespan_bound, log_D_lower_bound, ode_oracle,
)
from flrw_blowup.params import DomainError


def test_sequence_examples():
    pr = KatoProblem(p=2, a=0, mu=1, q=0)
    assert [iterate(pr, j).a_j for j in range(4)] == [0, 1, 3, 7]
    assert all(iterate(KatoProblem(p=2), j).b_j == 0 for j in range(5))
    assert [iterate(KatoProblem(p=2, c=1, mu=0), j).c_j for j in range(4)] == [1, 3, 7, 15]


problems = st.builds(
    KatoProblem, p=st.floats(1.05, 4), a=st.floats(0, 3), b=st.floats(0, 2), c=st.floats(0.1, 3),
    q=st.floats(0, 2), r=st.floats(0, 2), mu=st.floats(0, 3), A0=st.floats(1e-3, 1e3),
    A1=st.floats(1e-3, 1e3), R=st.floats(0.1, 3))


@settings(max_examples=100, deadline=None)
@given(problems, st.integers(0, 30))
def test_closed_form_matches_recursion(prob, j):
    it, cf = iterate(prob, j), closed_form(prob, j)
    for f in ("a_j", "b_j", "c_j", "log_D_j"):
        x, y = getattr(it, f), getattr(cf, f)
        assert x == pytest.approx(y, rel=1e-12, abs=1e-12 * max(1.0, abs(y)))


@settings(max_examples=50, deadline=None)
@given(problems, st.integers(1, 30))
def test_lower_bound_is_below_actual(prob, j):
    assert log_D_lower_bound(prob, j) <= iterate(prob, j).log_D_j + 1e-9 * abs(iterate(prob, j).log_D_j)


def test_iteration_index_limits():
    with pytest.raises(DomainError):
        iterate(KatoProblem(p=2), 10_001)
    with pytest.raises(DomainError):
        closed_form(KatoProblem(p=2), -1)


def test_growth_constant():
    # c + (mu+1)/(p-1) = 2, so A1 = 2 gives B = 1
    pr = KatoProblem(p=2, c=1.0, mu=0.0, A1=2.0, q=0.0)
    assert growth_E(pr) == pytest.approx(-2 * math.log(2), abs=1e-12)
    assert growth_E(pr.with_(A0=10.0)) - growth_E(pr) == pytest.approx(math.log(10), abs=1e-14)
    assert growth_E(pr.with_(A1=50.0)) == pytest.approx(growth_E(pr), abs=1e-14)


def test_bound_shapes():
    b = lifespan_bound(KatoProblem(p=2, a=0.5, c=1))
    assert b.kind is BoundKind.POWER_LAW and b.exponent == pytest.approx(1 / 1.5)
    b = lifespan_bound(KatoProblem(p=2, a=0.5, c=1, b=1.0))
    assert b.kind is BoundKind.IMPLICIT_POWER_LOG and b.ell == 1.0
    b = lifespan_bound(KatoProblem(p=2, b=1.0, mu=0.5, order=KatoOrder.SECOND_LOG))
    assert b.kind is BoundKind.EXPONENTIAL and b.exponent == pytest.approx(1 / 3)
    b = lifespan_bound(KatoProblem(p=2, b=1.0, mu=2.0, order=KatoOrder.SECOND_LOG))
    assert b.exponent == pytest.approx(1 / 2)
    with pytest.raises(DomainError, match="M > 0"):
        lifespan_bound(KatoProblem(p=3, a=5, c=1))


def test_M_per_order():
    assert KatoProblem(p=3, a=1, c=2, q=0.5).M == pytest.approx(2 * 1 - 0.5 + 1)
    assert KatoProblem(p=3, a=1, b=2, q=0.5, order="second").M == pytest.approx(2 - 0.5 + 2)
    assert KatoProblem(p=3, a=1, c=2, order="second_log_q").M == pytest.approx(4.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(1.1, 3), st.floats(0, 1), st.floats(0.5, 2), st.floats(0, 1))
def test_bracket_increases(p, a, c, mu):
    pr = KatoProblem(p=p, a=a, c=c, mu=mu)
    if pr.M <= 0:
        return
    ts = pr.T1 + 1 + np.geomspace(1e-3, 1e8, 60)
    v = [bracket(pr, t) for t in ts]
    assert all(y > x for x, y in zip(v, v[1:]))


def test_divergence_time_scaling():
    pr = KatoProblem(p=2, a=0.5, c=1, A1=1.0, A0=1e-6)
    k = (pr.p - 1) / pr.M
    ratio = divergence_time(pr) / divergence_time(pr.with_(A0=1e-4))
    assert ratio == pytest.approx(100 ** k, rel=0.05)


def test_divergence_time_errors():
    with pytest.raises(DomainError):
        divergence_time(KatoProblem(p=3, a=5))
    with pytest.raises(HorizonExceeded):
        divergence_time(KatoProblem(p=2, a=0.5, A0=1e-30), horizon=1e3)


def test_separable_oracle():
    pr = KatoProblem(p=2, A1=1.0, q=0.0)
    assert ode_oracle(pr, F0=1.0) == pytest.approx(2.0, abs=1e-6)
    assert ode_oracle(pr, F0=4.0) == pytest.approx(1.25, abs=1e-6)


def test_second_order_oracle_monotone():
    pr = KatoProblem(p=2, q=0.0, order="second")
    times = [ode_oracle(pr, F0=0.0, dF0=v) for v in (0.5, 1.0, 2.0, 4.0)]
    assert all(y < x for x, y in zip(times, times[1:]))


def test_oracle_scaling_slope():
    pr = KatoProblem(p=2, mu=0.5, a=1.5, c=1.0, A1=1e-5)
    a0 = np.array([1.0, 10.0, 100.0, 1000.0])
    T = np.array([ode_oracle(pr.with_(A0=x)) for x in a0])
    slope = -np.polyfit(np.log(a0), np.log(T), 1)[0]
    assert slope == pytest.approx((pr.p - 1) / pr.M, rel=0.10)


def test_oracle_horizon():
    with pytest.raises(HorizonExceeded):
        ode_oracle(KatoProblem(p=2, A1=1e-12, mu=3.0, q=2.0), horizon=1e4)
