import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from flrw_blowup import exponents as ex
from flrw_blowup import kato as kt
from flrw_blowup.bounds import BoundKind, ImplicitValue, LifespanBound, best_bound, bound_value
from flrw_blowup.params import FLRWParams, ModelParams, Nonlinearity, flrw_to_model
from flrw_blowup.regions import (
    FIGURES, NO_BLOWUP, applicable_bounds, classify_region, curve_intersections, kato_instance,
    region_grid,
)
from dataclasses import replace

T, S = Nonlinearity.TIME_DERIVATIVE, Nonlinearity.SPACE_DERIVATIVE


def best(m):
    return classify_region(m).bound


def test_time_subcritical_example():
    b = best(ModelParams(3, 1 / 3, 1.0, 1.5, nonlinearity=T))
    assert b.kind is BoundKind.POWER_LAW and b.source == "time.glassey"
    assert b.exponent == pytest.approx(1.5, rel=1e-12)


def test_time_critical_example():
    b = best(ModelParams(3, 1 / 3, 1.0, 1.75, nonlinearity=T))
    assert b.kind is BoundKind.EXPONENTIAL and b.exponent == pytest.approx(0.75)


def test_space_heatlike_example():
    bs = {b.source: b for b in applicable_bounds(ModelParams(3, 0.3, 2.0, 1.2, nonlinearity=S))}
    assert bs["space.heatlike"].exponent == pytest.approx(0.2 / (2 - 1.8 * 0.7), rel=1e-12)
    assert bs["space.heatlike"].exponent == pytest.approx(0.27027, abs=1e-5)


def test_accelerated_time_example():
    b = best(ModelParams(3, 2.0, 1.0, 1.5, nonlinearity=T))
    assert b.source == "time.accel" and b.exponent == pytest.approx(1.0, rel=1e-14)


def test_best_bound_ordering():
    a = LifespanBound.power_law(1.5, "x", "", True)
    b = LifespanBound.power_law(2.0, "y", "", True)
    e = LifespanBound.exponential(0.75, "z", "", True)
    big = LifespanBound.power_law(3.0, "w", "", True)
    assert best_bound([b, a]).exponent == 1.5
    assert best_bound([e, big]) is big
    tie = LifespanBound.power_law(1.5, "later", "", True)
    assert best_bound([a, tie]) is a


def test_implicit_bound_compared_by_induced_power():
    imp = LifespanBound.implicit(2.0, 3.0, 1.0, "i", "", True)
    assert imp.induced_power == 0.5 and imp.has_log_correction
    pl = LifespanBound.power_law(0.6, "p", "", True)
    assert best_bound([pl, imp]) is imp


def test_bound_values():
    assert bound_value(LifespanBound.power_law(1.5, "", "", True), 0.01) == pytest.approx(1e3)
    assert bound_value(LifespanBound.exponential(1.0, "", "", True), 0.5) == pytest.approx(math.e ** 2)
    v = bound_value(LifespanBound.implicit(2.0, 0.0, 1.0, "", "", True), 1e-4)
    v = v.T if isinstance(v, ImplicitValue) else v
    assert v == pytest.approx(100.0, rel=1e-12)
    v = bound_value(LifespanBound.implicit(2.0, 3.0, 1.0, "", "", True), 1e-3)
    assert v.T ** 2 * math.log(v.T) ** -3 == pytest.approx(1e3, rel=1e-9)


@pytest.mark.parametrize("m, label", [
    (ModelParams(3, 0.2, 1.5, 1.4, nonlinearity=T), "G"),
    (ModelParams(3, 0.9, 0.2, 2.8, nonlinearity=T), "O"),
    (flrw_to_model(FLRWParams(3, 1.0), 1.3, nonlinearity=S), "C"),
    (flrw_to_model(FLRWParams(3, -0.5), 5.0, nonlinearity=S), "A"),
    (ModelParams(3, 0.2, 1.5, 3.5, nonlinearity=T), NO_BLOWUP),
])
def test_classify_region(m, label):
    assert classify_region(m).label == label


def test_divergence_at_glassey_threshold():
    n, a, mu = 3, 0.2, 1.5
    pG = ex.p_G_prime(n, a, mu)
    b = best(ModelParams(n, a, mu, pG - 1e-8, nonlinearity=T))
    assert b.source == "time.glassey" and b.exponent > 1e6


@pytest.mark.parametrize("n", [2, 3, 4])
def test_minkowski_reduction(n):
    p = 1 + 1 / n
    b = {x.source: x for x in applicable_bounds(ModelParams(n, 0.0, 0.0, p))}["time.glassey"]
    assert b.exponent == pytest.approx((p - 1) / (1 - (n - 1) * (p - 1) / 2), rel=1e-13)


@settings(max_examples=80, deadline=None)
@given(st.integers(2, 5), st.floats(0.0, 0.99), st.floats(1.01, 2.5))
def test_flrw_time_bound_formula(n, w, p):
    m = flrw_to_model(FLRWParams(n, w), p)
    assume(m.alpha < 1)
    b = {x.source: x for x in applicable_bounds(m)}["time.glassey"]
    assume(b.applicable)
    expect = (p - 1) / (1 - (n - 1 + 4 / (n * (1 + w))) * (p - 1) / 2)
    assert b.exponent == pytest.approx(expect, rel=1e-12)


KATO_SOURCES = ["time.ode", "time.accel", "space.wavelike", "space.ode", "space.heatlike",
                "space.accel"]


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 5), st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(1.01, 4.0),
       st.sampled_from([T, S]))
def test_power_law_bounds_match_iteration_lemma(n, alpha, mu, p, kind):
    m = ModelParams(n, alpha, mu, p, nonlinearity=kind)
    for b in applicable_bounds(m):
        if not b.applicable or b.source not in KATO_SOURCES:
            continue
        prob = kato_instance(m, b.source)
        assert b.exponent == pytest.approx(p * (p - 1) / prob.M, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 5), st.floats(0.0, 0.95), st.floats(0.0, 3.0), st.floats(1.01, 4.0))
def test_in_proof_M_values(n, alpha, mu, p):
    m = ModelParams(n, alpha, mu, p, nonlinearity=S)
    assert kato_instance(m, "space.wavelike").M == pytest.approx(
        (1 - alpha) * ex.gamma_prime(n, p, alpha, mu) / 2, rel=1e-12, abs=1e-12)
    assert kato_instance(m, "space.heatlike").M == pytest.approx(
        p * (2 - (p + n * (p - 1)) * (1 - alpha)), rel=1e-12, abs=1e-12)
    assert kato_instance(m, "time.ode").M == pytest.approx(
        p * (1 - (p - 1) * (mu + n * (1 - alpha))), rel=1e-12, abs=1e-12)
    m2 = ModelParams(n, 1.5 + alpha, mu, p, nonlinearity=S)
    assert kato_instance(m2, "space.accel").M == pytest.approx(2 * p, rel=1e-14)


def test_implicit_sources_scale_like_theorems():
    m = ModelParams(3, 1.0, 0.5, 1.5, epsilon=0.1, nonlinearity=T)
    b = {x.source: x for x in applicable_bounds(m)}["time.accel_boundary"]
    kb = kt.lifespan_bound(kato_instance(m, "time.accel_boundary")).scaled(m.p)
    assert kb.induced_power == pytest.approx(b.induced_power, rel=1e-12)


def test_every_cell_gets_one_label():
    for k, spec in FIGURES.items():
        g = region_grid(replace(spec, resolution=12), curve_samples=50)
        assert len(g.rows) == 144
        assert all(r.region in {"G", "O", "C", "F", "A", NO_BLOWUP} for r in g.rows)


def test_resolution_one_is_midpoint():
    g = region_grid(replace(FIGURES[1], resolution=1), curve_samples=10)
    assert len(g.rows) == 1
    assert (g.rows[0].x, g.rows[0].p) == (1.5, 2.5)


def test_region_o_only_below_crossing():
    g = region_grid(replace(FIGURES[2], resolution=40), curve_samples=10)
    xs_o = {r.x for r in g.rows if r.region == "O"}
    mc = ex.mu_crossing(3, 0.9)
    assert mc == pytest.approx(0.5)
    assert xs_o and max(xs_o) <= mc
    assert all(any(r.x == x and r.region == "O" for r in g.rows) for x in {r.x for r in g.rows} if x <= mc)


def test_w_star_on_figure_seven():
    hits = curve_intersections(FIGURES[7], [("p_c_prime", "p_F_prime")])[("p_c_prime", "p_F_prime")]
    assert len(hits) == 1
    w, p = hits[0]
    assert w == pytest.approx(1 / 9, abs=1e-10) and p == pytest.approx(2.0, abs=1e-10)
