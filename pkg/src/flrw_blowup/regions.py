"""Lifespan upper bounds per parameter point, region classification and figure grids.

Every bound carries a neutral source tag:

======================== =====================================================
time.glassey             |u_t|^p, p < p_G', Glassey-type power law
time.glassey_critical    |u_t|^p, p = p_G', exponential
time.ode                 |u_t|^p, p < p_0, ODE-type power law
time.accel_boundary      |u_t|^p, alpha = 1, power-log
time.accel               |u_t|^p, alpha > 1, power law
space.wavelike           |grad u|^p, p < p_c' (or every p when p_c' is ALL_P)
space.ode                |grad u|^p, p < p_0'
space.wavelike_critical  |grad u|^p, p = p_c', exponential
space.heatlike           |grad u|^p, p < p_F'
space.heatlike_critical  |grad u|^p, p = p_F', exponential
space.accel_boundary     |grad u|^p, alpha = 1, power-log
space.accel              |grad u|^p, alpha > 1, power law
======================== =====================================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from . import exponents as ex
from .bounds import BoundKind, ImplicitValue, LifespanBound, best_bound, bound_value
from .exponents import CRITICAL_TOL
from .kato import KatoOrder, KatoProblem
from .params import DomainError, FLRWParams, ModelParams, Nonlinearity, flrw_to_model

__all__ = [
    "BoundKind", "LifespanBound", "ImplicitValue", "best_bound", "bound_value",
    "applicable_bounds", "classify_region", "RegionResult", "kato_instance",
    "AxisSpec", "FIGURES", "region_grid", "RegionGrid", "curve_intersections",
]

DATA_STRONG = "u1 >= u0 >= 0"   # u0 enters the functional
DATA_U1 = "u1 >= 0"
DATA_NONNEG = "u0, u1 >= 0"


def _below(p: float, thr: Optional[float]) -> bool:
    return thr is not None and p < thr - CRITICAL_TOL * max(1.0, abs(thr))


def _at(p: float, thr: Optional[float]) -> bool:
    return thr is not None and abs(p - thr) <= CRITICAL_TOL * max(1.0, abs(thr))


def _safe_k(num: float, den: float) -> Optional[float]:
    return num / den if den > 0 else None


def _time_bounds(m: ModelParams) -> list[LifespanBound]:
    n, a, mu, p = m.n, m.alpha, m.mu, m.p
    out: list[LifespanBound] = []
    scope = n >= 2
    if a < 1.0:
        X = (1.0 - a) * (n - 1.0) + mu + a
        pG = ex.p_G_prime(n, a, mu)
        p0 = ex.p_0(n, a, mu)
        sub = scope and _below(p, pG)
        out.append(LifespanBound.power_law(
            _safe_k(p - 1.0, 1.0 - X * (p - 1.0) / 2.0) if sub else None,
            "time.glassey", "1 < p < p_G'", sub, data_condition=DATA_STRONG))
        crit = scope and _at(p, pG)
        out.append(LifespanBound.exponential(
            p - 1.0, "time.glassey_critical", "p = p_G'", crit, data_condition=DATA_STRONG))
        ode = scope and _below(p, p0)
        out.append(LifespanBound.power_law(
            _safe_k(p - 1.0, 1.0 - (p - 1.0) * (n * (1.0 - a) + mu)) if ode else None,
            "time.ode", "1 < p < p_0", ode, data_condition=DATA_U1))
        return out
    below = scope and (mu == 0.0 or p < 1.0 + 1.0 / mu - CRITICAL_TOL)
    s = 1.0 - mu * (p - 1.0)
    if a == 1.0:
        out.append(LifespanBound.implicit(
            s, n * (p - 1.0), p - 1.0, "time.accel_boundary", "alpha = 1, p < 1 + 1/mu",
            below, data_condition=DATA_U1))
    else:
        out.append(LifespanBound.power_law(
            _safe_k(p - 1.0, s) if below else None, "time.accel", "alpha > 1, p < 1 + 1/mu",
            below, data_condition=DATA_U1))
    return out


def _space_bounds(m: ModelParams) -> list[LifespanBound]:
    n, a, mu, p, R = m.n, m.alpha, m.mu, m.p, m.R
    out: list[LifespanBound] = []
    scope = n >= 2
    if a >= 1.0:
        if a == 1.0:
            out.append(LifespanBound.implicit(
                2.0, p + n * (p - 1.0), p - 1.0, "space.accel_boundary", "alpha = 1",
                scope, data_condition=DATA_NONNEG))
        else:
            out.append(LifespanBound.power_law(
                (p - 1.0) / 2.0, "space.accel", "alpha > 1", scope, data_condition=DATA_NONNEG))
        return out

    pc = ex.p_c_prime(n, a, mu)
    pF = ex.p_F_prime(n, a)
    p0p = ex.p_0_prime(n, a, mu)

    # below p_c' (or for every p when the quadratic never changes sign)
    wl = scope and (pc.all_p or _below(p, pc.value))
    gp = ex.gamma_prime(n, p, a, mu)
    out.append(LifespanBound.power_law(
        _safe_k(2.0 * p * (p - 1.0), (1.0 - a) * gp) if wl else None,
        "space.wavelike", "1 < p < p_c'", wl, data_condition=DATA_NONNEG))

    ode = scope and _below(p, p0p)
    den = (1.0 - mu - (n + 1.0) * (1.0 - a)) * (p - 1.0) + 1.0 + a
    out.append(LifespanBound.power_law(
        _safe_k(p - 1.0, den) if ode else None,
        "space.ode", "1 < p < p_0'", ode, data_condition=DATA_NONNEG))

    crit = scope and pc.is_finite and _at(p, pc.value) and p > pF + CRITICAL_TOL
    if n == 2:
        crit = crit and a > 2.0 / 7.0 and p > max(pF, 2.0)
    crit = crit and R <= 1.0 / (2.0 * (1.0 - a))
    out.append(LifespanBound.exponential(
        p * (p - 1.0), "space.wavelike_critical", "p = p_c' > p_F'", crit,
        data_condition=DATA_NONNEG))

    hl = scope and _below(p, pF)
    out.append(LifespanBound.power_law(
        _safe_k(p - 1.0, 2.0 - (n * (p - 1.0) + p) * (1.0 - a)) if hl else None,
        "space.heatlike", "1 < p < p_F'", hl, data_condition=DATA_NONNEG))

    hc = scope and _at(p, pF)
    rate = p * (p - 1.0) / (p + 1.0) if mu <= 1.0 else p - 1.0
    out.append(LifespanBound.exponential(
        rate, "space.heatlike_critical", "p = p_F', mu <= 1" if mu <= 1.0 else "p = p_F', mu > 1",
        hc, data_condition=DATA_NONNEG))
    return out


def applicable_bounds(m: ModelParams) -> list[LifespanBound]:
    """All bounds for m's nonlinearity and alpha branch, each flagged applicable or not.

    Order is fixed and decides ties in :func:`best_bound`.
    """
    if m.nonlinearity is Nonlinearity.TIME_DERIVATIVE:
        return _time_bounds(m)
    return _space_bounds(m)


# --- regions ----------------------------------------------------------------

REGION_OF_SOURCE = {
    "time.glassey": "G",
    "time.glassey_critical": "G",
    "time.ode": "O",
    "space.wavelike": "C",
    "space.wavelike_critical": "C",
    "space.ode": "O",
    "space.heatlike": "F",
    "space.heatlike_critical": "F",
    "time.accel_boundary": "A",
    "time.accel": "A",
    "space.accel_boundary": "A",
    "space.accel": "A",
}

NO_BLOWUP = "NoBlowupResult"


@dataclass(frozen=True)
class RegionResult:
    label: str
    bound: Optional[LifespanBound]

    def __str__(self) -> str:
        return self.label


def classify_region(m: ModelParams) -> RegionResult:
    cands = [b for b in applicable_bounds(m) if b.applicable]
    if not cands:
        return RegionResult(NO_BLOWUP, None)
    b = best_bound(cands)
    return RegionResult(REGION_OF_SOURCE[b.source], b)


# --- mapping onto the iteration lemmas -----------------------------------------

def kato_instance(m: ModelParams, source: str) -> Optional[KatoProblem]:
    """Lemma instance behind a bound, with A0 = eps^p; None for non-iterative proofs.

    The returned problem's ``lifespan_bound(...).scaled(p)`` reproduces the
    theorem's exponent (up to the constant).
    """
    n, a, mu, p = m.n, m.alpha, m.mu, m.p
    A0 = m.epsilon ** p
    q_sp = (p + n * (p - 1.0)) * (1.0 - a)
    if source == "time.ode":
        q = n * (1.0 - a) * (p - 1.0)
        return KatoProblem(p=p, mu=mu, q=q, a=mu * (p + 1.0) + q, c=mu + 1.0, A0=A0)
    if source == "time.accel_boundary":
        return KatoProblem(p=p, mu=mu, a=mu * (p + 1.0), b=n * (p - 1.0), r=n * (p - 1.0),
                           c=mu + 1.0, A0=A0)
    if source == "time.accel":
        return KatoProblem(p=p, mu=mu, a=mu * (p + 1.0), c=mu + 1.0, A0=A0)
    if source == "space.wavelike":
        aa = mu * (1.0 + p / 2.0) + (1.0 - a) * (n - 1.0) * p / 2.0 + p * (1.0 - a)
        bb = mu + a * p / 2.0 + (1.0 - a) * (n - 1.0) + 2.0
        return KatoProblem(p=p, mu=mu, q=q_sp, a=aa, b=bb, A0=A0, order=KatoOrder.SECOND)
    if source == "space.ode":
        return KatoProblem(p=p, mu=mu, q=q_sp, a=q_sp + p * mu, b=p + 2.0, A0=A0,
                           order=KatoOrder.SECOND)
    if source == "space.heatlike":
        return KatoProblem(p=p, mu=mu, q=q_sp, a=mu + q_sp, b=mu + 2.0, A0=A0,
                           order=KatoOrder.SECOND)
    if source == "space.heatlike_critical":
        return KatoProblem(p=p, mu=mu, b=1.0, A0=A0, order=KatoOrder.SECOND_LOG)
    if source == "space.accel_boundary":
        lq = p + n * (p - 1.0)
        return KatoProblem(p=p, mu=mu, q=lq, a=mu, b=lq, c=mu + 2.0, A0=A0,
                           order=KatoOrder.SECOND_LOG_Q)
    if source == "space.accel":
        return KatoProblem(p=p, mu=mu, a=mu, c=mu + 2.0, A0=A0, order=KatoOrder.SECOND_LOG_Q)
    # time.glassey*, space.wavelike_critical use test-function arguments instead
    return None


# --- region figures --------------------------------------------------------------

@dataclass(frozen=True)
class AxisSpec:
    """A rectangle in (x, p) with x = mu (fixed alpha) or x = w (FLRW)."""

    x_axis: str
    x_range: tuple[float, float]
    p_range: tuple[float, float]
    nonlinearity: Nonlinearity
    n: int = 3
    alpha: Optional[float] = None
    resolution: "int | tuple[int, int]" = 60
    R: float = 0.5

    def __post_init__(self):
        if self.x_axis not in ("mu", "w"):
            raise DomainError(f"x_axis must be 'mu' or 'w' (got {self.x_axis!r})")
        if self.x_axis == "mu" and self.alpha is None:
            raise DomainError("a mu-axis grid needs alpha")
        object.__setattr__(self, "nonlinearity", Nonlinearity.parse(self.nonlinearity))

    @property
    def shape(self) -> tuple[int, int]:
        r = self.resolution
        nx, npp = (r, r) if isinstance(r, int) else r
        if nx < 1 or npp < 1:
            raise DomainError("resolution must be >= 1")
        return nx, npp

    def model(self, x: float, p: float) -> ModelParams:
        if self.x_axis == "mu":
            return ModelParams(self.n, self.alpha, x, p, R=self.R, nonlinearity=self.nonlinearity)
        return flrw_to_model(FLRWParams(self.n, x), p, R=self.R, nonlinearity=self.nonlinearity)


_T, _S = Nonlinearity.TIME_DERIVATIVE, Nonlinearity.SPACE_DERIVATIVE

FIGURES: dict[int, AxisSpec] = {
    1: AxisSpec("mu", (0.0, 3.0), (1.0, 4.0), _T, alpha=0.2),
    2: AxisSpec("mu", (0.0, 1.0), (1.0, 4.0), _T, alpha=0.9),
    3: AxisSpec("mu", (0.0, 3.0), (1.0, 4.0), _S, alpha=0.0),
    4: AxisSpec("mu", (0.0, 3.0), (1.0, 4.0), _S, alpha=0.3),
    5: AxisSpec("mu", (0.0, 3.0), (1.0, 4.0), _S, alpha=0.7),
    6: AxisSpec("w", (-0.95, 1.0), (1.0, 4.0), _T),
    7: AxisSpec("w", (-0.95, 1.0), (1.0, 4.0), _S),
}


@dataclass(frozen=True)
class GridRow:
    x: float
    p: float
    region: str
    bound_kind: str
    exponent: Optional[float]


@dataclass
class RegionGrid:
    spec: AxisSpec
    rows: list[GridRow]
    curves: dict[str, list[tuple[float, float]]] = field(default_factory=dict)


def _midpoints(lo: float, hi: float, k: int) -> list[float]:
    h = (hi - lo) / k
    return [lo + (i + 0.5) * h for i in range(k)]


def region_grid(spec: AxisSpec, curve_samples: int = 400) -> RegionGrid:
    """Classify cell midpoints; rows are ordered by x, then p."""
    nx, npp = spec.shape
    rows = []
    for x in _midpoints(*spec.x_range, nx):
        for p in _midpoints(*spec.p_range, npp):
            res = classify_region(spec.model(x, p))
            b = res.bound
            rows.append(GridRow(x, p, res.label, b.kind.value if b else "none",
                                b.headline if b else None))
    return RegionGrid(spec, rows, threshold_curves(spec, curve_samples))


def _curve_functions(spec: AxisSpec) -> dict[str, Callable[[float], Optional[float]]]:
    n = spec.n

    def am(x: float) -> tuple[float, float]:
        if spec.x_axis == "mu":
            return spec.alpha, x
        f = FLRWParams(n, x)
        return f.alpha, f.mu

    def guard(fn):
        def g(x):
            a, mu = am(x)
            if a >= 1.0:
                return None
            try:
                v = fn(a, mu)
            except (DomainError, ZeroDivisionError):
                return None
            return v if v is not None and math.isfinite(v) else None
        return g

    def pc(a, mu):
        r = ex.p_c_prime(n, a, mu)
        return r.value

    def split(num, den):
        return num / den if den > 0 else None

    if spec.nonlinearity is _T:
        out = {
            "p_G_prime": guard(lambda a, mu: ex.p_G_prime(n, a, mu)),
            "p_0": guard(lambda a, mu: ex.p_0(n, a, mu)),
        }
        if spec.x_axis == "w":
            def accel(x):
                a, mu = am(x)
                return 1.0 + 1.0 / mu if a >= 1.0 else None
            out["p_accel"] = accel
        return out
    out = {
        "p_c_prime": guard(pc),
        "p_F_prime": guard(lambda a, mu: ex.p_F_prime(n, a)),
        "p_0_prime": guard(lambda a, mu: ex.p_0_prime(n, a, mu)),
        # where the competing power laws have equal exponent
        "split_FC": guard(lambda a, mu: split(2 * (1 - a), (n + 1) * (1 - a) - mu + a)),
        "split_CO": guard(lambda a, mu: split(2 * (1 - a), (n + 1) * (1 - a) + mu + a - 2)),
    }
    return out


def _verticals(spec: AxisSpec) -> dict[str, float]:
    n = spec.n
    if spec.x_axis == "mu":
        if spec.nonlinearity is _T:
            v = {"mu_crossing": ex.mu_crossing(n, spec.alpha)}
        else:
            v = {"mu_star": ex.mu_star(n, spec.alpha), "mu_zero": ex.mu_zero(n, spec.alpha)}
    else:
        v = {"w_boundary": 2.0 / n - 1.0}
        if spec.nonlinearity is _S:
            v["w_star"] = ex.critical_w(n).value
    lo, hi = spec.x_range
    return {k: x for k, x in v.items() if lo <= x <= hi}


def threshold_curves(spec: AxisSpec, samples: int = 400) -> dict[str, list[tuple[float, float]]]:
    curves: dict[str, list[tuple[float, float]]] = {}
    xs = _midpoints(*spec.x_range, samples)
    for name, fn in _curve_functions(spec).items():
        pts = [(x, y) for x in xs if (y := fn(x)) is not None]
        if pts:
            curves[name] = pts
    for name, x0 in _verticals(spec).items():
        curves[name] = [(x0, spec.p_range[0]), (x0, spec.p_range[1])]
    return curves


def curve_intersections(spec: AxisSpec, pairs: Sequence[tuple[str, str]],
                        samples: int = 2000) -> dict[tuple[str, str], list[tuple[float, float]]]:
    """Crossings of named threshold curves, located by sign change and brentq."""
    from scipy.optimize import brentq

    fns = _curve_functions(spec)
    xs = [spec.x_range[0] + (spec.x_range[1] - spec.x_range[0]) * i / samples
          for i in range(samples + 1)]
    out = {}
    for f1, f2 in pairs:
        g1, g2 = fns[f1], fns[f2]

        def d(x):
            u, v = g1(x), g2(x)
            return None if u is None or v is None else u - v

        found = []
        prev = None
        for x in xs:
            cur = d(x)
            if cur is not None and prev is not None and prev[1] * cur < 0:
                root = brentq(lambda z: d(z), prev[0], x, xtol=1e-14, rtol=1e-14)
                found.append((root, g1(root)))
            elif cur == 0.0:
                found.append((x, g1(x)))
            prev = (x, cur) if cur is not None else None
        out[(f1, f2)] = found
    return out
