"""Epsilon sweeps, log-log lifespan fits and comparison with the predicted exponent."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bounds import BoundKind, ImplicitValue, LifespanBound, best_bound, bound_value
from .params import DomainError
from .regions import applicable_bounds
from .solver import SolverConfig, run

MIN_POINTS = 4


@dataclass(frozen=True)
class SweepPoint:
    epsilon: float
    T_num: Optional[float]
    blew_up: bool
    converged: Optional[bool]
    sensitivity: Optional[float]
    reason: str
    dr: float
    t_max: float

    @property
    def usable(self) -> bool:
        return self.blew_up and bool(self.converged) and self.T_num is not None

    @property
    def censored(self) -> bool:
        return not self.blew_up


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float


@dataclass
class SweepResult:
    points: list[SweepPoint]
    predicted: Optional[LifespanBound]
    fit: Optional[Fit] = None
    note: str = ""

    @property
    def usable(self) -> list[SweepPoint]:
        return [p for p in self.points if p.usable]

    @property
    def censored(self) -> list[SweepPoint]:
        return [p for p in self.points if p.censored]


def predicted_bound(cfg: SolverConfig) -> Optional[LifespanBound]:
    bs = [b for b in applicable_bounds(cfg.model) if b.applicable]
    return best_bound(bs) if bs else None


def expected_lifespan(b: Optional[LifespanBound], epsilon: float) -> float:
    """Bound value with C = 1; inf when unavailable or overflowing."""
    if b is None:
        return math.inf
    v = bound_value(b, epsilon)
    v = v.T if isinstance(v, ImplicitValue) else v
    return v if math.isfinite(v) else math.inf


def point_config(cfg: SolverConfig, epsilon: float, b: Optional[LifespanBound],
                 horizon_factor: float) -> SolverConfig:
    T_exp = expected_lifespan(b, epsilon)
    if math.isfinite(T_exp) and T_exp > 1.0:
        t_max = max(horizon_factor * T_exp, 1.0 + 1e-6)
        # keep at least ~1000 steps up to the expected lifespan
        dr = min(cfg.dr, T_exp / (1000.0 * cfg.cfl))
    else:
        t_max, dr = cfg.t_max, cfg.dr
    return cfg.with_(model=cfg.model.with_(epsilon=epsilon), t_max=t_max, dr=dr, r_max=None)


def _run_point(c: SolverConfig) -> SweepPoint:
    o = run(c, sensitivity=True, record=False)
    return SweepPoint(c.model.epsilon, o.T_num, o.blew_up, o.converged, o.sensitivity,
                      o.reason, c.dr, c.t_max)


def run_sweep(cfg: SolverConfig, epsilons: Sequence[float], horizon_factor: float = 100.0,
              workers: Optional[int] = None) -> SweepResult:
    """One simulation per epsilon; results come back in input order.

    ``workers`` = 1 runs serially; otherwise a process pool is used.
    """
    eps = [float(e) for e in epsilons]
    if not eps:
        raise DomainError("need at least one epsilon")
    if any(not e > 0 for e in eps):
        raise DomainError("epsilons must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError("epsilons must be strictly decreasing")
    b = predicted_bound(cfg)
    configs = [point_config(cfg, e, b, horizon_factor) for e in eps]
    if workers == 1 or len(configs) == 1:
        points = [_run_point(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            points = list(ex.map(_run_point, configs))
    res = SweepResult(points, b)
    try:
        res.fit = fit_scaling(res)
    except DomainError as exc:
        res.note = str(exc)
    return res


def fit_scaling(data) -> Fit:
    """OLS of ln T against ln(1/eps).  Accepts a SweepResult or (eps, T) pairs."""
    if isinstance(data, SweepResult):
        pairs = [(p.epsilon, p.T_num) for p in data.usable]
    else:
        pairs = [(float(e), float(t)) for e, t in data]
    if len(pairs) < MIN_POINTS:
        raise DomainError(f"fit needs at least {MIN_POINTS} usable points (have {len(pairs)})")
    x = np.log(1.0 / np.array([e for e, _ in pairs]))
    y = np.log(np.array([t for _, t in pairs]))
    if np.ptp(x) <= 1e-12 * max(1.0, np.max(np.abs(x))):
        raise DomainError("degenerate abscissas: all epsilons equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return Fit(float(slope), float(intercept), r2)


@dataclass
class Comparison:
    verdict: str                 # PASS, WARN, FAIL or QUALITATIVE
    gamma_fit: Optional[float]
    predicted_k: Optional[float]
    ratio: Optional[float]
    one_sided: list = field(default_factory=list)   # (eps, T_num, bound*slack, ok)
    monotonicity_violations: list = field(default_factory=list)
    censored: list = field(default_factory=list)
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict, "slope": self.gamma_fit, "predicted_k": self.predicted_k,
            "ratio": self.ratio, "one_sided": self.one_sided,
            "monotonicity_violations": self.monotonicity_violations,
            "censored": self.censored, "message": self.message,
        }


def monotonicity_violations(res: SweepResult, tol: float = 0.02) -> list:
    pts = [p for p in res.points if p.T_num is not None and p.blew_up]
    return [(a.epsilon, b.epsilon) for a, b in zip(pts, pts[1:])
            if b.T_num < a.T_num * (1.0 - tol)]


def compare_prediction(res: SweepResult, slack: float = 1e3, rel_tol: float = 0.25) -> Comparison:
    b = res.predicted
    cens = [p.epsilon for p in res.censored]
    mono = monotonicity_violations(res)
    g = res.fit.slope if res.fit else None
    if b is None or b.kind is not BoundKind.POWER_LAW:
        return Comparison("QUALITATIVE", g, None, None, [], mono, cens,
                          "prediction is not a power law; no exponent comparison")
    k = b.exponent
    checks = []
    for p in res.usable:
        lim = bound_value(b, p.epsilon) * slack
        checks.append((p.epsilon, p.T_num, lim, p.T_num <= lim))
    if res.fit is None:
        # too few usable points (e.g. all censored): report only
        return Comparison("QUALITATIVE", None, k, None, checks, mono, cens, res.note or "no fit")
    ratio = g / k
    one_sided_ok = all(c[3] for c in checks)
    if not one_sided_ok:
        verdict = "FAIL"
    elif abs(ratio - 1.0) <= rel_tol:
        verdict = "PASS"
    else:
        verdict = "WARN"
    return Comparison(verdict, g, k, ratio, checks, mono, cens)
