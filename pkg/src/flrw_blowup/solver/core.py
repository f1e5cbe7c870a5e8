"""Radial method-of-lines solver with blow-up detection.

The system u_t = v, v_t = t^(-2 alpha)(u_rr + (n-1)u_r/r) - (mu/t) v + N is
advanced with classical RK4 on r_i = i dr.  Only points up to a little past
R + A(t) are updated; the solution vanishes beyond the light cone.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ..params import DomainError, ModelParams, Nonlinearity, lightcone_radius, validate
from ..specfun import _gl, _sphere_area
from . import backend

# cells kept active beyond R + A(t)
ACTIVE_PAD = 16
DT_MIN = 1e-12


def bump(s):
    """exp(1 - 1/(1 - s^2)) on |s| < 1, zero elsewhere; bump(0) = 1."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


@dataclass(frozen=True)
class Profile:
    """u0 = amp * bump(r/R)^2 and u1 = u1_factor * u0 + u1_bump * bump(r/R)."""

    amp: float = 1.0
    u1_factor: float = 2.0
    u1_bump: float = 1.0

    def u0(self, r, R):
        return self.amp * bump(np.asarray(r) / R) ** 2

    def u1(self, r, R):
        return self.u1_factor * self.u0(r, R) + self.u1_bump * bump(np.asarray(r) / R)


@dataclass(frozen=True)
class SolverConfig:
    model: ModelParams
    dr: float = 0.02
    t_max: float = 10.0
    cfl: float = 0.5
    threshold: float = 1e6
    r_max: Optional[float] = None
    profile: Profile = field(default_factory=Profile)
    nonlinear: bool = True
    dt_max: Optional[float] = None   # defaults to cfl * dr
    diag_every: int = 50
    check_data: bool = True

    def __post_init__(self):
        validate(self.model)
        if not self.dr > 0:
            raise DomainError("dr must be > 0")
        if not self.t_max > 1.0:
            raise DomainError("t_max must be > 1")
        if not 0 < self.cfl <= 1.0:
            raise DomainError("cfl must lie in (0, 1]")
        need = self.model.R + lightcone_radius(self.t_max, self.model.alpha) + 10 * self.dr
        if self.r_max is None:
            object.__setattr__(self, "r_max", need)
        elif self.r_max < need:
            raise DomainError(f"r_max = {self.r_max} is inside the light cone at t_max (needs {need:.6g})")

    @property
    def npts(self) -> int:
        return int(math.ceil(self.r_max / self.dr)) + 1

    @property
    def mode(self) -> int:
        if not self.nonlinear:
            return 0
        return 1 if self.model.nonlinearity is Nonlinearity.TIME_DERIVATIVE else 2

    @property
    def dt_cap(self) -> float:
        return self.cfl * self.dr if self.dt_max is None else self.dt_max

    def with_(self, **kw) -> "SolverConfig":
        if "model" not in kw and any(k in kw for k in ("dr", "t_max")):
            kw.setdefault("r_max", None)
        return replace(self, **kw)


@dataclass
class FieldState:
    t: float
    u: np.ndarray
    v: np.ndarray
    steps: int = 0
    dt_scale: float = 1.0       # halved on every doubling of sup|v|
    sup_v: float = 0.0
    last_dt: float = 0.0
    work: np.ndarray = field(default=None, repr=False)

    def copy(self) -> "FieldState":
        return copy.deepcopy(self)


@dataclass
class SimOutcome:
    blew_up: bool
    T_num: Optional[float]
    max_sup_v: float
    t_end: float
    steps: int
    reason: str
    sensitivity: Optional[float] = None
    converged: Optional[bool] = None
    diagnostics: list = field(default_factory=list)
    support_violation: float = 0.0
    min_int_ut: Optional[float] = None

    def summary(self) -> dict:
        return {
            "blew_up": self.blew_up, "T_num": self.T_num, "reason": self.reason,
            "sensitivity": self.sensitivity, "converged": self.converged,
            "max_sup_v": self.max_sup_v, "t_end": self.t_end, "steps": self.steps,
            "support_violation": self.support_violation, "min_int_ut": self.min_int_ut,
        }


def grid(cfg: SolverConfig) -> np.ndarray:
    return np.arange(cfg.npts) * cfg.dr


# --- data ------------------------------------------------------------------------

def data_requirement(m: ModelParams) -> str:
    """'u1>=u0>=0', 'u1>=0' or 'u0,u1>=0' depending on the bounds that apply at m."""
    from ..regions import DATA_U1, applicable_bounds

    if m.nonlinearity is Nonlinearity.SPACE_DERIVATIVE:
        return "u0,u1>=0"
    bs = [b for b in applicable_bounds(m) if b.applicable]
    if any(b.data_condition == DATA_U1 for b in bs):
        return "u1>=0"
    return "u1>=u0>=0"


def check_data(u0: np.ndarray, u1: np.ndarray, m: ModelParams) -> None:
    req = data_requirement(m)
    tol = 1e-14
    problems = []
    if req == "u1>=0":
        if np.any(u1 < -tol):
            problems.append("u1 must be >= 0")
    elif req == "u0,u1>=0":
        if np.any(u0 < -tol) or np.any(u1 < -tol):
            problems.append("u0 and u1 must be >= 0")
    else:
        if np.any(u0 < -tol):
            problems.append("u0 must be >= 0")
        if np.any(u1 < u0 - tol):
            problems.append("u1 >= u0 must hold pointwise")
    if problems:
        raise DomainError(f"data violate {req}: " + "; ".join(problems))


def init(cfg: SolverConfig) -> FieldState:
    m = cfg.model
    r = grid(cfg)
    u0 = cfg.profile.u0(r, m.R)
    u1 = cfg.profile.u1(r, m.R)
    if cfg.check_data:
        check_data(u0, u1, m)
    st = FieldState(1.0, m.epsilon * u0, m.epsilon * u1)
    st.sup_v = float(np.max(np.abs(st.v)))
    st.work = np.zeros((6, r.size))
    return st


# --- stepping ---------------------------------------------------------------------

def active_points(cfg: SolverConfig, t: float) -> int:
    edge = cfg.model.R + lightcone_radius(t, cfg.model.alpha)
    return min(cfg.npts, int(edge / cfg.dr) + ACTIVE_PAD)


def next_dt(state: FieldState, cfg: SolverConfig) -> float:
    a = cfg.model.alpha
    return min(cfg.cfl * cfg.dr * state.t ** a, cfg.dt_cap) * state.dt_scale


def step(state: FieldState, cfg: SolverConfig, kernels=None) -> FieldState:
    """One RK4 step in place; returns the same state object.

    Sets ``sup_v`` to -1 when a non-finite value appears.
    """
    k = kernels or backend.kernels
    m = cfg.model
    dt = next_dt(state, cfg)
    if state.work is None:
        state.work = np.zeros((6, state.u.size))
    npts = active_points(cfg, state.t + dt)
    old = state.sup_v
    sup = k.rk4_step(state.u, state.v, state.work, state.t, dt, cfg.dr, npts,
                     m.n, m.alpha, m.mu, m.p, cfg.mode)
    state.t += dt
    state.steps += 1
    state.last_dt = dt
    state.sup_v = sup
    if sup > 2.0 * old > 0.0:
        state.dt_scale *= 0.5
    return state


# --- diagnostics --------------------------------------------------------------------

def _radial_weights(cfg: SolverConfig, npts: int) -> np.ndarray:
    r = np.arange(npts) * cfg.dr
    w = _sphere_area(cfg.model.n - 1) * r ** (cfg.model.n - 1) * cfg.dr
    w[0] *= 0.5
    return w


def diagnostics(state: FieldState, cfg: SolverConfig) -> dict:
    w = _radial_weights(cfg, state.u.size)
    au = np.abs(state.u)
    nz = np.nonzero(au > 1e-10)[0]
    return {
        "t": state.t,
        "int_u": float(w @ state.u),
        "int_ut": float(w @ state.v),
        "sup_v": float(np.max(np.abs(state.v))),
        "support_radius": float(nz[-1] * cfg.dr) if nz.size else 0.0,
        "support_violation": support_check(state, cfg),
    }


def support_check(state: FieldState, cfg: SolverConfig) -> float:
    """max |u| beyond R + A(t) + 3 dr."""
    edge = cfg.model.R + lightcone_radius(state.t, cfg.model.alpha) + 3.0 * cfg.dr
    i0 = int(math.floor(edge / cfg.dr)) + 1
    if i0 >= state.u.size:
        return 0.0
    return float(np.max(np.abs(state.u[i0:])))


# --- driver ----------------------------------------------------------------------------

def _advance(state: FieldState, cfg: SolverConfig, threshold: float, t_stop: float,
             diag: Optional[list], kernels=None):
    """Step until blow-up or t_stop.  Returns (reason, time) with reason in
    {'threshold', 'nonfinite', 'dt_underflow', 'horizon'}."""
    while state.t < t_stop:
        dt = next_dt(state, cfg)
        if dt < DT_MIN:
            return "dt_underflow", state.t
        t_prev = state.t
        step(state, cfg, kernels)
        if state.sup_v < 0:
            return "nonfinite", t_prev
        if diag is not None and state.steps % cfg.diag_every == 0:
            diag.append(diagnostics(state, cfg))
        if state.sup_v > threshold:
            return "threshold", state.t
    return "horizon", state.t


def run(cfg: SolverConfig, sensitivity: bool = True, kernels=None,
        record: bool = True) -> SimOutcome:
    state = init(cfg)
    diag: Optional[list] = [diagnostics(state, cfg)] if record else None
    max_sup = state.sup_v
    reason, T = _advance(state, cfg, cfg.threshold, cfg.t_max, diag, kernels)
    if reason in ("threshold", "nonfinite", "dt_underflow"):
        max_sup = math.inf if reason == "nonfinite" else max(max_sup, state.sup_v)
    else:
        max_sup = max(max_sup, state.sup_v)
    out = SimOutcome(
        blew_up=reason != "horizon", T_num=T if reason != "horizon" else None,
        max_sup_v=max_sup, t_end=state.t, steps=state.steps, reason=reason,
    )
    if diag is not None:
        if reason != "nonfinite":
            diag.append(diagnostics(state, cfg))
        out.diagnostics = diag
        out.support_violation = max(d["support_violation"] for d in diag)
        out.min_int_ut = min(d["int_ut"] for d in diag)
    if out.blew_up and sensitivity:
        if reason == "threshold":
            # continue the same trajectory to a 100x larger threshold
            reason2, T2 = _advance(state, cfg, 100.0 * cfg.threshold, math.inf, None, kernels)
        else:
            T2 = T
        out.sensitivity = abs(T2 - T) / T
        out.converged = out.sensitivity < 0.01
    return out


# --- linear validation ---------------------------------------------------------------

def dalembert_reference(cfg: SolverConfig, t: float, r: np.ndarray,
                        nodes: int = 400) -> np.ndarray:
    """Exact linear solution for n = 3, alpha = mu = 0 via w = r u (r > 0).

    The data are smooth, so a fixed Gauss-Legendre rule on the overlap of the
    characteristic interval with the support is accurate to roundoff.
    """
    m = cfg.model
    if not (m.n == 3 and m.alpha == 0.0 and m.mu == 0.0):
        raise DomainError("d'Alembert reference needs n = 3 and alpha = mu = 0")
    eps, R, prof = m.epsilon, m.R, cfg.profile
    W0 = lambda s: eps * s * prof.u0(np.abs(s), R)
    W1 = lambda s: eps * s * prof.u1(np.abs(s), R)
    x, w = _gl(nodes)
    tau = t - 1.0
    r = np.asarray(r, dtype=float)
    out = np.empty(len(r))
    for i, ri in enumerate(r):
        a, b = ri - tau, ri + tau
        lo, hi = max(a, -R), min(b, R)
        integ = 0.0
        if hi > lo:
            h = 0.5 * (hi - lo)
            integ = h * float(np.dot(w, W1(lo + h * (x + 1.0))))
        out[i] = (0.5 * (float(W0(b)) + float(W0(a))) + 0.5 * integ) / ri
    return out


@dataclass
class ConvergenceReport:
    drs: list
    errors: list
    order: float

    @property
    def ratios(self) -> list:
        return [e0 / e1 if e1 > 0 else math.inf for e0, e1 in zip(self.errors, self.errors[1:])]


def convergence_test(cfg: SolverConfig, t_end: float = 2.0, levels: int = 3,
                     kernels=None) -> ConvergenceReport:
    """Max error at common grid points against d'Alembert for dr, dr/2, dr/4, ..."""
    if cfg.nonlinear:
        raise DomainError("convergence test needs the linear equation")
    base = cfg.with_(t_max=t_end)
    drs = [cfg.dr / 2 ** k for k in range(levels)]
    # sample at coarse points with r > 0
    r_ref = np.arange(1, base.npts - 1) * cfg.dr
    ref = dalembert_reference(cfg, t_end, r_ref)
    errors = []
    for k, dr in enumerate(drs):
        c = base.with_(dr=dr, r_max=base.r_max)
        st = init(c)
        # land exactly on t_end
        nsteps = int(math.ceil((t_end - 1.0) / c.dt_cap))
        c = c.with_(dt_max=(t_end - 1.0) / nsteps)
        for _ in range(nsteps):
            step(st, c, kernels)
        idx = np.arange(1, base.npts - 1) * 2 ** k
        errors.append(float(np.max(np.abs(st.u[idx] - ref))))
    if errors[-1] == 0.0 or errors[0] == 0.0:
        order = math.inf if errors[0] == 0.0 else float("nan")
        return ConvergenceReport(drs, errors, math.inf if all(e == 0 for e in errors) else order)
    order = math.log(errors[-2] / errors[-1]) / math.log(2.0)
    return ConvergenceReport(drs, errors, order)
