"""Kato-type iteration lemmas in executable form.

Four variants are covered, keyed by :class:`KatoOrder`:

FIRST
    F' + (mu/t) F >= A1 (t+R)^-q (ln t)^-r |F|^p, with the lower bound
    F >= A0 t^-a (ln t)^-b (t - T1)^c.
SECOND
    F'' + (mu/t) F' >= A1 (t+R)^-q |F|^p, with F >= A0 t^-a (t - T1)^b.
SECOND_LOG
    F'' + (mu/t) F' >= A1 (t+R)^-2 |F|^p, with F >= A0 (ln(t/T1))^b.
SECOND_LOG_Q
    F'' + (mu/t) F' >= A1 (ln t)^-q |F|^p, with F >= A0 t^-a (ln t)^-b (t-T1)^c.

Each yields an upper bound on the lifespan in terms of A0.  The iteration
sequences, the growth constant E and the divergence bracket belong to the
first-order variant; :func:`ode_oracle` integrates the saturated equality as
an independent check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .bounds import LifespanBound
from .params import DomainError


class HorizonExceeded(RuntimeError):
    """No blow-up / crossing before the search horizon."""

    def __init__(self, message: str, last_t: float):
        super().__init__(message)
        self.last_t = last_t


class KatoOrder(str, enum.Enum):
    FIRST = "first"
    SECOND = "second"
    SECOND_LOG = "second_log"
    SECOND_LOG_Q = "second_log_q"


@dataclass(frozen=True)
class KatoProblem:
    p: float
    a: float = 0.0
    b: float = 0.0
    c: float = 1.0
    q: float = 0.0
    r: float = 0.0
    mu: float = 0.0
    A0: float = 1.0
    A1: float = 1.0
    R: float = 1.0
    T0: float = 1.0
    T1: float = 2.0
    order: KatoOrder = KatoOrder.FIRST

    def __post_init__(self):
        object.__setattr__(self, "order", KatoOrder(self.order))
        if not self.p > 1:
            raise DomainError(f"p must be > 1 (got {self.p})")
        for name in ("a", "b", "q", "r", "mu"):
            if getattr(self, name) < 0:
                raise DomainError(f"{name} must be >= 0 (got {getattr(self, name)})")
        for name in ("A0", "A1", "R"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")
        if self.order in (KatoOrder.FIRST, KatoOrder.SECOND_LOG_Q) and not self.c > 0:
            raise DomainError(f"c must be > 0 (got {self.c})")
        if not (self.T1 > self.T0 >= 1.0):
            raise DomainError("needs T1 > T0 >= 1")

    def with_(self, **kw) -> "KatoProblem":
        return replace(self, **kw)

    @property
    def M(self) -> float:
        p = self.p
        if self.order is KatoOrder.FIRST:
            return (p - 1.0) * (self.c - self.a) - self.q + 1.0
        if self.order is KatoOrder.SECOND:
            return (p - 1.0) * (self.b - self.a) - self.q + 2.0
        if self.order is KatoOrder.SECOND_LOG_Q:
            return (p - 1.0) * (self.c - self.a) + 2.0
        # SECOND_LOG: denominator of the exponential rate
        return self.b * (p - 1.0) + (2.0 if self.mu <= 1.0 else 1.0)

    def require_positive_M(self) -> float:
        M = self.M
        if not M > 0:
            raise DomainError(f"{self.order.value} lemma needs M > 0 (M = {M:.12g})")
        return M


@dataclass(frozen=True)
class KatoIteration:
    j: int
    a_j: float
    b_j: float
    c_j: float
    log_D_j: float


MAX_ITER = 10_000


def _check_j(j: int) -> None:
    if j < 0 or j > MAX_ITER:
        raise DomainError(f"iteration index must lie in [0, {MAX_ITER}] (got {j})")


def _log_C(prob: KatoProblem) -> float:
    return -prob.q * math.log1p(prob.R)


def iterate(prob: KatoProblem, j: int) -> KatoIteration:
    """Run the sequence recursion j times (D in log domain)."""
    _check_j(j)
    p, mu = prob.p, prob.mu
    a, b, c, logD = prob.a, prob.b, prob.c, math.log(prob.A0)
    logAC = math.log(prob.A1) + _log_C(prob)
    for _ in range(j):
        c_next = p * c + mu + 1.0
        logD = logAC + p * logD - math.log(c_next)
        a = p * a + mu + prob.q
        b = p * b + prob.r
        c = c_next
    return KatoIteration(j, a, b, c, logD)


def closed_form(prob: KatoProblem, j: int) -> KatoIteration:
    _check_j(j)
    p, mu, q, r = prob.p, prob.mu, prob.q, prob.r
    pj = p ** j
    sa, sb, sc = (mu + q) / (p - 1.0), r / (p - 1.0), (mu + 1.0) / (p - 1.0)
    a_j = pj * (prob.a + sa) - sa
    b_j = pj * (prob.b + sb) - sb
    c_j = pj * (prob.c + sc) - sc
    logAC = math.log(prob.A1) + _log_C(prob)
    terms = [pj * math.log(prob.A0)]
    for i in range(j):
        c_next = p ** (i + 1) * (prob.c + sc) - sc
        terms.append(p ** (j - 1 - i) * (logAC - math.log(c_next)))
    return KatoIteration(j, a_j, b_j, c_j, math.fsum(terms))


def log_B(prob: KatoProblem) -> float:
    return math.log(prob.A1) + _log_C(prob) - math.log(prob.c + (prob.mu + 1.0) / (prob.p - 1.0))


def log_D_lower_bound(prob: KatoProblem, j: int) -> float:
    """Explicit lower bound on log D_j obtained by unrolling D_j >= B D_{j-1}^p / p^j."""
    p = prob.p
    pj = p ** j
    s = math.fsum(k * p ** (-k) for k in range(j + 1))
    return log_B(prob) / (p - 1.0) * (pj - 1.0) - pj * s * math.log(p) + pj * math.log(prob.A0)


def growth_E(prob: KatoProblem) -> float:
    p = prob.p
    # sum_{k>=0} k p^-k = p/(p-1)^2
    return min(0.0, log_B(prob)) / (p - 1.0) - math.log(p) * p / (p - 1.0) ** 2 + math.log(prob.A0)


def lifespan_bound(prob: KatoProblem) -> LifespanBound:
    """Upper bound on T in terms of A0 with C = 1."""
    M = prob.require_positive_M()
    p = prob.p
    o = prob.order
    if o is KatoOrder.FIRST:
        return LifespanBound.implicit(M / (p - 1.0), prob.b + prob.r / (p - 1.0), 1.0,
                                      "kato.first", "M > 0", True)
    if o is KatoOrder.SECOND:
        return LifespanBound.power_law((p - 1.0) / M, "kato.second", "M > 0", True)
    if o is KatoOrder.SECOND_LOG:
        if not prob.b > 0:
            raise DomainError("log lemma needs b > 0")
        return LifespanBound.exponential((p - 1.0) / M, "kato.second_log",
                                         "mu <= 1" if prob.mu <= 1.0 else "mu > 1", True)
    return LifespanBound.implicit(M / (p - 1.0), prob.b + prob.q / (p - 1.0), 1.0,
                                  "kato.second_log_q", "M > 0", True)


def bracket(prob: KatoProblem, t: float) -> float:
    """Exponent bracket multiplying p^j in the iterated lower bound."""
    p, mu = prob.p, prob.mu
    val = (growth_E(prob)
           + (prob.c + (mu + 1.0) / (p - 1.0)) * math.log(t - prob.T1)
           - (prob.a + (mu + prob.q) / (p - 1.0)) * math.log(t))
    lw = prob.b + prob.r / (p - 1.0)
    if lw:
        val -= lw * math.log(math.log(t))
    return val


def divergence_time(prob: KatoProblem, delta: float = 0.1, horizon: float = 1e300) -> float:
    """Smallest t > T1 + 1 at which the bracket reaches delta."""
    if prob.order is not KatoOrder.FIRST:
        raise DomainError("divergence_time is defined for the first-order lemma")
    prob.require_positive_M()
    lo = prob.T1 + 1.0
    if bracket(prob, lo) >= delta:
        return lo
    # search on u = ln(t - T1) so huge horizons stay cheap
    ulo = 0.0
    uhi = 1.0
    uh_max = math.log(horizon - prob.T1) if horizon < 1e300 else math.log(horizon)
    f = lambda u: bracket(prob, prob.T1 + math.exp(u))
    while f(uhi) < delta:
        ulo = uhi
        uhi *= 2.0
        if uhi > uh_max:
            if f(uh_max) < delta:
                raise HorizonExceeded(f"bracket stays below {delta} up to t = {horizon:.3g}",
                                      prob.T1 + math.exp(uh_max))
            uhi = uh_max
            break
    for _ in range(200):
        mid = 0.5 * (ulo + uhi)
        if f(mid) < delta:
            ulo = mid
        else:
            uhi = mid
        if uhi - ulo < 1e-14 * max(1.0, uhi):
            break
    return prob.T1 + math.exp(uhi)


# --- independent ODE oracle --------------------------------------------------

def _forcing(prob: KatoProblem, t: float) -> float:
    o = prob.order
    if o is KatoOrder.FIRST:
        f = prob.A1 * (t + prob.R) ** (-prob.q)
        if prob.r:
            f *= math.log(t) ** (-prob.r)
        return f
    if o is KatoOrder.SECOND:
        return prob.A1 * (t + prob.R) ** (-prob.q)
    if o is KatoOrder.SECOND_LOG:
        return prob.A1 * (t + prob.R) ** (-2.0)
    return prob.A1 * math.log(t) ** (-prob.q) if prob.q else prob.A1


def _rhs(prob: KatoProblem, t: float, y: tuple[float, ...]) -> tuple[float, ...]:
    g = _forcing(prob, t) * abs(y[0]) ** prob.p
    if prob.order is KatoOrder.FIRST:
        return (-prob.mu / t * y[0] + g,)
    return (y[1], -prob.mu / t * y[1] + g)


def _rk4(prob, t, y, h):
    k1 = _rhs(prob, t, y)
    k2 = _rhs(prob, t + h / 2, tuple(yi + h / 2 * ki for yi, ki in zip(y, k1)))
    k3 = _rhs(prob, t + h / 2, tuple(yi + h / 2 * ki for yi, ki in zip(y, k2)))
    k4 = _rhs(prob, t + h, tuple(yi + h * ki for yi, ki in zip(y, k3)))
    return tuple(yi + h / 6 * (a + 2 * b + 2 * c + d) for yi, a, b, c, d in zip(y, k1, k2, k3, k4))


def ode_oracle(prob: KatoProblem, F0: float | None = None, dF0: float | None = None,
               threshold: float = 1e12, horizon: float = 1e15, eta: float = 5e-3,
               max_steps: int = 2_000_000) -> float:
    """Blow-up time of the saturated equality started at T0.

    Steps are a fraction ``eta`` of both t and the local growth time |y|/|y'|;
    a step in which |F| more than doubles is rejected and halved.
    """
    first = prob.order is KatoOrder.FIRST
    needs_log = (first and prob.r > 0) or (prob.order is KatoOrder.SECOND_LOG_Q and prob.q > 0)
    if needs_log and prob.T0 <= 1.0:
        raise DomainError("logarithmic weight needs T0 > 1")
    F0 = prob.A0 if F0 is None else F0
    if first:
        if not F0 > 0:
            raise DomainError("first-order oracle needs F(T0) > 0")
        y: tuple[float, ...] = (F0,)
    else:
        dF0 = prob.A0 if dF0 is None else dF0
        if not (F0 >= 0 and dF0 > 0):
            raise DomainError("second-order oracle needs F(T0) >= 0 and F'(T0) > 0")
        y = (F0, dF0)
    t = prob.T0
    for _ in range(max_steps):
        if abs(y[0]) > threshold:
            return t
        if t > horizon:
            raise HorizonExceeded(f"no blow-up before t = {horizon:.3g}", t)
        dy = _rhs(prob, t, y)
        h = t
        for yi, di in zip(y, dy):
            if yi != 0.0 and di != 0.0:
                h = min(h, abs(yi / di))
        h *= eta
        while True:
            y_new = _rk4(prob, t, y, h)
            finite = all(math.isfinite(v) for v in y_new)
            if finite and (y[0] == 0.0 or abs(y_new[0]) <= 2.0 * abs(y[0])):
                break
            h *= 0.5
            if h < 1e-300:
                return t
        t += h
        y = y_new
    raise HorizonExceeded("step budget exhausted", t)
