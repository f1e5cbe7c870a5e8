"""Critical exponents, threshold damping values and the FLRW quadratics.

All functions are closed-form.  Inputs with ``alpha >= 1`` are rejected by
anything that divides by ``1 - alpha``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

from .params import DomainError, FLRWParams, Regime, flrw_to_model

# branch selection at exact criticality (p == threshold) downstream
CRITICAL_TOL = 1e-12


@dataclass(frozen=True)
class RootDescriptor:
    """Positive root of a wavelike quadratic, or ALL_P when it is positive for every p > 1."""

    value: Optional[float]

    @property
    def all_p(self) -> bool:
        return self.value is None

    @property
    def is_finite(self) -> bool:
        return self.value is not None

    def __float__(self) -> float:
        return math.inf if self.value is None else self.value

    def __str__(self) -> str:
        return "all p>1" if self.value is None else repr(self.value)


ALL_P = RootDescriptor(None)


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha < 1.0:
        raise DomainError(f"needs 0 <= alpha < 1 (got {alpha})")


def _positive_root(a: float, b: float, c: float) -> float:
    """Larger root of a x^2 + b x + c = 0 (a != 0, real roots), cancellation-free."""
    disc = b * b - 4.0 * a * c
    if disc < 0:
        raise DomainError("quadratic has no real roots")
    sq = math.sqrt(disc)
    # q = -(b + sign(b) sq)/2 gives one root as q/a and the other as c/q
    qq = -0.5 * (b + math.copysign(sq, b))
    r1 = qq / a
    r2 = c / qq if qq != 0.0 else r1
    return max(r1, r2)


# --- Minkowski and reference exponents --------------------------------------

def glassey(n: float) -> float:
    """p_G(n) = 1 + 2/(n-1)."""
    if n <= 1:
        raise DomainError(f"Glassey exponent needs n > 1 (got {n})")
    return 1.0 + 2.0 / (n - 1.0)


def p_G_prime(n: float, alpha: float, mu: float) -> float:
    return 1.0 + 2.0 / ((1.0 - alpha) * (n - 1.0) + mu + alpha)


def p_0(n: float, alpha: float, mu: float) -> float:
    return 1.0 + 1.0 / (n * (1.0 - alpha) + mu)


def p_0_prime(n: float, alpha: float, mu: float) -> Optional[float]:
    """Space-derivative ODE threshold; None when the denominator is not positive."""
    denom = (n + 1.0) * (1.0 - alpha) + mu - 1.0
    if denom <= 0.0:
        return None
    return 1.0 + (1.0 + alpha) / denom


def p_F_prime(n: float, alpha: float) -> float:
    _check_alpha(alpha)
    return 1.0 + (1.0 + alpha) / ((n + 1.0) * (1.0 - alpha))


def p_F_ref(n: float, alpha: float) -> float:
    """Fujita-type exponent of the |u|^p equation (comparison curve only)."""
    _check_alpha(alpha)
    return 1.0 + 2.0 / (n * (1.0 - alpha))


def gamma_prime_coefficients(n: float, alpha: float, mu: float) -> tuple[float, float, float]:
    """(lead, linear, const) with gamma' = -lead p^2 + linear p + const."""
    _check_alpha(alpha)
    lead = n + 1.0 + (mu - alpha) / (1.0 - alpha)
    lin = n + 1.0 + (mu + 3.0 * alpha) / (1.0 - alpha)
    return lead, lin, 2.0


def gamma_prime(n: float, p: float, alpha: float, mu: float) -> float:
    lead, lin, const = gamma_prime_coefficients(n, alpha, mu)
    return -lead * p * p + lin * p + const


def p_c_prime(n: float, alpha: float, mu: float) -> RootDescriptor:
    lead, lin, const = gamma_prime_coefficients(n, alpha, mu)
    if lead <= 0.0:
        return ALL_P
    # lead p^2 - lin p - const = 0
    return RootDescriptor(_positive_root(lead, -lin, -const))


def gamma_ref(n: float, p: float, alpha: float, mu: float) -> float:
    """Strauss-type quadratic of the |u|^p equation."""
    _check_alpha(alpha)
    lead = n - 1.0 + (mu - alpha) / (1.0 - alpha)
    lin = n + 1.0 + (mu + 3.0 * alpha) / (1.0 - alpha)
    return -lead * p * p + lin * p + 2.0


def p_c_ref(n: float, alpha: float, mu: float) -> RootDescriptor:
    _check_alpha(alpha)
    lead = n - 1.0 + (mu - alpha) / (1.0 - alpha)
    lin = n + 1.0 + (mu + 3.0 * alpha) / (1.0 - alpha)
    if lead <= 0.0:
        return ALL_P
    return RootDescriptor(_positive_root(lead, -lin, -2.0))


# --- threshold damping values -----------------------------------------------

def mu_crossing(n: float, alpha: float) -> float:
    """Damping at which p_G' and p_0 coincide."""
    return alpha * (n + 2.0) - (n + 1.0)


def mu_star(n: float, alpha: float) -> float:
    """Damping at which p_c' and p_F' coincide."""
    k = (n + 1.0) * (1.0 - alpha)
    return k + alpha - 2.0 * (n + 1.0) * (1.0 - alpha) ** 2 / (k + 1.0 + alpha)


def mu_zero(n: float, alpha: float) -> float:
    """Damping at which p_c' and p_0' coincide."""
    return -(n - 1.0) * (1.0 - alpha) + math.sqrt(3.0 * alpha * alpha - 4.0 * alpha + 2.0)


def ordering_alpha_min(n: float) -> float:
    """Lower alpha limit above which p_0' > p_c' > p_F' holds for 0 <= mu < mu_zero."""
    d = n * n - 2.0 * n - 2.0
    s = n * n - 2.0 * n - 1.0
    if d <= 0.0 or s < 0.0:
        return 0.0
    return max(0.0, (s - math.sqrt(s)) / d)


# --- exponent records --------------------------------------------------------

@dataclass(frozen=True)
class ExponentSet:
    n: int
    alpha: float
    mu: float
    p_G: Optional[float] = None
    p_G_prime: Optional[float] = None
    p_0: Optional[float] = None
    p_c_prime: Optional[RootDescriptor] = None
    p_0_prime: Optional[float] = None
    p_F_prime: Optional[float] = None
    p_F_ref: Optional[float] = None
    p_c_ref: Optional[RootDescriptor] = None
    mu_crossing: Optional[float] = None
    mu_star: Optional[float] = None
    mu_zero: Optional[float] = None
    # upper limit 1 + 1/mu of the time-derivative result for alpha >= 1
    p_accel: Optional[float] = None
    w: Optional[float] = None
    notes: tuple[str, ...] = field(default=())

    def rows(self) -> list[tuple[str, object]]:
        """Flat (name, value) pairs; roots rendered as numbers or 'all_p'."""
        out = []
        for k, v in asdict(self).items():
            if k == "notes":
                continue
            if isinstance(v, dict):  # RootDescriptor after asdict
                v = "all_p" if v["value"] is None else v["value"]
            elif k == "p_0_prime" and v is None and self.alpha < 1:
                v = "no_finite_threshold"
            out.append((k, v))
        return out


def threshold_set(n: int, alpha: float, mu: float) -> ExponentSet:
    if n < 2:
        raise DomainError(f"Glassey exponent needs n >= 2 (got {n})")
    _check_alpha(alpha)
    if mu < 0:
        raise DomainError(f"mu must be >= 0 (got {mu})")
    return ExponentSet(
        n=n, alpha=alpha, mu=mu,
        p_G=glassey(n),
        p_G_prime=p_G_prime(n, alpha, mu),
        p_0=p_0(n, alpha, mu),
        p_c_prime=p_c_prime(n, alpha, mu),
        p_0_prime=p_0_prime(n, alpha, mu),
        p_F_prime=p_F_prime(n, alpha),
        p_F_ref=p_F_ref(n, alpha),
        p_c_ref=p_c_ref(n, alpha, mu),
        mu_crossing=mu_crossing(n, alpha),
        mu_star=mu_star(n, alpha),
        mu_zero=mu_zero(n, alpha),
        p_accel=None,
    )


# --- FLRW parameterization ---------------------------------------------------

def gamma0_prime(n: float, p: float, w: float) -> float:
    if not -1.0 < w <= 1.0:
        raise DomainError(f"w must satisfy -1 < w <= 1 (got {w})")
    k = 4.0 / (n * (1.0 + w))
    return -(n + 1.0 - k) * p * p + (n + 1.0 + k) * p + 2.0 - k


@dataclass(frozen=True)
class CriticalW:
    value: float
    in_range: bool  # -1 < w <= 1


def critical_w_coefficients(n: float) -> tuple[float, float, float]:
    a = n ** 3 * (n + 1.0)
    b = 2.0 * n * (n * n * (n + 1.0) - (3.0 * n + 4.0) * (n - 1.0))
    c = n ** 3 * (n + 1.0) - 2.0 * n * (3.0 * n + 4.0) * (n - 1.0) + 8.0 * (n * n - n - 1.0)
    return a, b, c


def critical_w(n: int) -> CriticalW:
    """Larger root w* of the quadratic where p_F'(n,w) = p_c'(n,w)."""
    if n < 2:
        raise DomainError(f"needs n >= 2 (got {n})")
    a, b, c = critical_w_coefficients(n)
    w = _positive_root(a, b, c)
    return CriticalW(w, -1.0 < w <= 1.0)


def p_c_prime_flrw(n: int, w: float) -> RootDescriptor:
    """Positive root of gamma0'(n, p, w); defined for the decelerating range."""
    k = 4.0 / (n * (1.0 + w))
    lead = n + 1.0 - k
    if lead <= 0.0:
        return ALL_P
    return RootDescriptor(_positive_root(lead, -(n + 1.0 + k), -(2.0 - k)))


def flrw_thresholds(n: int, w: float) -> ExponentSet:
    f = FLRWParams(n=n, w=w)
    m = flrw_to_model(f, p=2.0)
    if f.regime is Regime.DECELERATING:
        base = threshold_set(n, m.alpha, m.mu)
        root = p_c_prime_flrw(n, w)
        mapped = base.p_c_prime
        notes = ()
        if root.is_finite and mapped.is_finite:
            if abs(root.value - mapped.value) > 1e-10 * root.value:
                raise AssertionError(f"p_c' mismatch: {root.value} vs {mapped.value}")
        return ExponentSet(**{**asdict_shallow(base), "p_c_prime": root, "w": w, "notes": notes})
    return ExponentSet(
        n=n, alpha=m.alpha, mu=m.mu, p_G=glassey(n),
        p_accel=1.0 + 1.0 / m.mu, w=w,
        notes=("accelerating or boundary regime: only the alpha >= 1 results apply",),
    )


def asdict_shallow(obj) -> dict:
    return {k: getattr(obj, k) for k in obj.__dataclass_fields__}
