"""Symbolic lifespan upper bounds and their evaluation with C = 1."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional

from .params import DomainError

# exponents closer than this (relative) count as a tie
TIE_TOL = 1e-12


class BoundKind(str, enum.Enum):
    POWER_LAW = "power_law"            # T <= C eps^-k
    EXPONENTIAL = "exponential"        # T <= exp(C eps^-r)
    IMPLICIT_POWER_LOG = "implicit_power_log"  # T^s (ln T)^-ell <= C eps^-m


@dataclass(frozen=True)
class LifespanBound:
    kind: BoundKind
    source: str
    condition: str
    applicable: bool
    exponent: Optional[float] = None   # k (power law) or r (exponential)
    s: Optional[float] = None
    ell: Optional[float] = None
    m: Optional[float] = None
    data_condition: str = ""

    @classmethod
    def power_law(cls, k, source, condition, applicable, **kw) -> "LifespanBound":
        return cls(BoundKind.POWER_LAW, source, condition, applicable, exponent=k, **kw)

    @classmethod
    def exponential(cls, r, source, condition, applicable, **kw) -> "LifespanBound":
        return cls(BoundKind.EXPONENTIAL, source, condition, applicable, exponent=r, **kw)

    @classmethod
    def implicit(cls, s, ell, m, source, condition, applicable, **kw) -> "LifespanBound":
        if ell == 0.0:
            k = m / s if s and s > 0 else None
            return cls.power_law(k, source, condition, applicable, **kw)
        return cls(BoundKind.IMPLICIT_POWER_LOG, source, condition, applicable,
                   s=s, ell=ell, m=m, **kw)

    @property
    def induced_power(self) -> float:
        """Power k in T ~ eps^-k ignoring log factors; inf for exponential bounds."""
        if self.kind is BoundKind.POWER_LAW:
            return math.inf if self.exponent is None else self.exponent
        if self.kind is BoundKind.IMPLICIT_POWER_LOG:
            if self.s is None or self.s <= 0:
                return math.inf
            return self.m / self.s
        return math.inf

    @property
    def has_log_correction(self) -> bool:
        return self.kind is BoundKind.IMPLICIT_POWER_LOG and bool(self.ell)

    @property
    def headline(self) -> Optional[float]:
        """Single number for tables: k, r, or m/s."""
        if self.kind is BoundKind.IMPLICIT_POWER_LOG:
            return self.induced_power
        return self.exponent

    def scaled(self, factor: float) -> "LifespanBound":
        """Substitute A0 = eps^factor into a bound stated in terms of A0."""
        if self.kind is BoundKind.IMPLICIT_POWER_LOG:
            return replace(self, m=self.m * factor)
        return replace(self, exponent=self.exponent * factor)

    def describe(self) -> str:
        if self.kind is BoundKind.POWER_LAW:
            return f"T <= C eps^-{self.exponent:.12g}"
        if self.kind is BoundKind.EXPONENTIAL:
            return f"T <= exp(C eps^-{self.exponent:.12g})"
        return (f"T^{self.s:.12g} (ln T)^-{self.ell:.12g} <= C eps^-{self.m:.12g}")


@dataclass(frozen=True)
class ImplicitValue:
    """Solution of T^s (ln T)^-ell = eps^-m with C = 1."""

    T: float
    nonunique: bool

    def __float__(self) -> float:
        return self.T


def best_bound(bounds: Iterable[LifespanBound]) -> LifespanBound:
    """Asymptotically smallest applicable bound as eps -> 0.

    Power-type bounds (power law, implicit power-log via m/s) beat every
    exponential one; among equals the earlier entry wins.
    """
    cands = [b for b in bounds if b.applicable]
    if not cands:
        raise DomainError("best_bound needs at least one applicable bound")
    power = [b for b in cands if b.kind is not BoundKind.EXPONENTIAL]
    pool = power if power else cands
    key = (lambda b: b.induced_power) if power else (lambda b: b.exponent)
    best = pool[0]
    for b in pool[1:]:
        kb, kbest = key(b), key(best)
        if kb < kbest - TIE_TOL * max(1.0, abs(kbest)):
            best = b
    return best


def bound_value(b: LifespanBound, epsilon: float):
    if not epsilon > 0:
        raise DomainError(f"epsilon must be > 0 (got {epsilon})")
    if not b.applicable:
        raise DomainError(f"bound {b.source} is not applicable")
    if b.kind is BoundKind.POWER_LAW:
        return epsilon ** (-b.exponent)
    if b.kind is BoundKind.EXPONENTIAL:
        x = epsilon ** (-b.exponent)
        return math.exp(x) if x < 709.0 else math.inf
    return _solve_implicit(b.s, b.ell, b.m, epsilon)


def _solve_implicit(s: float, ell: float, m: float, epsilon: float) -> ImplicitValue:
    # x = ln T; g(x) = s x - ell ln x is increasing for x > ell/s
    target = m * math.log(1.0 / epsilon)
    if s <= 0:
        return ImplicitValue(math.nan, True)
    lo = max(1.0, ell / s)
    g = lambda x: s * x - ell * math.log(x)
    if g(lo) >= target:
        return ImplicitValue(math.exp(lo), True)
    hi = 2.0 * lo
    while g(hi) < target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return ImplicitValue(math.exp(0.5 * (lo + hi)), False)
