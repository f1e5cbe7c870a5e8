"""Problem parameters, the FLRW mapping, scale factor and light-cone radius.

The reduced equation is

    u_tt - t^(-2 alpha) Lap u + (mu / t) u_t = N(u),   t > 1,

with N = |u_t|^p (time derivative) or |grad u|^p (space derivative) and data
of size epsilon supported in |x| <= R.  The FLRW equation of state constant w
enters only through alpha = 2/(n(1+w)) and mu = 2/(1+w).
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Mapping

import numpy as np


class DomainError(ValueError):
    """A parameter lies outside the domain of an operation."""


class ValidationError(DomainError):
    """One or more invariants of a parameter record are violated."""

    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class Nonlinearity(str, enum.Enum):
    TIME_DERIVATIVE = "ut"
    SPACE_DERIVATIVE = "grad"

    @classmethod
    def parse(cls, value: "str | Nonlinearity") -> "Nonlinearity":
        if isinstance(value, Nonlinearity):
            return value
        key = str(value).strip().lower()
        aliases = {
            "ut": cls.TIME_DERIVATIVE,
            "time": cls.TIME_DERIVATIVE,
            "timederivative": cls.TIME_DERIVATIVE,
            "grad": cls.SPACE_DERIVATIVE,
            "space": cls.SPACE_DERIVATIVE,
            "spacederivative": cls.SPACE_DERIVATIVE,
        }
        if key not in aliases:
            raise DomainError(f"unknown nonlinearity {value!r} (expected 'ut' or 'grad')")
        return aliases[key]


class Regime(str, enum.Enum):
    ACCELERATING = "accelerating"
    BOUNDARY = "boundary"
    DECELERATING = "decelerating"


@dataclass(frozen=True)
class ModelParams:
    n: int
    alpha: float
    mu: float
    p: float
    epsilon: float = 1.0
    R: float = 1.0
    nonlinearity: Nonlinearity = Nonlinearity.TIME_DERIVATIVE

    def __post_init__(self):
        object.__setattr__(self, "nonlinearity", Nonlinearity.parse(self.nonlinearity))

    @property
    def in_theorem_scope(self) -> bool:
        """False for n = 1, which is admitted only for solver validation."""
        return self.n >= 2

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["nonlinearity"] = self.nonlinearity.value
        return d


@dataclass(frozen=True)
class FLRWParams:
    n: int
    w: float
    c_scale: float = 1.0

    def __post_init__(self):
        problems = []
        if int(self.n) != self.n or self.n < 2:
            problems.append(f"n must be an integer >= 2 (got {self.n})")
        if not (-1.0 < self.w <= 1.0):
            problems.append(f"w must satisfy -1 < w <= 1 (got {self.w})")
        if not self.c_scale > 0:
            problems.append(f"c_scale must be positive (got {self.c_scale})")
        if problems:
            raise ValidationError(problems)

    @property
    def alpha(self) -> float:
        return 2.0 / (self.n * (1.0 + self.w))

    @property
    def mu(self) -> float:
        return 2.0 / (1.0 + self.w)

    @property
    def regime(self) -> Regime:
        return regime(self.n, self.w)


def regime(n: int, w: float) -> Regime:
    # w vs 2/n - 1 is the same split as alpha vs 1; compare n(1+w) with 2 to
    # keep the boundary exact for rational inputs like w = -1/3, n = 3.
    s = n * (1.0 + w)
    if math.isclose(s, 2.0, rel_tol=0.0, abs_tol=1e-14):
        return Regime.BOUNDARY
    return Regime.ACCELERATING if s < 2.0 else Regime.DECELERATING


def flrw_to_model(f: FLRWParams, p: float, epsilon: float = 1.0, R: float = 1.0,
                  nonlinearity: "Nonlinearity | str" = Nonlinearity.TIME_DERIVATIVE) -> ModelParams:
    if not (-1.0 < f.w <= 1.0):
        raise DomainError(f"w must satisfy -1 < w <= 1 (got {f.w})")
    alpha, mu = f.alpha, f.mu
    if f.regime is Regime.BOUNDARY:
        # pin the exact values rather than 2/(n(1+w)) rounded
        alpha, mu = 1.0, float(f.n)
    return ModelParams(n=f.n, alpha=alpha, mu=mu, p=p, epsilon=epsilon, R=R,
                       nonlinearity=Nonlinearity.parse(nonlinearity))


def scale_factor(t: float, f: FLRWParams) -> float:
    if t <= 0:
        raise DomainError(f"scale factor needs t > 0 (got {t})")
    return f.c_scale * t ** (2.0 / (f.n * (1.0 + f.w)))


def lightcone_radius(t, alpha: float):
    """Propagation distance A(t) = int_1^t s^(-alpha) ds.

    Accepts scalar or array ``t``; alpha == 1 selects the logarithm exactly.
    """
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 1.0):
        raise DomainError("light-cone radius needs t >= 1")
    if alpha < 0:
        raise DomainError("alpha must be >= 0")
    if alpha == 1.0:
        out = np.log(ta)
    elif alpha == 0.0:
        out = ta - 1.0
    else:
        # expm1 keeps the small-(1-alpha) case accurate
        out = np.expm1((1.0 - alpha) * np.log(ta)) / (1.0 - alpha)
    return float(out) if np.ndim(out) == 0 else out


def validate(m: ModelParams) -> ModelParams:
    problems = []
    if isinstance(m.n, bool) or not float(m.n).is_integer():
        problems.append(f"n must be an integer (got {m.n!r})")
    elif m.n < 1:
        problems.append(f"n must be >= 1 (got {m.n})")
    # written as "not (x > y)" so that NaN fails every check
    if not m.alpha >= 0:
        problems.append(f"alpha must be >= 0 (got {m.alpha})")
    if not m.mu >= 0:
        problems.append(f"mu must be >= 0 (got {m.mu})")
    if not m.p > 1:
        problems.append(f"p must be > 1 (got {m.p})")
    if not m.epsilon > 0:
        problems.append(f"epsilon must be > 0 (got {m.epsilon})")
    if not m.R > 0:
        problems.append(f"R must be > 0 (got {m.R})")
    if problems:
        raise ValidationError(problems)
    return m


# --- configuration files ---------------------------------------------------

PARAM_KEYS = ("n", "alpha", "mu", "p", "epsilon", "R", "nonlinearity", "w")


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DomainError(f"config line {lineno}: empty key")
        out[key] = value
    return out


def load_config(path: "str | Path") -> dict[str, Any]:
    """Read a flat key-value file, or a JSON manifest written by the CLI."""
    import json

    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        return dict(data.get("params", data))
    return parse_config_text(text)


def model_from_mapping(cfg: Mapping[str, Any], **overrides) -> ModelParams:
    """Build validated ModelParams from config/CLI values.

    A ``w`` entry overrides alpha and mu through the FLRW mapping.
    """
    merged = {k: v for k, v in cfg.items() if v is not None}
    merged.update({k: v for k, v in overrides.items() if v is not None})
    try:
        n = int(float(merged.get("n", 3)))
        p = float(merged["p"]) if "p" in merged else 2.0
        eps = float(merged.get("epsilon", 1.0))
        R = float(merged.get("R", 1.0))
        nl = Nonlinearity.parse(merged.get("nonlinearity", "ut"))
        w = merged.get("w")
        if w is not None and str(w).strip().lower() not in ("", "none"):
            f = FLRWParams(n=n, w=float(w))
            m = flrw_to_model(f, p=p, epsilon=eps, R=R, nonlinearity=nl)
        else:
            m = ModelParams(n=n, alpha=float(merged.get("alpha", 0.0)),
                            mu=float(merged.get("mu", 0.0)), p=p, epsilon=eps, R=R,
                            nonlinearity=nl)
    except (KeyError, TypeError) as exc:
        raise DomainError(f"bad parameter value: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, DomainError):
            raise
        raise DomainError(f"bad parameter value: {exc}") from exc
    return validate(m)
