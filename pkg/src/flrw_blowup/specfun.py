"""Modified Bessel function K_nu by quadrature, and the test functions built from it.

K_nu(s) = int_0^inf exp(-s cosh z) cosh(nu z) dz.  The integrand is even and
entire in z, so the trapezoid rule on [0, z_max] converges geometrically; the
cut-off is placed where the log-integrand has dropped 50 units below its peak.

The test functions are

    lambda(t)  = t^((1-mu)/2) K_nu(t^(1-alpha)/(1-alpha)),   nu = (mu-1)/(2(1-alpha))
    phi(t, x)  = lambda(t) * S_n(|x|),      S_n(r) = int_{|w|=1} exp(r x.w) dS
    phi_q(t,x) = int_0^1 lambda(eta t) S_n(eta^(1-alpha)|x|) eta^(q-1+mu) d eta
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional

import numpy as np

from .params import DomainError, ModelParams, lightcone_radius

# log-integrand drop (natural units) at the truncation point
_TAIL_DROP = 50.0
_N_START = 32
_N_MAX = 1 << 16


class QuadratureError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved relative error {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class BesselContext:
    nu: float
    tol: float = 1e-12
    z_max: Optional[float] = None  # fixed cut-off; chosen per argument when None
    alpha: float = 0.0

    @classmethod
    def from_model(cls, m: ModelParams, tol: float = 1e-12) -> "BesselContext":
        if not m.alpha < 1.0:
            raise DomainError("Bessel test functions need alpha < 1")
        return cls(nu=(m.mu - 1.0) / (2.0 * (1.0 - m.alpha)), tol=tol, alpha=m.alpha)

    def shifted(self, d: float) -> "BesselContext":
        return replace(self, nu=self.nu + d)


def _cutoff(nu: float, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Peak value g* of -s cosh z + nu z and the cut-off z_max (vectorized)."""
    zs = np.arcsinh(nu / s) if nu else np.zeros_like(s)
    gstar = -s * np.cosh(zs) + nu * zs
    # two extra powers of e^z cover the cosh^2 z factor of K''
    g = lambda z: -s * np.cosh(z) + (nu + 2.0) * z
    target = gstar - _TAIL_DROP
    hi = zs + 1.0
    while True:
        bad = g(hi) > target
        if not bad.any():
            break
        hi = np.where(bad, 2.0 * hi, hi)
    lo = zs.copy()
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        above = g(mid) > target
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return gstar, hi


def _kquad(ctx: BesselContext, s: np.ndarray, derivs: bool):
    nu = abs(ctx.nu)
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise DomainError("K_nu needs a positive argument")
    flat = s.ravel()
    gstar, zmax = _cutoff(nu, flat)
    if ctx.z_max is not None:
        zmax = np.full_like(flat, ctx.z_max)
    prev = None
    n = _N_START
    err = math.inf
    while n <= _N_MAX:
        u = np.linspace(0.0, 1.0, n + 1)
        z = zmax[:, None] * u[None, :]
        cz = np.cosh(z)
        # cosh(nu z) e^{-s cosh z} scaled by e^{-g*}
        f = np.exp(-flat[:, None] * cz + nu * z - gstar[:, None]) * 0.5 * (1.0 + np.exp(-2.0 * nu * z))
        w = np.full(n + 1, 1.0)
        w[0] = w[-1] = 0.5
        h = zmax / n
        cols = [f]
        if derivs:
            cols += [-cz * f, cz * cz * f]
        cur = np.stack([(c * w).sum(axis=1) * h for c in cols])
        if prev is not None:
            scale = np.maximum(np.abs(cur), 1e-300)
            err = float(np.max(np.abs(cur - prev) / scale))
            if err <= ctx.tol:
                out = cur * np.exp(gstar)[None, :]
                return [o.reshape(s.shape) for o in out]
        prev = cur
        n *= 2
    raise QuadratureError("K_nu trapezoid did not converge", err)


def _as_out(x):
    return float(x) if np.ndim(x) == 0 else x


def bessel_k(ctx: BesselContext, t):
    (K,) = _kquad(ctx, np.asarray(t, dtype=float), derivs=False)
    return _as_out(K)


def bessel_k_derivs(ctx: BesselContext, t):
    """(K, K', K'') from differentiated integrands."""
    K, K1, K2 = _kquad(ctx, np.asarray(t, dtype=float), derivs=True)
    return _as_out(K), _as_out(K1), _as_out(K2)


def identity_residuals(ctx: BesselContext, t: float) -> dict[str, float]:
    K, K1, K2 = bessel_k_derivs(ctx, t)
    nu = ctx.nu
    ode = t * t * K2 + t * K1 - (t * t + nu * nu) * K
    ode_scale = abs(t * t * K2) + abs(t * K1) + (t * t + nu * nu) * abs(K)
    Kp1 = bessel_k(ctx.shifted(1.0), t)
    rec = K1 - (nu / t * K - Kp1)
    rec_scale = abs(K1) + abs(nu / t * K) + abs(Kp1)
    return {
        "ode_B0": abs(ode) / ode_scale,
        "recurrence_B2": abs(rec) / rec_scale,
        "asymptotic_B1": K * math.sqrt(2.0 * t / math.pi) * math.exp(t) - 1.0,
    }


def ratio_bound(ctx: BesselContext, t_min: float = 1.0, samples: int = 400,
                s_end: float = 50.0) -> float:
    """Upper bound M >= 1 for K_{nu+1}(s)/K_nu(s) over s = t^(1-alpha)/(1-alpha), t >= t_min."""
    if t_min < 1.0:
        raise DomainError("ratio_bound needs t_min >= 1")
    if not ctx.alpha < 1.0:
        raise DomainError("ratio_bound needs alpha < 1")
    s0 = t_min ** (1.0 - ctx.alpha) / (1.0 - ctx.alpha)
    s = np.geomspace(s0, max(s_end, 2.0 * s0), samples)
    ratio = bessel_k(ctx.shifted(1.0), s) / bessel_k(ctx, s)
    # beyond the grid: ratio = 1 + (2 nu + 1)/(2 s) + O(s^-2)
    tail = 1.0 + 1.01 * max(0.0, 2.0 * ctx.nu + 1.0) / (2.0 * s[-1])
    return float(max(1.0, ratio.max(), tail))


# --- sphere integral -----------------------------------------------------------

@lru_cache(maxsize=8)
def _gl(k: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(k)


def _sphere_area(k: int) -> float:
    """Surface measure of the unit sphere S^k in R^(k+1)."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


def sphere_integral(n: int, r):
    """int_{|w|=1} exp(x.w) dS_w as a function of r = |x|."""
    if n < 2:
        raise DomainError("sphere integral needs n >= 2")
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0):
        raise DomainError("r must be >= 0")
    if n == 3:
        with np.errstate(invalid="ignore", divide="ignore"):
            out = np.where(ra > 1e-8, 4.0 * np.pi * np.sinh(ra) / np.where(ra > 0, ra, 1.0),
                           4.0 * np.pi * (1.0 + ra * ra / 6.0))
    else:
        x, w = _gl(160)
        th = 0.5 * np.pi * (x + 1.0)
        wt = 0.5 * np.pi * w * np.sin(th) ** (n - 2)
        out = _sphere_area(n - 2) * (np.exp(np.multiply.outer(ra, np.cos(th))) @ wt)
    return _as_out(out)


def sphere_integral_dr(n: int, r):
    """d/dr of :func:`sphere_integral`."""
    ra = np.asarray(r, dtype=float)
    x, w = _gl(160)
    th = 0.5 * np.pi * (x + 1.0)
    wt = 0.5 * np.pi * w * np.sin(th) ** (n - 2) * np.cos(th)
    out = _sphere_area(n - 2) * (np.exp(np.multiply.outer(ra, np.cos(th))) @ wt)
    return _as_out(out)


# --- test functions ------------------------------------------------------------

class TestKind(str, enum.Enum):
    PHI = "phi"
    PHI_Q = "phi_q"


@dataclass(frozen=True)
class QAdmissibility:
    cd1: bool  # q > -(mu+alpha)/2
    cd2: bool  # q + (mu-1)/2 - (1-alpha)|nu| > -1

    @property
    def ok(self) -> bool:
        return self.cd1 and self.cd2


def q_admissible(q: float, m: ModelParams) -> QAdmissibility:
    a, mu = m.alpha, m.mu
    nu = (mu - 1.0) / (2.0 * (1.0 - a))
    return QAdmissibility(q > -(mu + a) / 2.0, q + (mu - 1.0) / 2.0 - (1.0 - a) * abs(nu) > -1.0)


@dataclass(frozen=True)
class TestFunction:
    # not a pytest class despite the name
    __test__ = False

    kind: TestKind
    model: ModelParams
    q: Optional[float] = None
    tol: float = 1e-12

    def __post_init__(self):
        if not self.model.alpha < 1.0:
            raise DomainError("test functions need alpha < 1")
        if self.model.n < 2:
            raise DomainError("test functions need n >= 2")
        if self.kind is TestKind.PHI_Q:
            if self.q is None:
                raise DomainError("phi_q needs q")
            adm = q_admissible(self.q, self.model)
            if not adm.cd1:
                raise DomainError(f"q = {self.q} violates q > -(mu+alpha)/2")
            if not adm.cd2:
                raise DomainError(f"q = {self.q} violates q + (mu-1)/2 - (1-alpha)|nu| > -1")

    @classmethod
    def phi(cls, m: ModelParams) -> "TestFunction":
        return cls(TestKind.PHI, m)

    @classmethod
    def phi_q(cls, m: ModelParams, q: float) -> "TestFunction":
        return cls(TestKind.PHI_Q, m, q)

    @property
    def ctx(self) -> BesselContext:
        return BesselContext.from_model(self.model, self.tol)

    @property
    def admissibility(self) -> Optional[QAdmissibility]:
        return None if self.q is None else q_admissible(self.q, self.model)


def lam_derivs(ctx: BesselContext, mu: float, t):
    """(lambda, lambda', lambda'') at t > 0."""
    a = ctx.alpha
    t = np.asarray(t, dtype=float)
    s = t ** (1.0 - a) / (1.0 - a)
    K, K1, K2 = (np.asarray(v) for v in bessel_k_derivs(ctx, s))
    b = (1.0 - mu) / 2.0
    ds = t ** (-a)
    d2s = -a * t ** (-a - 1.0)
    tb = t ** b
    lam = tb * K
    lam1 = b * t ** (b - 1.0) * K + tb * K1 * ds
    lam2 = (b * (b - 1.0) * t ** (b - 2.0) * K + 2.0 * b * t ** (b - 1.0) * K1 * ds
            + tb * (K2 * ds * ds + K1 * d2s))
    return lam, lam1, lam2


def _check_t(t) -> None:
    if np.any(np.asarray(t) < 1.0):
        raise DomainError("test functions are evaluated for t >= 1")


def phi(tf: TestFunction, t, r):
    _check_t(t)
    lam, _, _ = lam_derivs(tf.ctx, tf.model.mu, t)
    return _as_out(lam * sphere_integral(tf.model.n, r))


def phi_t(tf: TestFunction, t, r):
    _check_t(t)
    _, lam1, _ = lam_derivs(tf.ctx, tf.model.mu, t)
    return _as_out(lam1 * sphere_integral(tf.model.n, r))


def phi_pde_residual(tf: TestFunction, t: float, r: float) -> float:
    """Relative residual of phi_tt - t^(-2 alpha) Lap phi + (mu/t) phi_t, using Lap phi = phi."""
    _check_t(t)
    m = tf.model
    lam, lam1, lam2 = (float(v) for v in lam_derivs(tf.ctx, m.mu, t))
    S = sphere_integral(m.n, r)
    w = t ** (-2.0 * m.alpha)
    res = lam2 + m.mu / t * lam1 - w * lam
    scale = abs(lam2) + abs(m.mu / t * lam1) + abs(w * lam)
    return abs(res * S) / (scale * S)


def phi_t_ratio_residual(tf: TestFunction, t: float) -> float:
    """|phi_t/phi + t^-alpha K_{nu+1}(s)/K_nu(s)| relative to the ratio size."""
    _check_t(t)
    ctx = tf.ctx
    lam, lam1, _ = (float(v) for v in lam_derivs(ctx, tf.model.mu, t))
    a = tf.model.alpha
    s = t ** (1.0 - a) / (1.0 - a)
    pred = -t ** (-a) * bessel_k(ctx.shifted(1.0), s) / bessel_k(ctx, s)
    return abs(lam1 / lam - pred) / abs(pred)


def phi_integral_ratio(tf: TestFunction, t: float, R: float, nodes: int = 200) -> float:
    """int_{|x| <= A(t)+R} phi dx divided by (t+R)^{((1-alpha)(n-1)-(mu-alpha))/2}."""
    _check_t(t)
    if not R > 0:
        raise DomainError("R must be > 0")
    m = tf.model
    rho = lightcone_radius(t, m.alpha) + R
    x, w = _gl(nodes)
    r = 0.5 * rho * (x + 1.0)
    radial = float(np.sum(0.5 * rho * w * sphere_integral(m.n, r) * r ** (m.n - 1)))
    total = float(phi(tf, t, 0.0)) / sphere_integral(m.n, 0.0) * _sphere_area(m.n - 1) * radial
    expo = ((1.0 - m.alpha) * (m.n - 1.0) - (m.mu - m.alpha)) / 2.0
    return total / (t + R) ** expo


# --- phi_q -----------------------------------------------------------------------

def _phi_q_nodes(beta: float, levels: int = 48, k: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights in eta for int_0^1 f(eta) eta^beta d eta with bounded f.

    Uses eta = sigma^(1/(beta+1)), which turns eta^beta d eta into
    d sigma/(beta+1), then Gauss-Legendre on dyadic intervals toward 0
    (f may still carry a logarithm there).
    """
    x, w = _gl(k)
    sig, sw = [], []
    hi = 1.0
    for _ in range(levels):
        lo = hi / 2.0
        sig.append(lo + (hi - lo) * (x + 1.0) / 2.0)
        sw.append((hi - lo) / 2.0 * w)
        hi = lo
    sig.append(hi * (x + 1.0) / 2.0)
    sw.append(hi / 2.0 * w)
    sigma = np.concatenate(sig)
    weights = np.concatenate(sw) / (beta + 1.0)
    eta = sigma ** (1.0 / (beta + 1.0))
    return eta, weights


def _phi_q_parts(tf: TestFunction, t: float, r: float, deriv: bool):
    m = tf.model
    a, mu, q = m.alpha, m.mu, tf.q
    nu = (mu - 1.0) / (2.0 * (1.0 - a))
    beta = q + (mu - 1.0) / 2.0 - (1.0 - a) * abs(nu)
    # keep eta = sigma^(1/(beta+1)) clear of underflow; the dropped mass is ~2^-levels
    levels = int(max(4, min(48, 600.0 * (beta + 1.0))))
    eta, w = _phi_q_nodes(beta, levels)
    lam, lam1, _ = lam_derivs(tf.ctx, mu, eta * t)
    S = np.asarray(sphere_integral(m.n, eta ** (1.0 - a) * r))
    # eta^(q-1+mu) / eta^beta; remaining singular behaviour sits in lambda
    wt = w * eta ** (q - 1.0 + mu - beta)
    val = float(np.sum(wt * lam * S))
    if not deriv:
        return val
    return val, float(np.sum(wt * eta * lam1 * S))


def phi_q(tf: TestFunction, t: float, r: float) -> float:
    if tf.kind is not TestKind.PHI_Q:
        raise DomainError("phi_q needs a PHI_Q test function")
    _check_t(t)
    return _phi_q_parts(tf, t, r, False)


def dphi_q_dt(tf: TestFunction, t: float, r: float) -> float:
    if tf.kind is not TestKind.PHI_Q:
        raise DomainError("dphi_q_dt needs a PHI_Q test function")
    _check_t(t)
    return _phi_q_parts(tf, t, r, True)[1]


def phi_q_branch(tf: TestFunction) -> int:
    """1 below the switch value of q, 2 above it."""
    m = tf.model
    switch = ((m.n - 1.0) * (1.0 - m.alpha) - (m.mu + m.alpha)) / 2.0
    if abs(tf.q - switch) < 1e-12:
        raise DomainError("q sits on the branch switch; no envelope is stated there")
    return 1 if tf.q < switch else 2


def phi_q_envelope(tf: TestFunction, t: float, r: float) -> float:
    m = tf.model
    n, a, mu, q = m.n, m.alpha, m.mu, tf.q
    e = (q + (mu + a) / 2.0) / (1.0 - a)
    ta = t ** (1.0 - a)
    base = t ** ((a - mu) / 2.0)
    if phi_q_branch(tf) == 1:
        return base * (ta + r) ** (-e)
    return base * (ta + r) ** (-(n - 1.0) / 2.0) * (ta - (1.0 - a) * r) ** ((n - 1.0) / 2.0 - e)


def phi_q_envelope_ratio(tf: TestFunction, t: float, r: float) -> float:
    return phi_q(tf, t, r) / phi_q_envelope(tf, t, r)


def glassey_critical_q(n: int, alpha: float, mu: float, p: float) -> float:
    """The q paired with p = p_c' in the critical space-derivative argument."""
    return ((n - 1.0) * (1.0 - alpha) - (mu + alpha)) / 2.0 - (1.0 - alpha) / p
