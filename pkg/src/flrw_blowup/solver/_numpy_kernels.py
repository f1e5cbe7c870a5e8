"""Pure-numpy kernels with the same signatures as the compiled module."""

from __future__ import annotations

import numpy as np


def rhs(u, v, t, dr, n, alpha, mu, p, mode):
    m = u.shape[0]
    up = np.empty(m)
    up[:-1] = u[1:]
    up[-1] = 0.0
    lap = np.empty(m)
    ur = np.zeros(m)
    lap[0] = n * 2.0 * (up[0] - u[0]) / (dr * dr)
    if m > 1:
        ur[1:] = (up[1:] - u[:-1]) / (2.0 * dr)
        r = np.arange(1, m) * dr
        lap[1:] = (up[1:] - 2.0 * u[1:] + u[:-1]) / (dr * dr) + (n - 1) * ur[1:] / r
    dv = t ** (-2.0 * alpha) * lap - (mu / t) * v
    if mode == 1:
        dv += np.abs(v) ** p
    elif mode == 2:
        dv += np.abs(ur) ** p
    return v.copy(), dv


def rk4_step(u, v, work, t, dt, dr, m, n, alpha, mu, p, mode):
    uu, vv = u[:m], v[:m]
    k1u, k1v = rhs(uu, vv, t, dr, n, alpha, mu, p, mode)
    k2u, k2v = rhs(uu + 0.5 * dt * k1u, vv + 0.5 * dt * k1v, t + 0.5 * dt, dr, n, alpha, mu, p, mode)
    k3u, k3v = rhs(uu + 0.5 * dt * k2u, vv + 0.5 * dt * k2v, t + 0.5 * dt, dr, n, alpha, mu, p, mode)
    k4u, k4v = rhs(uu + dt * k3u, vv + dt * k3v, t + dt, dr, n, alpha, mu, p, mode)
    uu += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    vv += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    if not (np.all(np.isfinite(uu)) and np.all(np.isfinite(vv))):
        return -1.0
    return float(np.max(np.abs(vv))) if m else 0.0
